"""Builtin scenarios.

Each scenario is a function ``run(ctx)`` that reads its merged configuration
from ``ctx.cfg`` and records analyses, series and warnings on ``ctx``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import correlations as corr
from .. import limits, rates
from ..dynamics import CAT_MAP, AffineToralMap, RandomSystem, sample_word, translation_map
from ..errors import BudgetExceeded, NoDecayError
from ..observables import TrigPolynomial, difference_lift, first_coordinate_lift, pairing
from ..cyclotomic import Cyclotomic
from .config import schedule_values

# J cat J with J = diag(1, -1): hyperbolic, with stable and unstable lines swapped relative to cat
REFLECTED_CAT = AffineToralMap([[2, -1], [-1, 1]])


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    defaults: dict
    run: object


def _observable(ctx, default: TrigPolynomial) -> TrigPolynomial:
    recs = ctx.cfg.get("observable")
    if not recs:
        return default
    return TrigPolynomial.from_records(recs)


def _classify(series) -> dict:
    try:
        cls = rates.classify_decay(series)
        return cls.to_dict() | {"verdict": cls.verdict()}
    except ValueError as exc:
        return {"tag": "unfit", "reason": str(exc)}


def _exact_abs2(v):
    if isinstance(v, Cyclotomic):
        return v.abs2()
    if isinstance(v, (int, Fraction)):
        return v * v
    return abs(complex(v)) ** 2


# -- uniform-translations --------------------------------------------------------

def run_uniform_translations(ctx):
    p = ctx.cfg["params"]
    q, k = int(p["q"]), tuple(p["k"])
    system = RandomSystem([translation_map([Fraction(j, q)] * len(k)) for j in range(q)])
    A = TrigPolynomial.character(k)
    B = TrigPolynomial.character(tuple(-v for v in k))
    n_max = int(p["N_max"])
    all_one = True
    for w in range(int(p["words"])):
        word = sample_word(system, n_max, ctx.seed, (10, w))
        vals = corr.quenched_series(A, B, word, range(n_max + 1))
        all_one &= all(_exact_abs2(v) == 1 for v in vals)
        if w == 0:
            ctx.add_correlation("quenched_word0", corr.CorrelationSeries(list(range(n_max + 1)), vals, "quenched"),
                                title="quenched correlation, one word", logy=False)
    ann = corr.annealed_series_exact(A, B, system, range(n_max + 1))
    ann_zero = all(v == 0 for v in ann.values[1:])
    ctx.add_correlation("annealed_exact", ann, title="annealed correlation (exact)", logy=False)
    ctx.analysis("non_mixing", {
        "q": q, "k": list(k), "words": int(p["words"]), "N_max": n_max,
        "quenched_modulus_exactly_one": bool(all_one),
        "annealed_zero_for_N_ge_1": bool(ann_zero),
    })

    C = TrigPolynomial.cosine(k)
    D = limits.asymptotic_variance(C, system, tol=1e-9, K_max=int(p["variance_terms"]), mode="exact")
    Ns = schedule_values(ctx.cfg["schedule"])
    rep = limits.quenched_clt_report(C, system, range(int(p["clt_words"])), Ns, ctx.cfg["xi"],
                                     ctx.cfg["samples"], D.value, seed=ctx.seed, threads=ctx.threads)
    ks_mean = np.mean(np.array(rep.ks), axis=0)
    ctx.add_statistic("clt_ks", Ns, ks_mean.tolist(), title="KS distance to Normal(0, D), mean over words",
                      ylabel="KS", logx=True)
    ctx.analysis("clt", {"D": D.value, "D_tail_bound": D.tail_bound, "ks": rep.ks,
                         "char_distance": rep.char_distance, "min_ks": float(np.min(rep.ks)),
                         "clt_fails": bool(np.min(rep.ks) > rep.ks_threshold)})


# -- anosov-fixed ----------------------------------------------------------------

def run_anosov_fixed(ctx):
    p = ctx.cfg["params"]
    system = RandomSystem([CAT_MAP])
    A = _observable(ctx, TrigPolynomial.cosine((1, 0)))
    D = limits.asymptotic_variance(A, system)
    growth_N = [2**j for j in range(6, 13)]
    word = sample_word(system, max(p["variance_N"] + schedule_values(ctx.cfg["schedule"]) + growth_N), ctx.seed)
    vn = [limits.quenched_variance(A, word, n) / n for n in p["variance_N"]]
    ctx.add_statistic("variance_ratio", p["variance_N"], vn, title="V_N / N", ylabel="V_N/N", logx=True)
    Ns = schedule_values(ctx.cfg["schedule"])
    rep = limits.quenched_clt_report(A, system, [0], Ns, ctx.cfg["xi"], ctx.cfg["samples"], D.value,
                                     seed=ctx.seed, threads=ctx.threads)
    ctx.add_statistic("clt_ks", Ns, rep.ks[0], title="KS distance to Normal(0, D)", ylabel="KS", logx=True, logy=True)
    ctx.analysis("variance", {"D": D.value, "D_method": D.method, "D_tail_bound": D.tail_bound,
                              "V_over_N": dict(zip(map(str, p["variance_N"]), vn))})
    ctx.analysis("clt", {"ks": rep.ks[0], "char_distance": rep.char_distance[0], "passes": rep.passes[0]})

    pts = limits._sample_points(int(p["growth_samples"]), A.dim, ctx.seed, (7,))
    sums = limits.birkhoff_samples(A, word, growth_N, pts)
    mags = [float(np.max(np.abs(sums[n]))) for n in growth_N]
    slope, ci = rates.birkhoff_growth_exponent(growth_N, mags)
    ctx.add_statistic("max_birkhoff", growth_N, mags, title="max over x of |S_N|", logx=True, logy=True)
    ctx.analysis("growth", {"slope": slope, "ci": list(ci), "within_half_plus_0.1": bool(slope <= 0.6)})
    last = sums[growth_N[-1]] / math.sqrt(growth_N[-1])
    ctx.add_histogram("birkhoff_histogram", last)


# -- tt-inverse-a ----------------------------------------------------------------

def run_tt_inverse_a(ctx):
    p = ctx.cfg["params"]
    law = corr.StepLaw.heavy_negative_tail(p["scale"], int(p["cutoff"]))
    g = CAT_MAP
    k = tuple(p["k"])
    A = TrigPolynomial.character(k)
    B = TrigPolynomial.character(tuple(-v for v in k))
    Ns = schedule_values(ctx.cfg["schedule"])
    series = corr.commuting_annealed_series(g, law, A, B, Ns, truncation=p.get("truncation"), on_loss="warn")
    for n, loss in zip(Ns, series.metadata["truncation_loss"]):
        if loss > 1e-9:
            ctx.warn(f"walk truncation lost {loss:.3g} mass at N={n}")
    ctx.add_correlation("annealed_walk", series, title="annealed correlation P(W_N = 0)", logx=True, logy=True)
    scaled = [n * n * v.real for n, v in zip(Ns, series.values)]
    ref = scaled[0]
    lo, hi = (1 - p["bracket"]) * ref, (1 + p["bracket"]) * ref
    ctx.add_statistic("N2_return_probability", Ns, scaled, title="N^2 P(W_N = 0)", logx=True)
    cls = _classify(series)
    ctx.analysis("annealed", {
        "N2P": dict(zip(map(str, Ns), scaled)), "bracket": [lo, hi],
        "within_bracket": bool(all(lo <= v <= hi for v in scaled)),
        "classification": cls, "step_mean": law.mean(), "step_variance": law.variance(),
    })

    n_max = Ns[-1]
    box = corr.character_box(2, int(p["box"]))
    paths = [corr.sample_steps(law, n_max, ctx.seed, (20, w)) for w in range(int(p["words"]))]
    lo = min(int(np.cumsum(st).min(initial=0)) for st in paths)
    hi = max(int(np.cumsum(st).max(initial=0)) for st in paths)
    weights = corr.box_hit_weights(g, box, lo, hi, p["s"])
    n0s, c_vals = [], []
    for steps in paths:
        vals = corr.commuting_quenched_series(g, steps, A, B, range(n_max + 1))
        nz = [n for n, v in enumerate(vals) if v != 0]
        n0s.append(nz[-1] + 1 if nz else 0)
        c_vals.append(corr.commuting_mixing_constant(steps, weights, p["alpha"]))
    quenched = {"words": len(n0s), "N0_max": int(max(n0s)), "N0_median": float(np.median(n0s)),
                "box_hit_exponents": sorted(weights), "C_distinct_values": len(set(c_vals)),
                "C_max": max(c_vals), "C_median": float(np.median(c_vals))}
    try:
        tail = rates.tail_exponent(c_vals, seed=ctx.seed)
        quenched["C_tail"] = tail.to_dict()
    except ValueError as exc:
        quenched["C_tail"] = {"error": str(exc)}
    ctx.add_histogram("mixing_constant_log", np.log(c_vals), bins=30)
    ctx.analysis("quenched", quenched)


# -- tt-inverse-b ----------------------------------------------------------------

def run_tt_inverse_b(ctx):
    p = ctx.cfg["params"]
    g = CAT_MAP
    A = _observable(ctx, TrigPolynomial.cosine((1, 0)))
    Ns = schedule_values(ctx.cfg["schedule"])
    law = corr.StepLaw.symmetric_simple()
    paths = [corr.sample_steps(law, Ns[-1], ctx.seed, (30, w)) for w in range(int(p["words"]))]
    rep = limits.tt_inverse_statistics(g, A, paths, Ns, ctx.cfg["samples"], ctx.seed, pooled_N=[Ns[-1]])
    summ = rep.summary()
    ctx.add_statistic("ks_pass_fraction", Ns, summ["ks_sqrtV_pass_fraction"],
                      title="fraction of words with KS(S_N / sqrt V_N) < 0.05", logx=True)
    ctx.add_statistic("median_concentration", Ns, summ["median_concentration"],
                      title="median of max l^2 / V_N", logx=True, logy=True)
    ctx.add_statistic("median_max_abs_S", Ns, summ["median_max_abs_S"], title="median max |S_N|", logx=True, logy=True)
    slope, ci = rates.birkhoff_growth_exponent(Ns, summ["median_max_abs_S"])
    lt = rep.max_local_time[:, -1]
    summ.update({
        "growth_slope": slope, "growth_ci": list(ci),
        "local_time_below_N051_fraction": float(np.mean(lt < Ns[-1] ** 0.51)),
        "pooled_fails_every_normal": {str(n): bool(rep.pooled_ks[n] > rep.pooled_critical[n]) for n in rep.pooled_ks},
    })
    ctx.analysis("tt_inverse", summ)


# -- sl2-coexpanding -------------------------------------------------------------

def sl2_system(probs) -> RandomSystem:
    gens = [CAT_MAP, CAT_MAP.inverse(), REFLECTED_CAT, REFLECTED_CAT.inverse()]
    return RandomSystem(gens, probs)


def run_sl2_coexpanding(ctx):
    p = ctx.cfg["params"]
    system = sl2_system(p["probs"])
    A = _observable(ctx, TrigPolynomial.cosine((1, 0)))
    exact_N = list(range(int(p["exact_N_max"]) + 1))
    ex = corr.annealed_series_exact(A, A, system, exact_N, budget=int(p["budget"]))
    ctx.add_correlation("annealed_exact", ex, title="annealed autocorrelation (exact)", logy=True)
    mc = corr.annealed_series_mc(A, A, system, p["mc_N"], int(p["mc_samples"]), ctx.seed, stream=40,
                                 threads=ctx.threads)
    ctx.add_correlation("annealed_mc", mc, title="annealed autocorrelation (Monte Carlo)", logy=True)
    ctx.analysis("annealed", {"classification": _classify(corr.CorrelationSeries(exact_N[1:], ex.values[1:], "annealed-exact")),
                              "mc_within_3se_plus_1e-3": bool(all(abs(v) < 3 * s + 1e-3 for v, s in zip(mc.values, mc.stderr)))})

    B2 = difference_lift(A)
    two = corr.annealed_series_exact(B2, B2, system.lifted(), list(range(int(p["two_point_N_max"]) + 1)),
                                     budget=int(p["budget"]))
    ctx.add_correlation("two_point_exact", two, title="two-point annealed autocorrelation of A(x) - A(y)", logy=True)
    ctx.analysis("two_point", {"classification": _classify(corr.CorrelationSeries(two.N[1:], two.values[1:], "annealed-exact"))})

    kw = dict(tol=p["tol"], K_max=int(p["K_max"]), samples=int(p["mc_samples"]), seed=ctx.seed,
              budget=int(p["budget"]), threads=ctx.threads)
    D1 = limits.asymptotic_variance(A, system, **kw)
    Dd = limits.asymptotic_variance(B2, system, **kw)
    Df = limits.asymptotic_variance(first_coordinate_lift(A), system, **kw)
    allow_d = 2 * (Dd.tail_bound + 2 * D1.tail_bound + Dd.stderr + 2 * D1.stderr)
    allow_f = 2 * (Df.tail_bound + D1.tail_bound + Df.stderr + D1.stderr)
    ctx.analysis("asymptotic_variance", {
        "D": D1.to_dict(), "D_difference": Dd.to_dict(), "D_first": Df.to_dict(),
        "difference_gap": abs(Dd.value - 2 * D1.value), "difference_allowance": allow_d,
        "first_gap": abs(Df.value - D1.value), "first_allowance": allow_f,
        "identities_hold": bool(abs(Dd.value - 2 * D1.value) <= allow_d and abs(Df.value - D1.value) <= allow_f),
    })
    res_N = p["residual_N"]
    res = limits.annealed_char_residual(B2, system, res_N, p["residual_xi"], int(p["residual_samples"]), ctx.seed,
                                        Dd.value, threads=ctx.threads)
    ctx.add_statistic("char_residual", res_N, [abs(res[n][0]) for n in res_N], [res[n][1] for n in res_N],
                      title="|annealed characteristic-function residual|", logx=True, logy=True)
    ctx.analysis("char_residual", {str(n): {"re": res[n][0].real, "im": res[n][0].imag, "stderr": res[n][1]} for n in res_N})


# -- custom ----------------------------------------------------------------------

def run_custom(ctx):
    if "system" not in ctx.cfg:
        raise ValueError("scenario 'custom' needs a 'system'")
    system = RandomSystem.from_dict(ctx.cfg["system"])
    d = system.dim
    A = _observable(ctx, TrigPolynomial.cosine((1,) + (0,) * (d - 1)))
    Ns = schedule_values(ctx.cfg["schedule"])
    flags = ctx.cfg.get("analyses", {})
    try:
        series = corr.annealed_series_exact(A, A, system, Ns, budget=int(ctx.cfg["params"]["budget"]))
    except BudgetExceeded as exc:
        ctx.budget_hit(exc.stage)
        if not flags.get("mc_fallback", True):
            raise
        series = corr.annealed_series_mc(A, A, system, Ns, ctx.cfg["samples"], ctx.seed, threads=ctx.threads)
    ctx.add_correlation("annealed", series, title="annealed autocorrelation", logy=True)
    out = {"classification": _classify(series)}
    if flags.get("asymptotic_variance", True):
        try:
            D = limits.asymptotic_variance(A, system, samples=ctx.cfg["samples"], seed=ctx.seed, threads=ctx.threads,
                                           K_max=int(ctx.cfg["params"]["K_max"]), tol=ctx.cfg["params"]["tol"])
            out["D"] = D.to_dict()
        except NoDecayError as exc:
            out["D"] = {"error": str(exc)}
    word = sample_word(system, Ns[-1], ctx.seed, 50)
    q = corr.quenched_series(A, A, word, Ns)
    ctx.add_correlation("quenched", corr.CorrelationSeries(Ns, q, "quenched"), title="quenched autocorrelation")
    out["quenched_norm2"] = complex(pairing(A, A)).real
    ctx.analysis("custom", out)


COMMON = {"samples": 2000, "seed": 0, "gamma": 1.0, "xi": [0.25, 0.5, 1.0, 1.5, 2.0], "s_values": [0.5, 1.0],
          "analyses": {}}

BUILTINS = [
    Scenario(
        "uniform-translations",
        "random translations by j/q: quenched correlations of modulus one, annealed exactly zero, no CLT",
        {"schedule": {"N": [16, 64, 256]}, "samples": 2000,
         "params": {"q": 64, "k": [1], "words": 5, "N_max": 200, "clt_words": 3, "variance_terms": 8}},
        run_uniform_translations,
    ),
    Scenario(
        "tt-inverse-a",
        "cat map driven by a drifting walk with heavy negative jumps: annealed decay ~ N^-2, quenched exact zeros",
        {"schedule": {"N": [100, 150, 200, 300, 500, 700, 1000, 1400, 2000]},
         "params": {"scale": 0.001, "cutoff": 100000, "k": [1, 0], "words": 2000, "alpha": 0.5, "box": 3, "s": 0.0, "bracket": 0.2}},
        run_tt_inverse_a,
    ),
    Scenario(
        "tt-inverse-b",
        "cat map driven by a simple symmetric walk: quenched CLT with exact variance, annealed N^(3/4) scaling",
        {"schedule": {"N": [64, 128, 256, 512, 1024, 2048, 4096]}, "samples": 2000,
         "params": {"words": 200}},
        run_tt_inverse_b,
    ),
    Scenario(
        "sl2-coexpanding",
        "random products of two hyperbolic SL(2,Z) maps and inverses: annealed exponential mixing, variance identities",
        {"params": {"probs": [0.4, 0.1, 0.4, 0.1], "exact_N_max": 12, "two_point_N_max": 20, "budget": 2000000,
                    "mc_N": [16, 20, 24, 28, 32], "mc_samples": 2000, "tol": 1e-3, "K_max": 40,
                    "residual_N": [16, 64, 256], "residual_xi": 1.0, "residual_samples": 8192}},
        run_sl2_coexpanding,
    ),
    Scenario(
        "anosov-fixed",
        "the cat map alone: exact asymptotic variance, V_N/N, CLT and Birkhoff growth",
        {"schedule": {"N": [256, 1024, 4096]}, "samples": 100000,
         "params": {"variance_N": [64, 128, 256, 512], "growth_samples": 4000}},
        run_anosov_fixed,
    ),
]

CUSTOM = Scenario(
    "custom",
    "user-supplied system: annealed/quenched autocorrelations and asymptotic variance",
    {"schedule": {"N": [0, 1, 2, 3, 4, 5, 6, 7, 8]}, "params": {"budget": 200000, "K_max": 40, "tol": 1e-3}},
    run_custom,
)

BY_NAME = {s.name: s for s in BUILTINS + [CUSTOM]}


def list_scenarios() -> list:
    """``[(name, description)]`` in a fixed order."""
    return [(s.name, s.description) for s in BUILTINS]
