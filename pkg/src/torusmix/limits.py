"""Birkhoff sums, quenched variances, asymptotic variances and CLT diagnostics.

``S_N A = sum_{n<N} A o F^n`` is kept as an exact trigonometric polynomial when
only integrals are needed, and is sampled on exact dyadic-grid orbits when its
law in ``x`` is needed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize, stats

from .correlations import (
    DEFAULT_LEAF_BUDGET,
    _KoopmanPowers,
    _mean_stderr,
    annealed_series_mc,
    map_power,
    power_hits,
)
from .dynamics import (
    AffineToralMap,
    GridStepper,
    RandomSystem,
    Word,
    float_to_grid,
    iter_compositions,
    map_on_grid,
    sample_grid_points,
    sample_word,
)
from .errors import BudgetExceeded, NoDecayError
from .observables import TrigPolynomial, evaluate_grid, evaluate_grid_real, pairing, pullback
from .parallel import ordered_map
from .streams import stream_rng

__all__ = [
    "VarianceReport",
    "AsymptoticVariance",
    "CLTReport",
    "LocalTimeProfile",
    "TTInverseReport",
    "birkhoff_polynomial",
    "pulled_orbit",
    "quenched_variance",
    "variance_split",
    "asymptotic_variance",
    "birkhoff_samples",
    "characteristic_function",
    "ks_distance",
    "min_normal_ks",
    "quenched_clt_report",
    "annealed_char_residual",
    "local_time_profile",
    "tt_inverse_statistics",
]

DEFAULT_SUPPORT_BUDGET = 1_000_000


def _as_real(v) -> float:
    return complex(v).real


# -- exact Birkhoff polynomials and variances ------------------------------------

def pulled_orbit(A: TrigPolynomial, word: Word, N: int) -> list:
    """``[A o F^n for n < N]``."""
    if N > len(word):
        raise ValueError(f"word of length {len(word)} is too short for N = {N}")
    if N <= 0:
        return []
    return [pullback(A, F) for _, F in zip(range(N), iter_compositions(word, N - 1))]


def birkhoff_polynomial(A: TrigPolynomial, word: Word, N: int, *, budget: int = DEFAULT_SUPPORT_BUDGET) -> TrigPolynomial:
    """Exact ``S_N A`` as a trigonometric polynomial."""
    acc = {}
    for term in pulled_orbit(A, word, N):
        for k, c in term.items():
            acc[k] = acc[k] + c if k in acc else c
        if len(acc) > budget:
            raise BudgetExceeded(
                f"Birkhoff sum support exceeds {budget} modes",
                stage="birkhoff_polynomial",
                suggestion="sample S_N on grid orbits instead",
            )
    return TrigPolynomial(A.dim, acc)


def quenched_variance(A: TrigPolynomial, word: Word, N: int, *, method: str = "square") -> float:
    """``V_N = int (S_N A)^2 dx``.

    ``method="square"`` pairs the exact polynomial ``S_N`` with itself;
    ``method="pairwise"`` sums all ``N^2`` quenched correlations.
    """
    if method == "square":
        S = birkhoff_polynomial(A, word, N)
        return _as_real(pairing(S, S))
    if method == "pairwise":
        orbit = pulled_orbit(A, word, N)
        total = 0
        for a in orbit:
            for b in orbit:
                total = total + pairing(a, b)
        return _as_real(total)
    raise ValueError(f"unknown method {method!r}")


@dataclass
class VarianceReport:
    """``V_N`` partitioned by the gap ``|n - m|`` and split at ``gamma ln N``."""

    N: int
    V_N: float
    gamma: float
    cutoff: float
    gap_table: dict
    D_low: float
    D_high: float
    progression_sums: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gap_table"] = {str(k): v for k, v in self.gap_table.items()}
        d["progression_sums"] = {str(k): v for k, v in self.progression_sums.items()}
        return d


def variance_split(A: TrigPolynomial, word: Word, N: int, gamma: float, *, progression_max: int = 16) -> VarianceReport:
    """Gap partition of ``V_N``: ``c_0 = sum_n int A_n^2`` and ``c_l = 2 sum_n int A_n A_{n+l}``.

    Gaps ``l <= gamma ln N`` go to ``D_low``, the rest to ``D_high``.  As a
    diagnostic, ``progression_sums[l][i] = sum_{k : k l + i < N} int A_{kl} A_{kl+i}``
    is reported for ``1 <= l <= progression_max``.
    """
    if N < 1:
        raise ValueError("N must be positive")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    orbit = pulled_orbit(A, word, N)
    gap = {}
    for l in range(N):
        s = 0
        for n in range(N - l):
            s = s + pairing(orbit[n], orbit[n + l])
        gap[l] = _as_real(s if l == 0 else 2 * s)
    cutoff = gamma * math.log(N)
    low = math.fsum(v for l, v in gap.items() if l <= cutoff)
    high = math.fsum(v for l, v in gap.items() if l > cutoff)
    S = birkhoff_polynomial(A, word, N)
    V = _as_real(pairing(S, S))
    prog = {}
    for l in range(1, min(progression_max, N) + 1):
        row = []
        for i in range(l):
            s = 0
            for k in range(0, (N - 1 - i) // l + 1):
                s = s + pairing(orbit[k * l], orbit[k * l + i])
            row.append(_as_real(s))
        prog[l] = row
    return VarianceReport(N, V, gamma, cutoff, gap, low, high, prog)


# -- asymptotic variance -------------------------------------------------------

@dataclass
class AsymptoticVariance:
    """Truncated series ``int B^2 + 2 sum_{1<=k<=K} c_k`` with a tail bound."""

    value: float
    tail_bound: float
    K: int
    stderr: float
    terms: list
    method: str
    converged: bool
    decay_rate: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _tail_from_terms(mags: np.ndarray, K: int, window: int):
    """Geometric bound on ``2 sum_{k>K} |c_k|`` from the last ``window`` terms.

    Returns ``(bound, rate)``; ``rate`` is ``None`` when no decay is visible.
    """
    ks = np.arange(1, K + 1)
    lo = max(1, K - window + 1)
    sel = (ks >= lo) & (mags > 0)
    if not np.any(mags[ks >= lo] > 0):
        return 0.0, math.inf
    if sel.sum() < 3:
        return None, None
    x, y = ks[sel], np.log(mags[sel])
    rate = -np.polyfit(x, y, 1)[0]
    if not rate > 0:
        return None, None
    # envelope prefactor: every fitted term lies under C e^{-rate k}
    C = float(np.max(mags[sel] * np.exp(rate * x)))
    bound = 2 * C * math.exp(-rate * (K + 1)) / (-math.expm1(-rate))
    return bound, float(rate)


def _deterministic_certificate(A, system):
    """Exact tail for a single hyperbolic toral automorphism: the set of ``k`` with nonzero terms."""
    if len(system) != 1:
        return None
    g = system.generators[0]
    if g.dim != 2 or not g.is_exact:
        return None
    (a, b), (c, d) = g.matrix
    tr, det = a + d, a * d - b * c
    if not ((det == 1 and abs(tr) > 2) or (det == -1 and tr != 0)):
        return None
    return g


def asymptotic_variance(
    A: TrigPolynomial,
    system: RandomSystem,
    *,
    tol: float = 1e-6,
    K_max: int = 200,
    mode: str = "auto",
    samples: int = 2000,
    seed: int = 0,
    budget: int = DEFAULT_LEAF_BUDGET,
    window: int = 8,
    threads: int = 1,
) -> AsymptoticVariance:
    """Green-Kubo series of annealed autocorrelations.

    ``A`` on ``T^d`` gives ``int A^2 + 2 sum_k E int A . A o F^k``; an observable
    on ``T^{2d}`` is treated as a two-point observable and uses the lifted
    system.  Terms are exact (Koopman iteration) while the budget allows;
    ``mode="auto"`` then continues by Monte Carlo over words, ``mode="exact"``
    stops there, and ``mode="mc"`` uses Monte Carlo throughout.  The tail bound
    is geometric with the decay rate fitted to the last ``window`` terms.
    Raises :class:`NoDecayError` when ``K_max`` terms show no decay.
    """
    if A.dim == 2 * system.dim:
        system = system.lifted()
    elif A.dim != system.dim:
        raise ValueError("observable dimension matches neither the system nor its two-point lift")
    if A.mean() != 0:
        raise ValueError("asymptotic variance needs a zero-mean observable")
    head = _as_real(pairing(A, A))

    g = _deterministic_certificate(A, system)
    if g is not None:
        hits = power_hits(g, A, A, 1, K_max)
        terms = [_as_real(hits.get(k, 0)) for k in range(1, K_max + 1)]
        last = max(hits, default=0)
        K = max(last, 1)
        value = head + 2 * math.fsum(terms[:K])
        return AsymptoticVariance(value, 0.0, K, 0.0, terms[:K], "exact-orbit", True, math.inf)

    terms, errs, method = [], [], "exact"
    powers = _KoopmanPowers(A, A, system, budget) if mode in ("auto", "exact") else None
    mc_chunk = None
    bound, rate = None, None
    for k in range(1, K_max + 1):
        value_k, err_k = None, 0.0
        if powers is not None:
            try:
                value_k = _as_real(powers.correlation(k))
            except BudgetExceeded:
                if mode == "exact":
                    break
                powers = None
        if value_k is None:
            method = "exact+mc" if terms else "mc"
            if mc_chunk is None or k > mc_chunk.N[-1]:
                # draw the remaining terms in blocks of ``window`` from a fresh stream
                Ns = list(range(k, min(K_max, k + window - 1) + 1))
                mc_chunk = annealed_series_mc(A, A, system, Ns, samples, seed, stream=k, threads=threads)
            i = mc_chunk.N.index(k)
            value_k, err_k = mc_chunk.values[i].real, float(mc_chunk.stderr[i])
        terms.append(value_k)
        errs.append(err_k)
        if k >= window:
            bound, rate = _tail_from_terms(np.abs(np.array(terms)), k, window)
            noise = 2 * math.sqrt(math.fsum(e * e for e in errs))
            if bound is not None and bound + noise < tol:
                break
    K = len(terms)
    value = head + 2 * math.fsum(terms)
    stderr = 2 * math.sqrt(math.fsum(e * e for e in errs))
    if bound is None:
        bound, rate = _tail_from_terms(np.abs(np.array(terms)), K, window) if K >= 3 else (None, None)
    mags = np.abs(np.array(terms))
    if bound is not None and bound + stderr >= tol and K >= 2 * window and \
            mags[-window:].max() >= mags[:window].max() > 0:
        # the fitted slope is noise when the late envelope is no smaller than the early one
        bound = None
    if bound is None:
        raise NoDecayError(f"no decay of annealed autocorrelations detected within K = {K} terms")
    return AsymptoticVariance(value, bound, K, stderr, terms, method, bound + stderr < tol, rate)


# -- sampling S_N on exact grid orbits ------------------------------------------

def birkhoff_samples(A: TrigPolynomial, word: Word, Ns, points: np.ndarray) -> dict:
    """``{N: S_N A(x) for x in points}`` along exact grid orbits (``points`` uint64)."""
    Ns = sorted(int(n) for n in Ns)
    if Ns and Ns[-1] > len(word):
        raise ValueError("word too short")
    if points.dtype != np.uint64:
        points = float_to_grid(points)
    stepper = GridStepper(word.system)
    real = A.is_real(tol=1e-12)
    ev = evaluate_grid_real if real else evaluate_grid
    S = np.zeros(points.shape[0], dtype=float if real else complex)
    out, x = {}, points
    wanted = set(Ns)
    if 0 in wanted:
        out[0] = S.copy()
    for n in range(Ns[-1] if Ns else 0):
        S += ev(A, x)
        if n + 1 in wanted:
            out[n + 1] = S.copy()
        x = stepper.step(x, word.indices[n])
    return out


def _sample_points(n, d, seed, stream, low_discrepancy=False):
    if low_discrepancy:
        sob = stats.qmc.Sobol(d, scramble=True, seed=stream_rng(seed, *stream))
        return float_to_grid(sob.random(n))
    return sample_grid_points(stream_rng(seed, *stream), n, d)


def characteristic_function(A: TrigPolynomial, word: Word, N: int, xi, samples: int, seed: int, *,
                            stream=(0,), low_discrepancy=False, _sums=None):
    """``(Phi, stderr)`` for ``Phi(xi) = int exp(i xi S_N A(x) / sqrt N) dx``; ``xi`` may be an array."""
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    if _sums is None:
        pts = _sample_points(samples, A.dim, seed, tuple(stream), low_discrepancy)
        _sums = birkhoff_samples(A, word, [N], pts)[N].real
    z = np.exp(1j * np.outer(xi_arr, _sums) / math.sqrt(N))
    phi, se = _mean_stderr(z.T)
    if np.ndim(xi) == 0:
        return complex(phi[0]), float(se[0])
    return phi, se


def ks_distance(samples: np.ndarray, variance: float) -> float:
    """KS distance to ``Normal(0, variance)``, or to the point mass at 0 when ``variance == 0``."""
    samples = np.asarray(samples, dtype=float)
    if variance <= 0:
        x = np.sort(samples)
        n = len(x)
        emp_below = np.searchsorted(x, 0.0, side="left") / n
        emp_at = np.searchsorted(x, 0.0, side="right") / n
        return float(max(emp_below, 1 - emp_at))
    return float(stats.kstest(samples, "norm", args=(0.0, math.sqrt(variance))).statistic)


def _sorted_ks(x_sorted, mu, sigma):
    n = len(x_sorted)
    cdf = stats.norm.cdf(x_sorted, mu, sigma)
    i = np.arange(1, n + 1)
    return max(float(np.max(i / n - cdf)), float(np.max(cdf - (i - 1) / n)))


def min_normal_ks(samples) -> tuple:
    """Smallest KS distance to any normal law, with the minimizing ``(mu, sigma)``."""
    x = np.sort(np.asarray(samples, dtype=float))
    mu0, s0 = float(np.mean(x)), float(np.std(x))
    if s0 == 0:
        raise ValueError("degenerate samples")

    def f(p):
        return _sorted_ks(x, p[0], math.exp(p[1]))

    best = None
    for scale in (1.0, 0.7, 0.4):
        res = optimize.minimize(f, [mu0, math.log(s0 * scale)], method="Nelder-Mead",
                                options={"xatol": 1e-4, "fatol": 1e-6})
        if best is None or res.fun < best.fun:
            best = res
    return float(best.fun), float(best.x[0]), float(math.exp(best.x[1]))


@dataclass
class CLTReport:
    """Per word and per ``N``: characteristic-function and KS distances to ``Normal(0, D)``."""

    D: float
    Ns: list
    xi_grid: list
    samples: int
    seed: int
    char_distance: list
    ks: list
    zero_variance: bool
    ks_threshold: float
    passes: list

    def to_dict(self) -> dict:
        return asdict(self)


def quenched_clt_report(
    A: TrigPolynomial,
    system: RandomSystem,
    word_seeds,
    Ns,
    xi_grid,
    samples: int,
    D: float,
    *,
    seed: int = 0,
    ks_threshold: float = 0.05,
    threads: int = 1,
) -> CLTReport:
    """CLT diagnostics of ``S_N A / sqrt N`` on a set of sampled words.

    ``word_seeds`` index the word streams; ``D`` is the asymptotic variance.
    Rows of ``char_distance`` and ``ks`` follow ``word_seeds``, columns ``Ns``.
    """
    Ns = [int(n) for n in Ns]
    xi = np.asarray(xi_grid, dtype=float)
    target = np.exp(-D * xi**2 / 2)

    def one(ws):
        word = sample_word(system, max(Ns), seed, (1, int(ws)))
        pts = _sample_points(samples, A.dim, seed, (2, int(ws)))
        sums = birkhoff_samples(A, word, Ns, pts)
        cd, ks = [], []
        for n in Ns:
            s = sums[n].real / math.sqrt(n)
            phi = np.exp(1j * np.outer(xi, s)).mean(axis=1)
            cd.append(float(np.max(np.abs(phi - target))))
            ks.append(ks_distance(s, D))
        return cd, ks

    rows = ordered_map(one, list(word_seeds), threads)
    cd = [r[0] for r in rows]
    ks = [r[1] for r in rows]
    passes = [[v < ks_threshold for v in r] for r in ks]
    return CLTReport(D, Ns, xi.tolist(), samples, seed, cd, ks, D <= 0, ks_threshold, passes)


def annealed_char_residual(B2: TrigPolynomial, system: RandomSystem, Ns, xi: float, samples: int, seed: int,
                           D: float, *, block: int = 4096, threads: int = 1) -> dict:
    """``E iint exp(i xi S_N B(x, y) / sqrt N) - exp(-D xi^2 / 2)`` by Monte Carlo over words and points.

    Each of ``samples`` draws uses its own word and its own grid point; draws are
    processed in fixed blocks with one random stream per block.
    """
    lifted = system.lifted() if B2.dim == 2 * system.dim else system
    if B2.dim != lifted.dim:
        raise ValueError("observable dimension mismatch")
    Ns = sorted(int(n) for n in Ns)
    n_max = Ns[-1]
    stepper = GridStepper(lifted)
    cdf = np.cumsum([float(p) for p in lifted.probabilities])
    cdf[-1] = 1.0

    def run_block(b):
        size = min(block, samples - b * block)
        rng = stream_rng(seed, 3, b)
        x = sample_grid_points(rng, size, lifted.dim)
        S = np.zeros(size)
        out = {}
        for n in range(n_max):
            S += evaluate_grid_real(B2, x)
            if n + 1 in Ns:
                out[n + 1] = np.exp(1j * xi * S / math.sqrt(n + 1))
            choices = np.minimum(np.searchsorted(cdf, rng.random(size), side="right"), len(cdf) - 1)
            x = stepper.step(x, choices)
        return out

    blocks = ordered_map(run_block, range(math.ceil(samples / block)), threads)
    target = math.exp(-D * xi * xi / 2)
    result = {}
    for n in Ns:
        z = np.concatenate([blk[n] for blk in blocks])
        mean, se = _mean_stderr(z[:, None])
        result[n] = (complex(mean[0]) - target, float(se[0]))
    return result


# -- local times and the (T, T^{-1}) example -------------------------------------

@dataclass
class LocalTimeProfile:
    """``counts[i]`` is the number of ``0 <= k < N`` with ``W_k = offset + i``."""

    N: int
    offset: int
    counts: np.ndarray
    path_min: int
    path_max: int

    def as_dict(self) -> dict:
        return {self.offset + i: int(c) for i, c in enumerate(self.counts) if c}

    def sites(self) -> np.ndarray:
        return self.offset + np.nonzero(self.counts)[0]

    def max_count(self) -> int:
        return int(self.counts.max(initial=0))


def local_time_profile(steps, N: int) -> LocalTimeProfile:
    """Visit counts of ``W_0 = 0, W_1, ..., W_{N-1}`` with ``W_k = steps[0] + ... + steps[k-1]``."""
    steps = np.asarray(steps, dtype=np.int64)
    if N < 1:
        raise ValueError("N must be positive")
    if N > len(steps) + 1:
        raise ValueError(f"{len(steps)} steps give at most {len(steps) + 1} walk positions")
    walk = np.concatenate([[0], np.cumsum(steps[: N - 1])])
    lo, hi = int(walk.min()), int(walk.max())
    counts = np.bincount(walk - lo, minlength=hi - lo + 1)
    return LocalTimeProfile(N, lo, counts, lo, hi)


def _power_table(g: AffineToralMap, A: TrigPolynomial, points: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """``table[x, m - lo] = A(g^m x)`` for ``lo <= m <= hi`` on exact grid orbits."""
    table = np.empty((points.shape[0], hi - lo + 1))
    x = map_on_grid(map_power(g, lo), points) if lo else points
    for j in range(hi - lo + 1):
        table[:, j] = evaluate_grid_real(A, x)
        x = map_on_grid(g, x)
    return table


@dataclass
class TTInverseReport:
    """Per word and per ``N``: exact ``V_N``, KS statistics and local-time concentration."""

    Ns: list
    V: np.ndarray
    max_local_time: np.ndarray
    ks_sqrtV: np.ndarray
    concentration: np.ndarray
    pooled_ks: dict
    pooled_critical: dict
    sqrtV_over_N34: np.ndarray
    max_abs_S: np.ndarray

    def summary(self) -> dict:
        return {
            "N": self.Ns,
            "ks_sqrtV_pass_fraction": [float(np.mean(self.ks_sqrtV[:, i] < 0.05)) for i in range(len(self.Ns))],
            "median_concentration": [float(np.median(self.concentration[:, i])) for i in range(len(self.Ns))],
            "pooled_min_normal_ks": {str(k): v for k, v in self.pooled_ks.items()},
            "pooled_critical": {str(k): v for k, v in self.pooled_critical.items()},
            "iqr_sqrtV_over_N34": [
                float(np.subtract(*np.percentile(self.sqrtV_over_N34[:, i], [75, 25]))) for i in range(len(self.Ns))
            ],
            "median_max_abs_S": [float(np.median(self.max_abs_S[:, i])) for i in range(len(self.Ns))],
        }


def tt_inverse_statistics(
    g: AffineToralMap,
    A: TrigPolynomial,
    step_paths,
    Ns,
    x_samples: int,
    seed: int,
    *,
    pooled_N=None,
    alpha: float = 0.05,
) -> TTInverseReport:
    """Statistics of ``S_N A(x) = sum_n l(n, N) A(g^n x)`` over an ensemble of step paths.

    The exact variance is ``V_N = sum_{n,m} l_n l_m int A(g^n x) A(g^m x) dx``.
    One table of ``A(g^m x)`` on shared grid points serves every path.
    ``pooled_N`` lists the ``N`` at which the pooled ``S_N / N^{3/4}`` is tested
    against every normal law.
    """
    Ns = sorted(int(n) for n in Ns)
    paths = [np.asarray(p, dtype=np.int64) for p in step_paths]
    profiles = [[local_time_profile(p, n) for n in Ns] for p in paths]
    lo = min(pr.path_min for row in profiles for pr in row)
    hi = max(pr.path_max for row in profiles for pr in row)
    span = hi - lo
    corr = power_hits(g, A, A, -span, span)
    corr_vec = np.zeros(2 * span + 1)
    for m, v in corr.items():
        corr_vec[m + span] = complex(v).real
    nz = np.nonzero(corr_vec)[0] - span

    points = sample_grid_points(stream_rng(seed, 4), x_samples, g.dim)
    table = _power_table(g, A, points, lo, hi)

    W, J = len(paths), len(Ns)
    V = np.zeros((W, J))
    max_l = np.zeros((W, J))
    ks = np.zeros((W, J))
    conc = np.zeros((W, J))
    ratio = np.zeros((W, J))
    max_abs = np.zeros((W, J))
    pooled_N = set(Ns[-1:] if pooled_N is None else pooled_N)
    pooled = {n: [] for n in pooled_N}
    for w, row in enumerate(profiles):
        for j, pr in enumerate(row):
            l = np.zeros(span + 1)
            l[pr.offset - lo: pr.offset - lo + len(pr.counts)] = pr.counts
            v = 0.0
            for m in nz:
                if m >= 0:
                    v += corr_vec[m + span] * float(np.dot(l[m:], l[: len(l) - m]))
                else:
                    v += corr_vec[m + span] * float(np.dot(l[: len(l) + m], l[-m:]))
            S = table @ l
            V[w, j] = v
            max_l[w, j] = pr.max_count()
            conc[w, j] = pr.max_count() ** 2 / v if v > 0 else math.inf
            ks[w, j] = ks_distance(S / math.sqrt(v), 1.0) if v > 0 else 1.0
            ratio[w, j] = math.sqrt(v) / pr.N**0.75
            max_abs[w, j] = float(np.max(np.abs(S)))
            if pr.N in pooled:
                pooled[pr.N].append(S / pr.N**0.75)
    pooled_ks, crit = {}, {}
    for n, chunks in pooled.items():
        allS = np.concatenate(chunks)
        pooled_ks[n] = min_normal_ks(allS)[0]
        crit[n] = float(stats.kstwo.ppf(1 - alpha, len(allS)))
    return TTInverseReport(Ns, V, max_l, ks, conc, pooled_ks, crit, ratio, max_abs)
