"""Quenched and annealed correlations of trigonometric polynomials.

Quenched values ``int A(F^n x) B(F^{n+k} x) dx`` are exact pairings of pulled
back polynomials.  Annealed values ``E int A . B o F^N`` are computed exactly
with the averaged Koopman operator ``P B = sum_j p_j B o f_j`` (so that
``E B o F^N = P^N B``), by literal word enumeration, by Monte Carlo over words,
or, for powers of one fixed map driven by a random walk, through the law of
the walk.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal, special

from .dynamics import (
    AffineToralMap,
    RandomSystem,
    Word,
    compose,
    identity_map,
    iter_compositions,
    sample_word,
    word_composition,
)
from .errors import BudgetExceeded, TruncationError
from .observables import TrigPolynomial, eigenvalue, pairing, pullback
from .parallel import ordered_map
from .streams import stream_rng

__all__ = [
    "CorrelationSeries",
    "StepLaw",
    "WalkDistribution",
    "ScanResult",
    "DEFAULT_LEAF_BUDGET",
    "quenched_correlation",
    "quenched_series",
    "koopman_step",
    "adjoint_koopman_step",
    "annealed_correlation_exact",
    "annealed_series_exact",
    "annealed_correlation_mc",
    "annealed_series_mc",
    "annealed_two_point",
    "walk_distribution",
    "walk_distributions",
    "default_truncation",
    "map_power",
    "power_hits",
    "commuting_annealed_correlation",
    "commuting_annealed_series",
    "commuting_quenched_series",
    "character_box",
    "box_hit_weights",
    "commuting_mixing_constant",
    "basis_correlation_scan",
    "sample_steps",
]

DEFAULT_LEAF_BUDGET = 2_000_000


# -- containers ----------------------------------------------------------------

@dataclass
class CorrelationSeries:
    """Correlation values indexed by an increasing list of times ``N``."""

    N: list
    values: list
    mode: str
    stderr: list | None = None
    metadata: dict = field(default_factory=dict)

    MODES = ("quenched", "annealed-exact", "annealed-mc", "annealed-walk")

    def __post_init__(self):
        if self.mode not in self.MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if len(self.N) != len(self.values):
            raise ValueError("N and values differ in length")
        if any(b <= a for a, b in zip(self.N, self.N[1:])):
            raise ValueError("N must be strictly increasing")
        if (self.mode == "annealed-mc") != (self.stderr is not None):
            raise ValueError("stderr is required exactly in Monte Carlo mode")
        if self.stderr is not None and len(self.stderr) != len(self.N):
            raise ValueError("stderr length mismatch")
        self.values = [complex(v) for v in self.values]

    def magnitudes(self) -> np.ndarray:
        return np.abs(np.asarray(self.values, dtype=complex))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "re", "im", "stderr"])
        for i, (n, v) in enumerate(zip(self.N, self.values)):
            se = "" if self.stderr is None else repr(float(self.stderr[i]))
            w.writerow([n, repr(v.real), repr(v.imag), se])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "N": [int(n) for n in self.N],
            "re": [v.real for v in self.values],
            "im": [v.imag for v in self.values],
            "stderr": None if self.stderr is None else [float(s) for s in self.stderr],
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "CorrelationSeries":
        vals = [complex(a, b) for a, b in zip(data["re"], data["im"])]
        return cls(data["N"], vals, data["mode"], data.get("stderr"), data.get("metadata", {}))


# -- quenched ------------------------------------------------------------------

def quenched_correlation(A: TrigPolynomial, B: TrigPolynomial, word: Word, n: int, k: int):
    """``int A(F^n x) B(F^{n+k} x) dx`` for the fixed word."""
    if n < 0 or k < 0:
        raise ValueError("n and k must be nonnegative")
    if n + k > len(word):
        raise ValueError(f"word of length {len(word)} is too short for n + k = {n + k}")
    Fn = word_composition(word, n)
    Fnk = word_composition(word, n + k)
    return pairing(pullback(A, Fn), pullback(B, Fnk))


def quenched_series(A: TrigPolynomial, B: TrigPolynomial, word: Word, Ns) -> list:
    """``[int A . B o F^N dx for N in Ns]`` with one pass over the word."""
    Ns = sorted(int(n) for n in Ns)
    if Ns and Ns[-1] > len(word):
        raise ValueError("word too short")
    wanted = set(Ns)
    out = {}
    if Ns:
        for n, F in enumerate(iter_compositions(word, Ns[-1])):
            if n in wanted:
                out[n] = pairing(A, pullback(B, F))
    return [out[n] for n in Ns]


# -- annealed: exact -----------------------------------------------------------

def _weighted_sum(polys_and_weights, dim):
    acc = {}
    for poly, w in polys_and_weights:
        for k, c in poly.items():
            c = c * w
            acc[k] = acc[k] + c if k in acc else c
    return TrigPolynomial(dim, acc)


def koopman_step(B: TrigPolynomial, system: RandomSystem) -> TrigPolynomial:
    """``P B = sum_j p_j B o f_j`` (frequencies merged)."""
    return _weighted_sum(
        ((pullback(B, f), p) for f, p in zip(system.generators, system.probabilities) if p), B.dim
    )


def adjoint_koopman_step(A: TrigPolynomial, system: RandomSystem, inverses=None) -> TrigPolynomial:
    """``P* A = sum_j p_j A o f_j^{-1}``, so that ``int (P* A) B = int A (P B)``."""
    inverses = inverses or [g.inverse() for g in system.generators]
    return _weighted_sum(
        ((pullback(A, f), p) for f, p in zip(inverses, system.probabilities) if p), A.dim
    )


def _check_dims(A, B, system):
    if A.dim != system.dim or B.dim != system.dim:
        raise ValueError(f"observable dimension does not match system dimension {system.dim}")


def _enumerate_words(A, B, system, N, budget):
    leaves = len(system) ** N
    if leaves > budget:
        raise BudgetExceeded(
            f"{leaves} words exceed the budget of {budget}",
            stage="annealed word enumeration",
            suggestion="use method='koopman' or Monte Carlo",
        )
    total = 0
    gens, probs = system.generators, system.probabilities
    for idx in itertools.product(range(len(system)), repeat=N):
        w = 1
        for i in idx:
            w = w * probs[i]
        if not w:
            continue
        F = identity_map(system.dim)
        for i in idx:
            F = compose(gens[i], F)
        total = total + w * pairing(A, pullback(B, F))
    return total


class _KoopmanPowers:
    """Lazily computed ``P^m B`` and ``(P*)^m A`` with a support budget."""

    def __init__(self, A, B, system, budget):
        self.system = system
        self.budget = budget
        self.inverses = [g.inverse() for g in system.generators]
        self.fwd = [B]
        self.adj = [A]

    def _grow(self, seq, m, step):
        while len(seq) <= m:
            nxt = step(seq[-1])
            if len(nxt) > self.budget:
                raise BudgetExceeded(
                    f"merged support {len(nxt)} exceeds the budget of {self.budget}",
                    stage="annealed Koopman iteration",
                    suggestion="use Monte Carlo over words",
                )
            seq.append(nxt)
        return seq[m]

    def forward(self, m):
        return self._grow(self.fwd, m, lambda b: koopman_step(b, self.system))

    def adjoint(self, m):
        return self._grow(self.adj, m, lambda a: adjoint_koopman_step(a, self.system, self.inverses))

    def correlation(self, N):
        half = N // 2
        return pairing(self.adjoint(half), self.forward(N - half))


def annealed_correlation_exact(
    A: TrigPolynomial,
    B: TrigPolynomial,
    system: RandomSystem,
    N: int,
    *,
    budget: int = DEFAULT_LEAF_BUDGET,
    method: str = "koopman",
):
    """Exact ``E int A . (B o F^N) dx``.

    ``method="koopman"`` iterates the averaged operator from both ends and merges
    equal frequencies, so ``budget`` bounds the merged support size.
    ``method="tree"`` enumerates all ``len(system)**N`` words and bounds that
    count instead.  Raises :class:`BudgetExceeded` past the budget.
    """
    _check_dims(A, B, system)
    if N < 0:
        raise ValueError("N must be nonnegative")
    if method == "tree":
        return _enumerate_words(A, B, system, N, budget)
    if method != "koopman":
        raise ValueError(f"unknown method {method!r}")
    return _KoopmanPowers(A, B, system, budget).correlation(N)


def annealed_series_exact(A, B, system, Ns, *, budget: int = DEFAULT_LEAF_BUDGET) -> CorrelationSeries:
    _check_dims(A, B, system)
    powers = _KoopmanPowers(A, B, system, budget)
    Ns = [int(n) for n in Ns]
    return CorrelationSeries(Ns, [complex(powers.correlation(n)) for n in Ns], "annealed-exact")


# -- annealed: Monte Carlo -----------------------------------------------------

def _mean_stderr(values: np.ndarray):
    """Column means and standard errors of a ``(samples, len(N))`` complex array."""
    n = values.shape[0]
    mean = values.mean(axis=0)
    if n < 2:
        return mean, np.full(mean.shape, np.inf)
    dev = values - mean
    var = (np.abs(dev) ** 2).sum(axis=0) / (n - 1)
    return mean, np.sqrt(var / n)


def annealed_series_mc(
    A, B, system: RandomSystem, Ns, samples: int, seed: int, *, stream=0, threads: int = 1
) -> CorrelationSeries:
    """Monte Carlo over IID words; word ``i`` uses the random stream ``(stream, i)``."""
    _check_dims(A, B, system)
    if samples < 2:
        raise ValueError("need at least 2 samples")
    Ns = [int(n) for n in Ns]
    n_max = max(Ns) if Ns else 0

    def one(i):
        word = sample_word(system, n_max, seed, (stream, i))
        return [complex(v) for v in quenched_series(A, B, word, Ns)]

    values = np.array(ordered_map(one, range(samples), threads), dtype=complex).reshape(samples, len(Ns))
    mean, se = _mean_stderr(values)
    return CorrelationSeries(
        Ns, list(mean), "annealed-mc", list(se), {"samples": samples, "seed": seed, "stream": stream}
    )


def annealed_correlation_mc(A, B, system, N, samples, seed, *, stream=0, threads=1):
    """``(estimate, stderr)`` of ``E int A . B o F^N`` from ``samples`` IID words."""
    s = annealed_series_mc(A, B, system, [N], samples, seed, stream=stream, threads=threads)
    return s.values[0], s.stderr[0]


def annealed_two_point(A2, B2, system: RandomSystem, N, *, mode="exact", samples=None, seed=0,
                       budget=DEFAULT_LEAF_BUDGET, threads=1, stream=0):
    """Annealed correlation for the two-point motion (every letter diagonally lifted)."""
    lifted = system.lifted()
    if mode == "exact":
        return annealed_correlation_exact(A2, B2, lifted, N, budget=budget)
    if mode == "mc":
        return annealed_correlation_mc(A2, B2, lifted, N, samples, seed, stream=stream, threads=threads)
    raise ValueError(f"unknown mode {mode!r}")


# -- random walks --------------------------------------------------------------

class StepLaw:
    """Finitely supported law of an integer step."""

    def __init__(self, support, probabilities):
        support = np.asarray(support, dtype=np.int64)
        probs = np.asarray(probabilities, dtype=float)
        if support.size == 0:
            raise ValueError("support must be nonempty")
        if support.shape != probs.shape:
            raise ValueError("support and probabilities differ in length")
        if np.any(probs < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities must sum to 1 (got {probs.sum():.15g})")
        order = np.argsort(support)
        self.support = support[order]
        self.probabilities = probs[order]
        if np.any(np.diff(self.support) == 0):
            raise ValueError("support has repeated values")

    @classmethod
    def symmetric_simple(cls) -> "StepLaw":
        return cls([-1, 1], [0.5, 0.5])

    @classmethod
    def heavy_negative_tail(cls, scale: float = 0.001, cutoff: int = 100_000) -> "StepLaw":
        """``P(-k) = scale / k^3`` for ``1 <= k <= cutoff``, ``P(1) = P(2) = (1 - scale zeta(3)) / 2``.

        The negative tail is cut at ``cutoff`` and the law renormalized.
        """
        k = np.arange(1, cutoff + 1, dtype=float)
        neg = scale / k**3
        pos = (1.0 - scale * float(special.zeta(3.0))) / 2.0
        support = np.concatenate([-np.arange(cutoff, 0, -1), [1, 2]])
        probs = np.concatenate([neg[::-1], [pos, pos]])
        return cls(support, probs / probs.sum())

    @property
    def min_step(self) -> int:
        return int(self.support[0])

    @property
    def max_step(self) -> int:
        return int(self.support[-1])

    def mean(self) -> float:
        return float(np.dot(self.support, self.probabilities))

    def variance(self) -> float:
        s = self.support.astype(float)
        return float(np.dot(s * s, self.probabilities) - self.mean() ** 2)

    def dense(self):
        """``(offset, probs)`` with ``probs[i] = P(step = offset + i)``."""
        arr = np.zeros(self.max_step - self.min_step + 1)
        arr[self.support - self.min_step] = self.probabilities
        return self.min_step, arr

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        cdf = np.cumsum(self.probabilities)
        cdf[-1] = 1.0
        idx = np.searchsorted(cdf, rng.random(n), side="right")
        return self.support[np.minimum(idx, len(cdf) - 1)]

    def as_system(self, g: AffineToralMap) -> RandomSystem:
        """The random system with generators ``g**s`` for ``s`` in the support."""
        return RandomSystem([map_power(g, int(s)) for s in self.support], list(self.probabilities))

    def to_dict(self) -> dict:
        return {"support": self.support.tolist(), "prob": self.probabilities.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "StepLaw":
        return cls(data["support"], data["prob"])


@dataclass
class WalkDistribution:
    """Law of ``W_N`` on the window ``[offset, offset + len(probs) - 1]``."""

    N: int
    offset: int
    probs: np.ndarray
    loss: float

    def prob(self, m: int) -> float:
        i = m - self.offset
        return float(self.probs[i]) if 0 <= i < len(self.probs) else 0.0

    @property
    def lo(self) -> int:
        return self.offset

    @property
    def hi(self) -> int:
        return self.offset + len(self.probs) - 1

    def as_dict(self) -> dict:
        return {self.offset + int(i): float(p) for i, p in enumerate(self.probs) if p > 0}


def default_truncation(law: StepLaw, N: int) -> int:
    bound = max(abs(law.min_step), abs(law.max_step))
    return int(max(math.ceil(8 * math.sqrt(N * law.variance())), min(bound * N, 100_000)))


def _convolve(p1, o1, p2, o2, lo, hi):
    out = signal.convolve(p1, p2)
    np.maximum(out, 0.0, out=out)
    off = o1 + o2
    a, b = max(lo, off), min(hi, off + len(out) - 1)
    return out[a - off: b - off + 1], a


class _WalkPowers:
    """Distributions of sums of ``n`` IID steps, clipped to ``[-T, T]``."""

    def __init__(self, law: StepLaw, T: int):
        self.law, self.T = law, T
        off, arr = law.dense()
        lo, hi = max(-T, off), min(T, off + len(arr) - 1)
        self.cache = {1: (arr[lo - off: hi - off + 1], lo)}

    def window(self, n):
        return max(-self.T, n * self.law.min_step), min(self.T, n * self.law.max_step)

    def combine(self, a, b, n):
        lo, hi = self.window(n)
        return _convolve(a[0], a[1], b[0], b[1], lo, hi)

    def power(self, n):
        if n in self.cache:
            return self.cache[n]
        half = self.power(n // 2)
        res = self.combine(half, half, 2 * (n // 2))
        if n % 2:
            res = self.combine(res, self.cache[1], n)
        self.cache[n] = res
        return res


def walk_distributions(law: StepLaw, Ns, truncation: int | None = None, *,
                       max_loss: float = 1e-9, on_loss: str = "raise") -> list:
    """Laws of ``W_N = step_0 + ... + step_{N-1}`` for every ``N`` in ``Ns``.

    Supports are clipped to ``[-T, T]`` with ``T = truncation`` (default
    :func:`default_truncation` at the largest ``N``).  The clipped mass is
    reported as ``loss``; past ``max_loss`` a :class:`TruncationError` is raised
    unless ``on_loss="warn"``.
    """
    Ns = [int(n) for n in Ns]
    if any(n < 0 for n in Ns):
        raise ValueError("N must be nonnegative")
    T = truncation if truncation is not None else default_truncation(law, max(Ns, default=0))
    powers = _WalkPowers(law, T)
    out, prev_n, prev = [], 0, (np.ones(1), 0)
    for n in sorted(set(Ns)):
        if n > prev_n:
            prev = powers.power(n - prev_n) if prev_n == 0 else powers.combine(prev, powers.power(n - prev_n), n)
        prev_n = n
        probs, off = prev
        loss = max(0.0, 1.0 - float(probs.sum()))
        if loss > max_loss and on_loss == "raise":
            raise TruncationError(f"walk truncation at T={T} lost {loss:.3g} mass at N={n}")
        out.append(WalkDistribution(n, off, probs, loss))
    by_n = {w.N: w for w in out}
    return [by_n[n] for n in Ns]


def walk_distribution(law: StepLaw, N: int, truncation: int | None = None, **kw) -> WalkDistribution:
    return walk_distributions(law, [N], truncation, **kw)[0]


# -- powers of one map ---------------------------------------------------------

def map_power(g: AffineToralMap, m: int) -> AffineToralMap:
    """``g**m`` by binary powering (negative ``m`` uses the inverse)."""
    if m < 0:
        g, m = g.inverse(), -m
    result, base = identity_map(g.dim), g
    while m:
        if m & 1:
            result = compose(base, result)
        m >>= 1
        if m:
            base = compose(base, base)
    return result


def _is_hyperbolic_2d(g: AffineToralMap) -> bool:
    if g.dim != 2:
        return False
    (a, b), (c, d) = g.matrix
    tr, det = a + d, a * d - b * c
    return (det == 1 and abs(tr) > 2) or (det == -1 and tr != 0)


def _hits_one_direction(mt, j, targets, bound, limit, hyperbolic):
    """Exponents ``m = 0..limit`` with ``(mt)^m j`` in ``targets``."""
    hits = []
    v = j
    last = [None, None]
    for m in range(limit + 1):
        if v in targets:
            hits.append(m)
        if m > 0 and v == j:
            period = m
            return sorted({h + t * period for h in hits for t in range((limit - h) // period + 1)})
        if hyperbolic:
            n2 = sum(x * x for x in v)
            par = m % 2
            if last[par] is not None and n2 > bound and n2 > last[par] and all(
                x is not None and x > bound for x in last
            ):
                # each parity subsequence of |v_m|^2 is convex, so it only grows from here
                return hits
            last[par] = n2
        v = tuple(sum(r[i] * v[i] for i in range(len(v))) for r in mt)
    return hits


def power_hits(g: AffineToralMap, A: TrigPolynomial, B: TrigPolynomial, lo: int, hi: int) -> dict:
    """``{m: int A . B o g^m}`` for the ``m`` in ``[lo, hi]`` where the integral is nonzero."""
    if not g.is_exact:
        raise ValueError("power_hits needs an exact map")
    targets = {tuple(-v for v in k) for k in A.support()}
    bound = max((sum(v * v for v in k) for k in targets), default=0)
    hyper = _is_hyperbolic_2d(g)
    mt = [list(r) for r in zip(*g.matrix)]
    inv = g.inverse()
    mt_inv = [list(r) for r in zip(*inv.matrix)]
    ms = set()
    for j in B.support():
        if hi >= 0:
            ms.update(m for m in _hits_one_direction(mt, j, targets, bound, hi, hyper) if m >= lo)
        if lo < 0:
            ms.update(-m for m in _hits_one_direction(mt_inv, j, targets, bound, -lo, hyper) if -m <= hi)
    out = {}
    for m in sorted(ms):
        val = pairing(A, pullback(B, map_power(g, m)))
        if val != 0:
            out[m] = val
    return out


def commuting_annealed_series(g, law: StepLaw, A, B, Ns, *, truncation=None, on_loss="raise") -> CorrelationSeries:
    """``E int A . B o g^{W_N} = sum_m P(W_N = m) int A . B o g^m`` for each ``N``."""
    dists = walk_distributions(law, Ns, truncation, on_loss=on_loss)
    lo, hi = min(d.lo for d in dists), max(d.hi for d in dists)
    hits = power_hits(g, A, B, lo, hi)
    values = [sum((d.prob(m) * complex(v) for m, v in hits.items()), 0j) for d in dists]
    meta = {"truncation_loss": [d.loss for d in dists], "hit_exponents": sorted(hits)}
    return CorrelationSeries([int(n) for n in Ns], values, "annealed-walk", None, meta)


def commuting_annealed_correlation(g, law, A, B, N, **kw) -> complex:
    if N == 0:
        return pairing(A, B)
    return commuting_annealed_series(g, law, A, B, [N], **kw).values[0]


def commuting_quenched_series(g, steps, A, B, Ns) -> list:
    """``int A . B o g^{W_N}`` along one step path, ``W_N = steps[0] + ... + steps[N-1]``."""
    walk = np.concatenate([[0], np.cumsum(np.asarray(steps, dtype=np.int64))])
    Ns = [int(n) for n in Ns]
    if Ns and max(Ns) >= len(walk):
        raise ValueError("step path too short")
    pos = walk[Ns] if Ns else walk[:0]
    hits = power_hits(g, A, B, int(pos.min(initial=0)), int(pos.max(initial=0)))
    return [hits.get(int(m), 0) for m in pos]


def character_box(dim: int, radius: int) -> list:
    """Nonzero frequencies with sup norm at most ``radius``, in lexicographic order."""
    return [k for k in itertools.product(range(-radius, radius + 1), repeat=dim) if any(k)]


def box_hit_weights(g, box, lo: int, hi: int, s: float = 1.0) -> dict:
    """``{m: max |int e_i . e_j o g^m| / (lambda_i lambda_j)**s}`` over pairs from the box, for ``m`` in ``[lo, hi]``."""
    out = {}
    for ki in box:
        A = TrigPolynomial.character(ki)
        for kj in box:
            for m, v in power_hits(g, A, TrigPolynomial.character(kj), lo, hi).items():
                w = abs(complex(v)) / (eigenvalue(ki) * eigenvalue(kj)) ** s
                out[m] = max(out.get(m, 0.0), w)
    return out


def commuting_mixing_constant(steps, weights: dict, alpha: float) -> float:
    """Smallest ``C`` with ``|int e_i . e_j o g^{W_N}| <= C exp(-alpha N) |e_i|_s |e_j|_s`` for all ``N``.

    ``W_N`` is the walk of ``steps`` and ``weights`` comes from :func:`box_hit_weights`
    over a range containing the walk.
    """
    walk = np.concatenate([[0], np.cumsum(np.asarray(steps, dtype=np.int64))])
    best = 0.0
    for m, w in weights.items():
        at = np.nonzero(walk == m)[0]
        if at.size:
            best = max(best, w * math.exp(alpha * int(at[-1])))
    return best


# -- basis correlation scan ----------------------------------------------------

@dataclass
class ScanResult:
    """Exact ``rho[i, j, n, k] = int phi_i(F^n x) phi_j(F^{n+k} x) dx`` over a box."""

    table: dict
    min_D: float | None
    violations: list
    params: dict

    def max_abs(self) -> float:
        return max((abs(complex(v)) for v in self.table.values()), default=0.0)


def basis_correlation_scan(word: Word, freqs, n_values, k_values, *, beta=None, t=0.0, p=0.0, D=None) -> ScanResult:
    """Scan basis correlations of the characters ``e_{k_i}`` along a word.

    With ``beta`` given, also reports the smallest ``D`` such that
    ``|rho| <= D n lambda_i^{p+t} lambda_j^{p+t} e^{-beta k}`` holds on the whole
    box (``n >= 1``) and, for the supplied ``D``, the entries that violate it.
    """
    freqs = [tuple(f) for f in freqs]
    if any(not any(f) for f in freqs):
        raise ValueError("basis frequencies must be nonzero")
    n_values, k_values = sorted(n_values), sorted(k_values)
    n_need = max(n_values) + max(k_values)
    if n_need > len(word):
        raise ValueError(f"word of length {len(word)} too short for {n_need}")
    comps = list(iter_compositions(word, n_need))
    chars = [TrigPolynomial.character(f) for f in freqs]
    pulled = {}

    def pulled_char(i, n):
        if (i, n) not in pulled:
            pulled[(i, n)] = pullback(chars[i], comps[n])
        return pulled[(i, n)]

    table = {}
    for n in n_values:
        for k in k_values:
            for i in range(len(freqs)):
                for j in range(len(freqs)):
                    table[(i, j, n, k)] = pairing(pulled_char(i, n), pulled_char(j, n + k))
    min_D, violations = None, []
    if beta is not None:
        lam = [eigenvalue(f) for f in freqs]

        def schedule(i, j, n, k):
            return n * (lam[i] * lam[j]) ** (p + t) * math.exp(-beta * k)

        ratios = {
            key: abs(complex(v)) / schedule(*key) for key, v in table.items() if key[2] >= 1
        }
        min_D = max(ratios.values(), default=0.0)
        if D is not None:
            violations = sorted(key for key, r in ratios.items() if r > D)
    return ScanResult(table, min_D, violations, {"beta": beta, "t": t, "p": p, "D": D})


def sample_steps(law: StepLaw, N: int, seed: int, stream=0) -> np.ndarray:
    streams = stream if isinstance(stream, tuple) else (stream,)
    return law.sample(N, stream_rng(seed, *streams))

