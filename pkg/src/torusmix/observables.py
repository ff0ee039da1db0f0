"""Trigonometric polynomials on the flat torus and their spectral calculus.

A :class:`TrigPolynomial` is a finite sum ``sum_k a_k e_k`` of characters
``e_k(x) = exp(2 pi i <k, x>)``.  The characters are the Laplacian eigenfunctions
of ``T^d`` with ``Delta e_k = lambda_k^2 e_k``, ``lambda_k = 2 pi |k|``, and the
Sobolev norm used throughout is ``||A||_s^2 = sum_{k != 0} |a_k|^2 lambda_k^{2s}``.

Coefficients may be ``int``/``Fraction``/:class:`~torusmix.cyclotomic.Cyclotomic`
(exact) or ``complex`` (float).  Frequencies are Python ints and never overflow.
"""

from __future__ import annotations

import cmath
import csv
import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Mapping

import numpy as np

from .cyclotomic import Cyclotomic, root_of_unity
from .dynamics import GRID_BITS, AffineToralMap, float_to_grid

__all__ = [
    "TrigPolynomial",
    "NetBoundQuery",
    "eigenvalue",
    "pairing",
    "pullback",
    "evaluate",
    "evaluate_grid",
    "evaluate_grid_real",
    "sobolev_norm",
    "l2_norm",
    "smooth_split",
    "tensor",
    "difference_lift",
    "first_coordinate_lift",
    "weyl_count",
    "spectral_partial_sum",
    "epsilon_net_log_bound",
]

PRUNE_TOL = 1e-15
TWO_PI = 2.0 * math.pi


def _negligible(c) -> bool:
    if isinstance(c, (float, complex)):
        return abs(c) < PRUNE_TOL
    return c == 0


def _canon(c):
    if isinstance(c, float):
        return complex(c)
    if isinstance(c, (np.floating, np.complexfloating)):
        return complex(c)
    if isinstance(c, np.integer):
        return int(c)
    return c


def _conj(c):
    return c.conjugate()


def _abs2(c) -> float:
    if isinstance(c, Rational):
        return float(c * c)
    if isinstance(c, Cyclotomic):
        return float(abs(complex(c)) ** 2)
    return abs(c) ** 2


def _same(a, b, tol=0.0) -> bool:
    if tol == 0.0:
        return a == b
    return abs(complex(a) - complex(b)) <= tol


class TrigPolynomial:
    """Finite Fourier series on ``T^dim``.

    The stored coefficients never contain an exact zero (nor, for float
    coefficients, anything smaller than ``1e-15`` in modulus).  ``real=True``
    checks ``a_{-k} = conj(a_k)``; ``zero_mean=True`` checks ``a_0 = 0``.
    """

    __slots__ = ("dim", "_terms")

    def __init__(self, dim: int, terms: Mapping | None = None, *, real=False, zero_mean=False):
        if dim < 1:
            raise ValueError("dimension must be positive")
        self.dim = int(dim)
        clean = {}
        for k, c in (terms or {}).items():
            k = tuple(int(v) for v in k)
            if len(k) != self.dim:
                raise ValueError(f"frequency {k} does not have dimension {self.dim}")
            c = _canon(c)
            if not _negligible(c):
                clean[k] = c
        self._terms = clean
        if zero_mean and self.mean() != 0:
            raise ValueError("zero-mean polynomial has a nonzero constant mode")
        if real and not self.is_real(tol=1e-12):
            raise ValueError("real polynomial violates a_{-k} = conj(a_k)")

    # -- constructors --------------------------------------------------------
    @classmethod
    def zero(cls, dim: int) -> "TrigPolynomial":
        return cls(dim)

    @classmethod
    def constant(cls, dim: int, c=1) -> "TrigPolynomial":
        return cls(dim, {(0,) * dim: c})

    @classmethod
    def character(cls, k, coeff=1) -> "TrigPolynomial":
        k = tuple(k)
        return cls(len(k), {k: coeff})

    @classmethod
    def cosine(cls, k, amplitude=1) -> "TrigPolynomial":
        """``amplitude * (e_k + e_{-k}) = 2 amplitude cos(2 pi <k, x>)``."""
        k = tuple(k)
        if not any(k):
            raise ValueError("cosine needs a nonzero frequency")
        neg = tuple(-v for v in k)
        return cls(len(k), {k: amplitude, neg: amplitude})

    @classmethod
    def random_real(cls, dim: int, n_modes: int, max_freq: int, rng: np.random.Generator, *, decay=0.0):
        """Random real zero-mean polynomial with ``n_modes`` conjugate pairs.

        Frequencies are drawn from the box ``|k_i| <= max_freq``; coefficient
        moduli are scaled by ``|k|^{-decay}``.
        """
        terms = {}
        box = [k for k in itertools.product(range(-max_freq, max_freq + 1), repeat=dim) if k > (0,) * dim]
        if n_modes > len(box):
            raise ValueError("not enough frequencies in the box")
        chosen = rng.choice(len(box), size=n_modes, replace=False)
        for i in chosen:
            k = box[i]
            c = complex(rng.normal(), rng.normal()) * math.hypot(*k) ** (-decay)
            terms[k] = c
            terms[tuple(-v for v in k)] = c.conjugate()
        return cls(dim, terms)

    # -- container protocol --------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def support(self):
        return list(self._terms)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def coeff(self, k):
        return self._terms.get(tuple(k), 0)

    def mean(self):
        return self.coeff((0,) * self.dim)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_exact(self) -> bool:
        return all(not isinstance(c, complex) for c in self._terms.values())

    def max_frequency_norm2(self) -> int:
        return max((sum(v * v for v in k) for k in self._terms), default=0)

    def is_real(self, tol=0.0) -> bool:
        for k, c in self._terms.items():
            other = self._terms.get(tuple(-v for v in k), 0)
            if not _same(other, _conj(c), tol):
                return False
        return True

    # -- arithmetic ----------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, TrigPolynomial):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return other

    def __add__(self, other):
        if isinstance(other, (int, float, complex, Rational)):
            other = TrigPolynomial.constant(self.dim, other)
        if self._check(other) is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out[k] + c if k in out else c
        return TrigPolynomial(self.dim, out)

    __radd__ = __add__

    def __neg__(self):
        return TrigPolynomial(self.dim, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if isinstance(scalar, TrigPolynomial):
            return product(self, scalar)
        return TrigPolynomial(self.dim, {k: c * scalar for k, c in self._terms.items()})

    def __rmul__(self, scalar):
        return self * scalar

    def __truediv__(self, scalar):
        if isinstance(scalar, Rational):
            return self * (Fraction(1) / Fraction(scalar))
        return self * (1.0 / scalar)

    def conj(self) -> "TrigPolynomial":
        return TrigPolynomial(self.dim, {tuple(-v for v in k): _conj(c) for k, c in self._terms.items()})

    def __eq__(self, other):
        if not isinstance(other, TrigPolynomial):
            return NotImplemented
        return self.dim == other.dim and self._terms == other._terms

    def __hash__(self):
        return hash((self.dim, frozenset(self._terms)))

    def allclose(self, other: "TrigPolynomial", tol=1e-12) -> bool:
        keys = set(self._terms) | set(other._terms)
        return self.dim == other.dim and all(
            abs(complex(self.coeff(k)) - complex(other.coeff(k))) <= tol for k in keys
        )

    def as_float(self) -> "TrigPolynomial":
        return TrigPolynomial(self.dim, {k: complex(c) for k, c in self._terms.items()})

    def __call__(self, x):
        return evaluate(self, x)

    def __repr__(self):
        shown = ", ".join(f"{k}: {c}" for k, c in list(self._terms.items())[:6])
        more = "" if len(self) <= 6 else f", ... ({len(self)} modes)"
        return f"TrigPolynomial(dim={self.dim}, {{{shown}{more}}})"

    # -- serialization -------------------------------------------------------
    def to_records(self) -> list:
        return [
            {"k": list(k), "re": complex(c).real, "im": complex(c).imag}
            for k, c in sorted(self._terms.items())
        ]

    @classmethod
    def from_records(cls, records, dim: int | None = None) -> "TrigPolynomial":
        records = list(records)
        if dim is None:
            if not records:
                raise ValueError("dimension required for an empty record list")
            dim = len(records[0]["k"])
        terms = {}
        for r in records:
            # integer and "p/q" coefficients stay exact so exact correlations stay exact
            re, im = (Fraction(v) if isinstance(v, str) else v for v in (r.get("re", 0), r.get("im", 0)))
            terms[tuple(r["k"])] = re if im == 0 else complex(re, im)
        return cls(dim, terms)

    def to_json(self) -> str:
        return json.dumps(self.to_records())

    def spectrum(self) -> list:
        """Rows ``(|k|, |a_k|)`` sorted by ``|k|``."""
        rows = [(math.sqrt(sum(v * v for v in k)), abs(complex(c))) for k, c in self._terms.items()]
        return sorted(rows)

    def write_spectrum_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["abs_k", "abs_coeff"])
            for row in self.spectrum():
                w.writerow([repr(row[0]), repr(row[1])])


def product(A: TrigPolynomial, B: TrigPolynomial) -> TrigPolynomial:
    """Pointwise product (convolution of coefficients)."""
    if A.dim != B.dim:
        raise ValueError("dimension mismatch")
    out = {}
    for k, a in A.items():
        for kk, b in B.items():
            key = tuple(x + y for x, y in zip(k, kk))
            out[key] = out[key] + a * b if key in out else a * b
    return TrigPolynomial(A.dim, out)


def eigenvalue(k) -> float:
    """``lambda_k = 2 pi |k|``."""
    return TWO_PI * math.sqrt(sum(v * v for v in k))


def pairing(A: TrigPolynomial, B: TrigPolynomial):
    """``int A B dx = sum_k a_k b_{-k}`` (no complex conjugation)."""
    if A.dim != B.dim:
        raise ValueError(f"dimension mismatch: {A.dim} vs {B.dim}")
    if len(B) < len(A):
        A, B = B, A
    total = 0
    bt = B._terms
    for k, a in A.items():
        b = bt.get(tuple(-v for v in k))
        if b is not None:
            total = total + a * b
    return total


def _phase(k, translation):
    if all(v == 0 for v in translation):
        return 1
    turns = sum(kv * Fraction(v) for kv, v in zip(k, translation))
    return root_of_unity(turns)


def pullback(A: TrigPolynomial, f: AffineToralMap) -> TrigPolynomial:
    """``A o f``: mode ``k`` moves to ``M^T k`` with phase ``e^{2 pi i <k, v>}``."""
    if A.dim != f.dim:
        raise ValueError(f"dimension mismatch: {A.dim} vs {f.dim}")
    m = f.matrix
    cols = list(zip(*m))
    linear = f.is_linear
    out = {}
    for k, c in A.items():
        new_k = tuple(sum(a * b for a, b in zip(col, k)) for col in cols)
        out[new_k] = c if linear else c * _phase(k, f.translation)
    res = TrigPolynomial.__new__(TrigPolynomial)
    res.dim = A.dim
    res._terms = out
    return res


def evaluate(A: TrigPolynomial, x):
    """Value of ``A`` at a point or at a batch of points.

    A sequence of floats/Fractions gives one complex value with the phase
    ``<k, x> mod 1`` computed exactly (floats are dyadic rationals).  An array of
    shape ``(n, d)`` is evaluated through the dyadic grid.
    """
    if isinstance(x, np.ndarray) and x.ndim == 2:
        if x.dtype == np.uint64:
            return evaluate_grid(A, x)
        return evaluate_grid(A, float_to_grid(x))
    x = list(x)
    if len(x) != A.dim:
        raise ValueError("point dimension mismatch")
    xf = [Fraction(v) for v in x]
    total = 0j
    for k, c in A.items():
        turns = sum(kv * xv for kv, xv in zip(k, xf)) % 1
        total += complex(c) * cmath.exp(2j * math.pi * float(turns))
    return total


def _grid_phases(k, points: np.ndarray) -> np.ndarray:
    """``2 pi <k, x>`` reduced to ``[-pi, pi)`` for grid points (exact mod 1 before rounding)."""
    mod = 1 << GRID_BITS
    acc = np.zeros(points.shape[0], dtype=np.uint64)
    with np.errstate(over="ignore"):
        for i, kv in enumerate(k):
            if kv:
                acc += np.uint64(kv % mod) * points[:, i]
    # the signed view keeps the phase in [-1/2, 1/2) turns and converts fast
    return acc.view(np.int64).astype(np.float64) * (2.0 * math.pi * 2.0**-GRID_BITS)


def evaluate_grid(A: TrigPolynomial, points: np.ndarray) -> np.ndarray:
    """Evaluate at dyadic grid points (``uint64``, shape ``(n, d)``)."""
    if points.shape[1] != A.dim:
        raise ValueError("point dimension mismatch")
    out = np.zeros(points.shape[0], dtype=complex)
    for k, c in A.items():
        theta = _grid_phases(k, points)
        out += complex(c) * (np.cos(theta) + 1j * np.sin(theta))
    return out


def evaluate_grid_real(A: TrigPolynomial, points: np.ndarray) -> np.ndarray:
    """Real values of a real polynomial at grid points, one trig call per conjugate pair."""
    if points.shape[1] != A.dim:
        raise ValueError("point dimension mismatch")
    out = np.full(points.shape[0], complex(A.mean()).real)
    zero = (0,) * A.dim
    for k, c in A.items():
        if k <= zero:
            continue
        c = complex(c)
        theta = _grid_phases(k, points)
        if c.imag:
            out += 2.0 * (c.real * np.cos(theta) - c.imag * np.sin(theta))
        else:
            out += 2.0 * c.real * np.cos(theta)
    return out


def l2_norm(A: TrigPolynomial) -> float:
    return math.sqrt(sum(_abs2(c) for c in A._terms.values()))


def _lambda_pow(norm2: int, power: float) -> float:
    """``(2 pi sqrt(norm2))**power`` without overflowing on huge ``norm2``."""
    if power == 0:
        return 1.0
    log = power * (math.log(TWO_PI) + 0.5 * math.log(norm2))
    try:
        return math.exp(log)
    except OverflowError:
        return math.inf


def sobolev_norm(A: TrigPolynomial, s: float, *, zero_mean=True) -> float:
    """``(sum_{k != 0} |a_k|^2 (2 pi |k|)^{2s})^{1/2}``.

    With ``zero_mean=True`` a nonzero constant mode is an error; otherwise it is
    ignored (the norm of the zero-mean part).
    """
    zero = (0,) * A.dim
    if zero_mean and A.coeff(zero) != 0:
        raise ValueError("nonzero mean in a zero-mean Sobolev norm")
    total = 0.0
    for k, c in A.items():
        if k == zero:
            continue
        total += _abs2(c) * _lambda_pow(sum(v * v for v in k), 2 * s)
    return math.sqrt(total)


def smooth_split(A: TrigPolynomial, lam: float):
    """``(T_lam A, R_lam A)``: modes with ``lambda_k <= lam`` and the rest."""
    if lam < 0:
        raise ValueError("cutoff must be nonnegative")
    low, high = {}, {}
    for k, c in A.items():
        (low if eigenvalue(k) <= lam else high)[k] = c
    return TrigPolynomial(A.dim, low), TrigPolynomial(A.dim, high)


def tensor(A: TrigPolynomial, B: TrigPolynomial) -> TrigPolynomial:
    """``(x, y) -> A(x) B(y)`` on ``T^{2d}``."""
    if A.dim != B.dim:
        raise ValueError(f"dimension mismatch: {A.dim} vs {B.dim}")
    return TrigPolynomial(2 * A.dim, {k + kk: a * b for k, a in A.items() for kk, b in B.items()})


def first_coordinate_lift(A: TrigPolynomial) -> TrigPolynomial:
    """``(x, y) -> A(x)``."""
    return tensor(A, TrigPolynomial.constant(A.dim, 1))


def difference_lift(A: TrigPolynomial) -> TrigPolynomial:
    """``(x, y) -> A(x) - A(y)``."""
    one = TrigPolynomial.constant(A.dim, 1)
    return tensor(A, one) - tensor(one, A)


# -- spectral counting ---------------------------------------------------------

@lru_cache(maxsize=4096)
def _ball_count(r2: int, d: int) -> int:
    """``#{k in Z^d : |k|^2 <= r2}`` including ``k = 0``."""
    if r2 < 0:
        return 0
    r = math.isqrt(r2)
    if d == 1:
        return 2 * r + 1
    return sum(_ball_count(r2 - j * j, d - 1) for j in range(-r, r + 1))


def _norm2_bound(x: float) -> int:
    # tolerate float noise at exact lattice shells, e.g. (2 pi 10)^2 / (4 pi^2)
    return math.floor(x * (1 + 1e-12))


def weyl_count(Lam: float, d: int) -> int:
    """Number of nonzero ``k in Z^d`` with ``(2 pi |k|)^2 <= Lam``."""
    if Lam < 0 or d < 1:
        raise ValueError("need Lam >= 0 and d >= 1")
    return _ball_count(_norm2_bound(Lam / TWO_PI**2), d) - 1


def _shell_multiplicities(r2_max: int, d: int) -> np.ndarray:
    """``m[n] = #{k in Z^d : |k|^2 = n}`` for ``n <= r2_max``."""
    from scipy.signal import fftconvolve

    base = np.zeros(r2_max + 1)
    r = math.isqrt(r2_max)
    sq = np.arange(r + 1) ** 2
    base[sq] = 2.0
    base[0] = 1.0
    out = base.copy()
    for _ in range(d - 1):
        out = np.rint(fftconvolve(out, base)[: r2_max + 1])
    return out


def spectral_partial_sum(t: float, d: int, cutoff: float, convention: str = "laplacian") -> float:
    """Sum of ``mu^t`` over nonzero modes with ``mu <= cutoff``.

    ``convention="laplacian"`` takes ``mu = (2 pi |k|)^2`` (the eigenvalues of
    ``Delta``); ``convention="frequency"`` takes ``mu = 2 pi |k|``.
    """
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    if convention == "laplacian":
        r2_max, expo = _norm2_bound(cutoff / TWO_PI**2), t
        scale = TWO_PI**2
    elif convention == "frequency":
        r2_max, expo = _norm2_bound((cutoff / TWO_PI) ** 2), t / 2
        scale = TWO_PI**2
    else:
        raise ValueError(f"unknown convention {convention!r}")
    if r2_max < 1:
        return 0.0
    if d == 1:
        n = np.arange(1, math.isqrt(r2_max) + 1, dtype=float)
        return float(np.sum(2.0 * (scale * n * n) ** expo))
    if r2_max > 50_000_000:
        raise ValueError("cutoff too large for shell enumeration in d >= 2")
    mult = _shell_multiplicities(r2_max, d)
    n = np.nonzero(mult[1:])[0] + 1
    return float(np.sum(mult[n] * (scale * n.astype(float)) ** expo))


@dataclass(frozen=True)
class NetBoundQuery:
    """Parameters of an epsilon-net cardinality bound.

    ``space`` is ``"hoelder"`` (uses ``alpha``, ``volume``, ``increments``) or
    ``"sobolev"`` (uses ``s``).  ``increments`` is the number of admissible
    value increments between adjacent boxes.
    """

    space: str
    eps: float
    dim: int
    alpha: float | None = None
    s: float | None = None
    volume: float = 1.0
    increments: int = 7

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.space == "hoelder":
            if self.alpha is None or self.alpha <= 0:
                raise ValueError("Hoelder bound needs alpha > 0")
            if self.volume <= 0 or self.increments < 1:
                raise ValueError("volume and increments must be positive")
        elif self.space == "sobolev":
            if self.s is None or self.s <= 0:
                raise ValueError("Sobolev bound needs s > 0")
        else:
            raise ValueError(f"unknown space {self.space!r}")


def epsilon_net_log_bound(q: NetBoundQuery) -> float:
    """Natural log of the epsilon-net cardinality bound for the query."""
    if q.space == "hoelder":
        boxes = q.volume / q.eps ** (q.dim / q.alpha)
        return math.log(3) - math.log(q.eps) + boxes * math.log(q.increments)
    lam = (q.eps / 2) ** (-1.0 / (2 * q.s))
    n = weyl_count(lam * lam, q.dim)
    return n * math.log(1 + 2 / q.eps)
