"""Affine maps of the torus, IID random words and the two-point lift.

Composition convention: a word ``(w_0, w_1, ..., w_{N-1})`` acts on a point by
applying ``f_{w_0}`` first, so ``F^N = f_{w_{N-1}} o ... o f_{w_0}`` and the
cocycle identity ``F^{n+m}(w) = F^m(shift(w, n)) o F^n(w)`` holds.

Translations are exact ``Fraction`` values when their denominator is at most
``2**31``; otherwise they are floats in ``[0, 1)``.

Torus points can be sampled on the dyadic grid ``2**-64 Z^d / Z^d`` stored as
``uint64`` arrays.  Unimodular maps permute that grid, so orbits computed there
are exact (arithmetic wraps modulo ``2**64``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

from .streams import stream_rng

__all__ = [
    "AffineToralMap",
    "RandomSystem",
    "Word",
    "compose",
    "apply_map",
    "sample_word",
    "word_composition",
    "shift_word",
    "diagonal_lift",
    "identity_map",
    "translation_map",
    "linear_map",
    "CAT_MAP",
    "GRID_BITS",
    "sample_grid_points",
    "grid_to_float",
    "map_on_grid",
    "translation_to_grid",
    "float_to_grid",
    "iter_compositions",
    "GridStepper",
]

MAX_DENOMINATOR = 2**31
GRID_BITS = 64
_GRID = 1 << GRID_BITS


def _normalize_translation(v):
    if isinstance(v, str):
        v = Fraction(v)
    if isinstance(v, Rational):
        v = Fraction(v) % 1
        if v.denominator <= MAX_DENOMINATOR:
            return v
        v = float(v)
    v = float(v) % 1.0
    return 0.0 if v >= 1.0 else v


def _det(matrix) -> int:
    """Exact integer determinant (Bareiss fraction-free elimination)."""
    a = [list(row) for row in matrix]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _unimodular_inverse(matrix) -> tuple:
    """Exact inverse of a unimodular integer matrix by Gauss-Jordan elimination over Fraction."""
    n = len(matrix)
    a = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(matrix)]
    for k in range(n):
        piv = next(r for r in range(k, n) if a[r][k] != 0)
        a[k], a[piv] = a[piv], a[k]
        p = a[k][k]
        a[k] = [v / p for v in a[k]]
        for r in range(n):
            if r != k and a[r][k] != 0:
                f = a[r][k]
                a[r] = [x - f * y for x, y in zip(a[r], a[k])]
    out = tuple(tuple(int(v) for v in row[n:]) for row in a)
    if any(v.denominator != 1 for row in a for v in row[n:]):
        raise ArithmeticError("inverse is not integral")
    return out


def _matmul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(m)) for j in range(p)) for i in range(n))


def _matvec(a, v):
    return tuple(sum(a_ij * v_j for a_ij, v_j in zip(row, v)) for row in a)


@dataclass(frozen=True)
class AffineToralMap:
    """``x -> matrix @ x + translation (mod 1)`` with ``|det matrix| = 1``."""

    matrix: tuple
    translation: tuple

    def __init__(self, matrix, translation=None, *, _trusted=False):
        m = tuple(tuple(int(a) for a in row) for row in matrix)
        d = len(m)
        if d == 0 or any(len(row) != d for row in m):
            raise ValueError("matrix must be square and nonempty")
        if translation is None:
            translation = (Fraction(0),) * d
        if _trusted:
            t = tuple(translation)
        else:
            t = tuple(_normalize_translation(v) for v in translation)
            if len(t) != d:
                raise ValueError(f"translation has length {len(t)}, expected {d}")
            if abs(_det(m)) != 1:
                raise ValueError(f"matrix is not unimodular (det = {_det(m)})")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "translation", t)

    @property
    def dim(self) -> int:
        return len(self.matrix)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.translation)

    @property
    def is_linear(self) -> bool:
        return all(v == 0 for v in self.translation)

    def determinant(self) -> int:
        return _det(self.matrix)

    def inverse(self) -> "AffineToralMap":
        m = _unimodular_inverse(self.matrix)
        v = _matvec(m, self.translation)
        return AffineToralMap(m, [-x for x in v])

    def __call__(self, x):
        return apply_map(self, x)

    def to_dict(self) -> dict:
        return {
            "matrix": [list(row) for row in self.matrix],
            "translation": [_encode_scalar(v) for v in self.translation],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AffineToralMap":
        tr = data.get("translation")
        return cls(data["matrix"], None if tr is None else [_decode_scalar(v) for v in tr])


def _encode_scalar(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return float(v)


def _decode_scalar(v):
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, int):
        return Fraction(v)
    return float(v)


def identity_map(d: int) -> AffineToralMap:
    return AffineToralMap([[int(i == j) for j in range(d)] for i in range(d)])


def translation_map(v) -> AffineToralMap:
    d = len(v)
    return AffineToralMap([[int(i == j) for j in range(d)] for i in range(d)], v)


def linear_map(matrix) -> AffineToralMap:
    return AffineToralMap(matrix)


CAT_MAP = AffineToralMap([[2, 1], [1, 1]])


def compose(f: AffineToralMap, g: AffineToralMap) -> AffineToralMap:
    """The map ``x -> f(g(x))``."""
    if f.dim != g.dim:
        raise ValueError(f"dimension mismatch: {f.dim} vs {g.dim}")
    m = _matmul(f.matrix, g.matrix)
    if f.is_exact and g.is_exact:
        t = tuple(_normalize_translation(a + b) for a, b in zip(_matvec(f.matrix, g.translation), f.translation))
    else:
        # exact dyadic arithmetic on the float values, rounded once at the end
        gv = [Fraction(v) for v in g.translation]
        t = tuple(
            _normalize_translation(float((a + Fraction(b)) % 1))
            for a, b in zip(_matvec(f.matrix, gv), f.translation)
        )
    return AffineToralMap(m, t, _trusted=True)


def apply_map(f: AffineToralMap, x):
    """Apply ``f`` to a point (shape ``(d,)``) or a batch of points (``(n, d)``).

    Float input gives float output in ``[0, 1)``; a sequence of ``Fraction``
    gives an exact tuple of ``Fraction``.
    """
    if not isinstance(x, np.ndarray) and all(isinstance(c, Rational) for c in x):
        if len(x) != f.dim:
            raise ValueError("point dimension mismatch")
        return tuple((a + Fraction(b)) % 1 for a, b in zip(_matvec(f.matrix, [Fraction(c) for c in x]), f.translation))
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1] != f.dim:
        raise ValueError("point dimension mismatch")
    m = np.array(f.matrix, dtype=float)
    v = np.array([float(t) for t in f.translation])
    y = np.mod(arr @ m.T + v, 1.0)
    y[y >= 1.0] = 0.0
    return y


@dataclass(frozen=True)
class RandomSystem:
    """A finitely supported law ``mu`` on affine toral maps."""

    generators: tuple
    probabilities: tuple

    def __init__(self, generators: Sequence[AffineToralMap], probabilities=None):
        gens = tuple(generators)
        if not gens:
            raise ValueError("a random system needs at least one generator")
        d = gens[0].dim
        if any(g.dim != d for g in gens):
            raise ValueError("all generators must share one dimension")
        if probabilities is None:
            probabilities = [Fraction(1, len(gens))] * len(gens)
        probs = tuple(Fraction(p) if isinstance(p, (str, int)) else p for p in probabilities)
        if len(probs) != len(gens):
            raise ValueError("one probability per generator is required")
        if any(p < 0 for p in probs):
            raise ValueError("probabilities must be nonnegative")
        total = sum(probs)
        if abs(float(total) - 1.0) > 1e-12:
            raise ValueError(f"probabilities must sum to 1 (got {float(total):.15g})")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "probabilities", probs)

    @property
    def dim(self) -> int:
        return self.generators[0].dim

    def __len__(self):
        return len(self.generators)

    def lifted(self) -> "RandomSystem":
        """The two-point system with every generator diagonally lifted."""
        return RandomSystem([diagonal_lift(g) for g in self.generators], self.probabilities)

    def inverse_system(self) -> "RandomSystem":
        return RandomSystem([g.inverse() for g in self.generators], self.probabilities)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "generators": [
                {**g.to_dict(), "prob": _encode_scalar(p)} for g, p in zip(self.generators, self.probabilities)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RandomSystem":
        gens = [AffineToralMap.from_dict(g) for g in data["generators"]]
        if any(g.dim != data["dim"] for g in gens):
            raise ValueError("generator dimension disagrees with 'dim'")
        return cls(gens, [_decode_scalar(g["prob"]) for g in data["generators"]])

    @classmethod
    def from_json(cls, text: str) -> "RandomSystem":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Word:
    """A finite realization ``(w_0, ..., w_{N-1})`` of generator indices."""

    indices: tuple
    system: RandomSystem

    def __init__(self, indices, system: RandomSystem):
        idx = tuple(int(i) for i in indices)
        if any(i < 0 or i >= len(system) for i in idx):
            raise ValueError("word contains an invalid generator index")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "system", system)

    def __len__(self):
        return len(self.indices)

    def maps(self):
        gens = self.system.generators
        return [gens[i] for i in self.indices]

    def lifted(self) -> "Word":
        return Word(self.indices, self.system.lifted())


def sample_word(system: RandomSystem, length: int, seed: int, stream=0) -> Word:
    """IID word of the given length, drawn by inverse CDF from stream ``(seed, stream)``."""
    if length < 0:
        raise ValueError("length must be nonnegative")
    if length == 0:
        return Word((), system)
    if len(system) == 1:
        return Word((0,) * length, system)
    streams = stream if isinstance(stream, tuple) else (stream,)
    rng = stream_rng(seed, *streams)
    cdf = np.cumsum([float(p) for p in system.probabilities])
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, rng.random(length), side="right")
    return Word(np.minimum(idx, len(system) - 1).tolist(), system)


def word_composition(word: Word, n: int) -> AffineToralMap:
    """``F^n = f_{w_{n-1}} o ... o f_{w_0}``; ``F^0`` is the identity."""
    if n < 0 or n > len(word):
        raise ValueError(f"n = {n} outside [0, {len(word)}]")
    h = identity_map(word.system.dim)
    gens = word.system.generators
    for i in word.indices[:n]:
        h = compose(gens[i], h)
    return h


def iter_compositions(word: Word, n_max: int | None = None):
    """Yield ``F^0, F^1, ..., F^{n_max}`` incrementally."""
    n_max = len(word) if n_max is None else n_max
    if n_max > len(word):
        raise ValueError("word too short")
    h = identity_map(word.system.dim)
    yield h
    gens = word.system.generators
    for i in word.indices[:n_max]:
        h = compose(gens[i], h)
        yield h


def shift_word(word: Word, k: int) -> Word:
    """Drop the first ``k`` letters (the shift ``sigma^k``)."""
    if k < 0 or k > len(word):
        raise ValueError(f"shift {k} outside [0, {len(word)}]")
    return Word(word.indices[k:], word.system)


def diagonal_lift(f: AffineToralMap) -> AffineToralMap:
    """``(x, y) -> (f(x), f(y))`` on the torus of twice the dimension."""
    d = f.dim
    m = [[0] * (2 * d) for _ in range(2 * d)]
    for i in range(d):
        for j in range(d):
            m[i][j] = f.matrix[i][j]
            m[d + i][d + j] = f.matrix[i][j]
    return AffineToralMap(m, f.translation + f.translation, _trusted=True)


# -- exact orbits on the dyadic grid -------------------------------------------

def sample_grid_points(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """``n`` uniform points of the grid ``2**-64 Z^d`` as a ``(n, d)`` uint64 array."""
    return rng.integers(0, np.iinfo(np.uint64).max, size=(n, d), dtype=np.uint64, endpoint=True)


def grid_to_float(points: np.ndarray) -> np.ndarray:
    return points.astype(np.float64) * 2.0**-GRID_BITS


def float_to_grid(x) -> np.ndarray:
    """Nearest grid points to float coordinates in ``[0, 1)``."""
    x = np.asarray(x, dtype=float)
    frac = np.mod(x, 1.0)
    # 2**64 * frac needs two steps to stay exact below 2**64
    hi = np.floor(frac * 2.0**32)
    lo = np.round((frac * 2.0**32 - hi) * 2.0**32)
    return (hi.astype(np.uint64) << np.uint64(32)) + lo.astype(np.uint64)


def translation_to_grid(v) -> int:
    """Translation component as an integer multiple of ``2**-64`` (rounded)."""
    if isinstance(v, Fraction):
        return round(v * _GRID) % _GRID
    return round(Fraction(float(v)) * _GRID) % _GRID


def _grid_operator(f: AffineToralMap):
    m = np.array([[a % _GRID for a in row] for row in f.matrix], dtype=np.uint64)
    v = np.array([translation_to_grid(t) for t in f.translation], dtype=np.uint64)
    return m, v


def map_on_grid(f: AffineToralMap, points: np.ndarray, _op=None) -> np.ndarray:
    """Exact image of grid points under ``f`` (uint64 arithmetic wraps mod 2**64)."""
    m, v = _op if _op is not None else _grid_operator(f)
    out = np.empty_like(points)
    with np.errstate(over="ignore"):
        for i in range(points.shape[1]):
            acc = np.full(points.shape[0], v[i], dtype=np.uint64)
            for j in range(points.shape[1]):
                if m[i, j]:
                    acc += m[i, j] * points[:, j]
            out[:, i] = acc
    return out


class GridStepper:
    """Applies per-point generator choices to grid points, one time step at a time."""

    def __init__(self, system: RandomSystem):
        self.ops = [_grid_operator(g) for g in system.generators]

    def step(self, points: np.ndarray, choices) -> np.ndarray:
        if isinstance(choices, (int, np.integer)):
            return map_on_grid(None, points, self.ops[int(choices)])
        out = np.empty_like(points)
        choices = np.asarray(choices)
        for j, op in enumerate(self.ops):
            mask = choices == j
            if mask.any():
                out[mask] = map_on_grid(None, points[mask], op)
        return out
