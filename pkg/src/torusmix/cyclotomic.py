"""Exact arithmetic in cyclotomic fields Q(zeta_L).

Phases e^{2 pi i p/q} produced by rational translations are kept exact so that
identities such as ``|rho| == 1`` or ``sum of roots == 0`` can be asserted without
a float tolerance.  An element of level ``L`` is stored as its coordinates in the
power basis ``1, zeta, ..., zeta^{phi(L)-1}``; the representation is canonical, so
equality and zero tests are exact.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

__all__ = ["Cyclotomic", "root_of_unity", "MAX_EXACT_LEVEL"]

# Levels above this fall back to complex floats (phi(L) coordinates per element).
MAX_EXACT_LEVEL = 1024


def _poly_divexact(num: list, den: tuple) -> list:
    """Exact quotient of integer polynomials (low to high) when ``den`` is monic and divides ``num``."""
    num = list(num)
    dd = len(den) - 1
    q = [0] * (len(num) - dd)
    for i in range(len(q) - 1, -1, -1):
        c = num[i + dd]
        q[i] = c
        if c:
            for j, b in enumerate(den):
                num[i + j] -= c * b
    if any(num):
        raise ArithmeticError("inexact polynomial division")
    return q


@lru_cache(maxsize=None)
def _phi_poly(level: int) -> tuple[int, ...]:
    """Coefficients (low to high) of the cyclotomic polynomial Phi_level.

    ``x^L - 1`` divided by ``Phi_d`` for every proper divisor ``d`` of ``L``.
    """
    poly = [-1] + [0] * (level - 1) + [1]
    for d in range(1, level):
        if level % d == 0:
            poly = _poly_divexact(poly, _phi_poly(d))
    return tuple(poly)


def _reduce(poly: list, level: int) -> tuple:
    """Reduce a coefficient list modulo Phi_level."""
    phi = _phi_poly(level)
    deg = len(phi) - 1
    p = list(poly)
    for i in range(len(p) - 1, deg - 1, -1):
        c = p[i]
        if c:
            base = i - deg
            for j in range(deg):
                if phi[j]:
                    p[base + j] -= c * phi[j]
            p[i] = 0
    p = p[:deg] + [0] * max(0, deg - len(p))
    return tuple(p)


def _lift(c: "Cyclotomic", level: int) -> tuple:
    if c.level == level:
        return c.coeffs
    step = level // c.level
    poly = [0] * level
    for j, a in enumerate(c.coeffs):
        if a:
            poly[(j * step) % level] += a
    return _reduce(poly, level)


class Cyclotomic:
    """Element ``sum_j coeffs[j] * zeta_L**j`` of Q(zeta_L), L = ``level``.

    Instances are immutable.  Arithmetic with ``int``/``Fraction`` stays exact;
    arithmetic with ``float``/``complex`` degrades to ``complex``.  Results that
    happen to be rational are returned as ``Fraction``.
    """

    __slots__ = ("level", "coeffs")

    def __init__(self, level: int, coeffs):
        self.level = level
        self.coeffs = tuple(coeffs)

    @classmethod
    def root(cls, turns) -> "Cyclotomic | Fraction":
        """Exact ``exp(2 pi i * turns)`` for rational ``turns``."""
        turns = Fraction(turns) % 1
        level = turns.denominator
        if level == 1:
            return Fraction(1)
        poly = [0] * level
        poly[turns.numerator] = 1
        return cls._make(level, _reduce(poly, level))

    @classmethod
    def _make(cls, level, coeffs):
        if all(c == 0 for c in coeffs[1:]):
            return coeffs[0] if coeffs else Fraction(0)
        return cls(level, coeffs)

    # -- conversions ---------------------------------------------------------
    def __complex__(self) -> complex:
        zeta = cmath.exp(2j * math.pi / self.level)
        return complex(sum(float(a) * zeta**j for j, a in enumerate(self.coeffs) if a))

    def __abs__(self) -> float:
        return abs(complex(self))

    @property
    def real(self) -> float:
        return complex(self).real

    @property
    def imag(self) -> float:
        return complex(self).imag

    def conjugate(self):
        poly = [0] * self.level
        for j, a in enumerate(self.coeffs):
            if a:
                poly[(-j) % self.level] += a
        return Cyclotomic._make(self.level, _reduce(poly, self.level))

    def abs2(self):
        """Exact squared modulus ``self * conj(self)``."""
        return self * self.conjugate()

    # -- arithmetic ----------------------------------------------------------
    @staticmethod
    def _coerce(other):
        if isinstance(other, Cyclotomic):
            return other
        if isinstance(other, Rational):
            return Cyclotomic(1, (Fraction(other),))
        return None

    def _binary(self, other, op):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        level = math.lcm(self.level, o.level)
        a, b = _lift(self, level), _lift(o, level)
        return op(a, b, level)

    @staticmethod
    def _add(a, b, level):
        return Cyclotomic._make(level, tuple(x + y for x, y in zip(a, b)))

    @staticmethod
    def _mul(a, b, level):
        nz_a = [(i, x) for i, x in enumerate(a) if x]
        nz_b = [(j, y) for j, y in enumerate(b) if y]
        poly = [0] * (len(a) + len(b))
        for i, x in nz_a:
            for j, y in nz_b:
                poly[i + j] += x * y
        return Cyclotomic._make(level, _reduce(poly, level))

    def __add__(self, other):
        if isinstance(other, (float, complex)):
            return complex(self) + other
        return self._binary(other, self._add)

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.level, tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (float, complex)):
            return complex(self) * other
        if isinstance(other, Rational):
            if other == 0:
                return Fraction(0)
            return Cyclotomic(self.level, tuple(c * other for c in self.coeffs))
        return self._binary(other, self._mul)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Rational):
            return self * (Fraction(1) / Fraction(other))
        return complex(self) / other

    def __eq__(self, other):
        if isinstance(other, (float, complex)):
            return complex(self) == other
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        level = math.lcm(self.level, o.level)
        return _lift(self, level) == _lift(o, level)

    def __hash__(self):
        return hash((self.level, self.coeffs))

    def __bool__(self):
        return any(self.coeffs)

    def __repr__(self):
        terms = [f"{c}*z^{j}" for j, c in enumerate(self.coeffs) if c]
        return f"Cyclotomic[{self.level}]({' + '.join(terms) or '0'})"


def root_of_unity(turns):
    """``exp(2 pi i turns)``: exact when ``turns`` is a Fraction of small denominator.

    ``turns`` may be a Fraction (possibly with huge numerator) or a float.
    """
    if isinstance(turns, Rational):
        turns = Fraction(turns) % 1
        if turns.denominator <= MAX_EXACT_LEVEL:
            return Cyclotomic.root(turns)
        return cmath.exp(2j * math.pi * float(turns))
    t = float(turns) % 1.0
    if t == 0.0:
        return 1.0 + 0j
    return cmath.exp(2j * math.pi * t)
