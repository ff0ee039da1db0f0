import cmath
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torusmix.dynamics import CAT_MAP, AffineToralMap, apply_map, identity_map, linear_map, translation_map
from torusmix.observables import (
    NetBoundQuery,
    TrigPolynomial,
    difference_lift,
    epsilon_net_log_bound,
    evaluate,
    first_coordinate_lift,
    l2_norm,
    pairing,
    product,
    pullback,
    smooth_split,
    sobolev_norm,
    spectral_partial_sum,
    tensor,
    weyl_count,
)

TWO_PI = 2 * math.pi
SL2 = [CAT_MAP, CAT_MAP.inverse(), linear_map([[1, 1], [0, 1]]), linear_map([[0, -1], [1, 0]])]


def real_polys(dim=2, max_modes=4, max_freq=3):
    return st.builds(
        lambda seed, n: TrigPolynomial.random_real(dim, n, max_freq, np.random.default_rng(seed)),
        st.integers(0, 2**32 - 1),
        st.integers(1, max_modes),
    )


def affine_maps():
    tr = st.tuples(st.fractions(0, 1, max_denominator=16), st.fractions(0, 1, max_denominator=16))
    return st.builds(lambda m, t: AffineToralMap(m.matrix, t), st.sampled_from(SL2), tr)


def direct_eval(A, x):
    return sum(complex(c) * cmath.exp(2j * math.pi * sum(k_i * x_i for k_i, x_i in zip(k, x))) for k, c in A.items())


# -- canonical form and serialization --------------------------------------------

def test_canonical_form_drops_zeros():
    A = TrigPolynomial(1, {(1,): 1, (2,): 0, (3,): 1e-17})
    assert A.support() == [(1,)]
    assert (A - A).is_zero()


def test_flags_enforced():
    with pytest.raises(ValueError):
        TrigPolynomial(1, {(0,): 1}, zero_mean=True)
    with pytest.raises(ValueError):
        TrigPolynomial(1, {(1,): 1j, (-1,): 1j}, real=True)
    TrigPolynomial(1, {(1,): 1j, (-1,): -1j}, real=True, zero_mean=True)


def test_records_roundtrip():
    rng = np.random.default_rng(1)
    A = TrigPolynomial.random_real(3, 5, 2, rng)
    assert TrigPolynomial.from_records(A.to_records()).allclose(A, tol=0)


def test_integer_records_stay_exact():
    A = TrigPolynomial.from_records([{"k": [1, 0], "re": 1}, {"k": [-1, 0], "re": 1}])
    assert A == TrigPolynomial.cosine((1, 0))
    assert pairing(A, A) == 2 and isinstance(pairing(A, A), int)


# -- pairing -------------------------------------------------------------------

def test_pairing_examples():
    e = TrigPolynomial.character
    assert pairing(e((1, 2)), e((-1, -2))) == 1
    assert pairing(e((1, 2)), e((1, 2))) == 0
    assert pairing(e((1, 0), 2), e((-1, 0), 3)) == 6
    with pytest.raises(ValueError):
        pairing(e((1,)), e((1, 0)))


@settings(max_examples=50, deadline=None)
@given(real_polys(), real_polys())
def test_pairing_is_integral_of_product(A, B):
    assert abs(complex(pairing(A, B)) - complex(product(A, B).mean())) < 1e-12


# -- pullback and evaluation -----------------------------------------------------

def test_pullback_examples():
    A = TrigPolynomial.character((1, 0))
    assert pullback(A, identity_map(2)) == A
    assert pullback(A, CAT_MAP) == TrigPolynomial.character((2, 1))
    e1 = TrigPolynomial.character((1,))
    v = Fraction(1, 8)
    got = pullback(e1, translation_map([v]))
    assert abs(complex(got.coeff((1,))) - cmath.exp(2j * math.pi * v)) < 1e-15


def test_pullback_matches_composition_pointwise():
    rng = np.random.default_rng(2)
    A = TrigPolynomial.random_real(2, 4, 3, rng)
    f = AffineToralMap(CAT_MAP.matrix, [0.3, 0.7])
    x = rng.random((1000, 2))
    lhs = evaluate(pullback(A, f), x)
    rhs = evaluate(A, apply_map(f, x))
    assert np.max(np.abs(lhs - rhs)) < 1e-10


@settings(max_examples=50, deadline=None)
@given(real_polys(), real_polys(), affine_maps())
def test_pairing_invariant_under_pullback(A, B, f):
    lhs = complex(pairing(pullback(A, f), pullback(B, f)))
    assert abs(lhs - complex(pairing(A, B))) < 1e-12
    assert abs(l2_norm(pullback(A, f)) - l2_norm(A)) < 1e-12


def test_exact_pullback_pairing_stays_exact():
    A = TrigPolynomial.character((1, 1))
    B = TrigPolynomial.character((-1, -1))
    f = AffineToralMap(CAT_MAP.matrix, [Fraction(1, 3), Fraction(1, 5)])
    assert pairing(pullback(A, f), pullback(B, f)) == 1


def test_evaluate_examples():
    assert evaluate(TrigPolynomial.constant(2, 1), [0.3, 0.1]) == 1
    assert abs(evaluate(TrigPolynomial.character((1,)), [Fraction(1, 4)]) - 1j) < 1e-15
    rng = np.random.default_rng(3)
    A = TrigPolynomial.random_real(2, 6, 4, rng)
    x = rng.random((200, 2))
    fast = evaluate(A, x)
    slow = np.array([direct_eval(A, p) for p in x])
    assert np.max(np.abs(fast - slow)) < 1e-10


def test_evaluate_huge_frequencies_uses_exact_phase():
    k = (10**30 + 1, 0)
    A = TrigPolynomial.character(k)
    assert abs(evaluate(A, [0.5, 0.0]) - (-1)) < 1e-12


# -- Sobolev norms and smoothing -----------------------------------------------

@pytest.mark.parametrize("s", [0, 0.5, 1, 2])
def test_sobolev_norm_of_character(s):
    for k in [(1, 0), (2, 3), (-4, 1)]:
        lam = TWO_PI * math.hypot(*k)
        assert math.isclose(sobolev_norm(TrigPolynomial.character(k), s), lam**s, rel_tol=1e-12)


def test_sobolev_norm_examples():
    assert sobolev_norm(TrigPolynomial.character((2,), 3), 0) == 3
    with pytest.raises(ValueError):
        sobolev_norm(TrigPolynomial.constant(1, 1), 1)
    assert sobolev_norm(TrigPolynomial.constant(1, 1) + TrigPolynomial.character((1,)), 0, zero_mean=False) == 1


@settings(max_examples=100, deadline=None)
@given(real_polys(), real_polys(), st.floats(0, 3))
def test_sobolev_triangle_inequality(A, B, s):
    assert sobolev_norm(A + B, s) <= sobolev_norm(A, s) + sobolev_norm(B, s) + 1e-9 * (1 + sobolev_norm(A, s))


def test_smooth_split_examples():
    A = TrigPolynomial.random_real(2, 4, 3, np.random.default_rng(4))
    low, high = smooth_split(A, 0)
    assert low.is_zero() and high == A
    low, high = smooth_split(A, TWO_PI * 10)
    assert high.is_zero() and low == A


@settings(max_examples=200, deadline=None)
@given(real_polys(dim=2, max_modes=5, max_freq=5), st.floats(0.1, 40), st.floats(0, 3), st.floats(0, 3))
def test_smoothing_inequalities(A, lam, s, ds):
    sp = s + ds
    low, high = smooth_split(A, lam)
    assert low + high == A
    assert sobolev_norm(high, 0) ** 2 <= lam ** (-2 * s) * sobolev_norm(A, s) ** 2
    assert sobolev_norm(low, sp) ** 2 <= lam ** (2 * (sp - s)) * sobolev_norm(A, s) ** 2


# -- lifts ---------------------------------------------------------------------

def test_tensor_and_lifts():
    e = TrigPolynomial.character
    one = TrigPolynomial.constant(2, 1)
    B = e((1, 2))
    assert tensor(one, B) == TrigPolynomial(4, {(0, 0, 1, 2): 1})
    assert tensor(e((1, 0)), e((0, 3))) == e((1, 0, 0, 3))
    assert difference_lift(TrigPolynomial.zero(2)).is_zero()
    assert difference_lift(e((1, 0))) == TrigPolynomial(4, {(1, 0, 0, 0): 1, (0, 0, 1, 0): -1})


def test_lifts_pointwise():
    rng = np.random.default_rng(5)
    A = TrigPolynomial.random_real(2, 3, 3, rng)
    B = TrigPolynomial.random_real(2, 3, 3, rng)
    xy = rng.random((300, 4))
    x, y = xy[:, :2], xy[:, 2:]
    assert np.max(np.abs(evaluate(tensor(A, B), xy) - evaluate(A, x) * evaluate(B, y))) < 1e-10
    assert np.max(np.abs(evaluate(difference_lift(A), xy) - (evaluate(A, x) - evaluate(A, y)))) < 1e-10
    assert np.max(np.abs(evaluate(first_coordinate_lift(A), xy) - evaluate(A, x))) < 1e-10


# -- spectral counting -----------------------------------------------------------

def brute_weyl(Lam, d):
    r = int(math.sqrt(Lam) / TWO_PI) + 1
    return sum(1 for k in itertools.product(range(-r, r + 1), repeat=d)
               if any(k) and TWO_PI**2 * sum(v * v for v in k) <= Lam)


def test_weyl_examples():
    assert weyl_count(TWO_PI**2 * 0.99, 2) == 0
    assert weyl_count((TWO_PI * 10) ** 2, 1) == 20
    for Lam in np.linspace(1, (TWO_PI * 6) ** 2, 37):
        for d in (1, 2, 3):
            assert weyl_count(Lam, d) == brute_weyl(Lam, d)


def test_weyl_ratio_bracket_d2_matches_enumeration():
    # extremes of count / Lam over the whole range occur just below / at lattice shells
    shells = sorted({a * a + b * b for a in range(0, 101) for b in range(0, 101) if 0 < a * a + b * b <= 100**2})
    ratios = [weyl_count(TWO_PI**2 * r2, 2) / (TWO_PI**2 * r2) for r2 in shells]
    assert min(ratios) > 0.05 and max(ratios) <= 0.11
    assert math.isclose(ratios[-1], 1 / (4 * math.pi), rel_tol=0.02)


def test_spectral_partial_sum_examples():
    assert spectral_partial_sum(-1, 1, TWO_PI**2 * 0.5) == 0
    v = spectral_partial_sum(-1, 2, TWO_PI**2 * 2)
    assert math.isclose(v, 4 / TWO_PI**2 + 4 / (2 * TWO_PI**2), rel_tol=1e-12)
    freq = spectral_partial_sum(-2, 1, TWO_PI * 3, convention="frequency")
    assert math.isclose(freq, spectral_partial_sum(-1, 1, (TWO_PI * 3) ** 2), rel_tol=1e-12)


def test_spectral_partial_sum_brute_force_d2():
    r = 12
    want = sum((TWO_PI**2 * (a * a + b * b)) ** -0.8
               for a in range(-r, r + 1) for b in range(-r, r + 1) if 0 < a * a + b * b <= r * r)
    assert math.isclose(spectral_partial_sum(-0.8, 2, TWO_PI**2 * r * r), want, rel_tol=1e-12)


def test_spectral_partial_sum_monotone_and_trends():
    cut = [(TWO_PI * 2**j) ** 2 for j in range(4, 22)]
    conv = np.diff([spectral_partial_sum(-1, 1, c) for c in cut])
    div = np.diff([spectral_partial_sum(-0.25, 1, c) for c in cut])
    assert np.all(conv > 0) and np.all(div > 0)
    assert conv[-1] < 1e-6 and np.all(np.diff(conv) < 0)
    assert np.all(np.diff(div) > 0)


# -- epsilon nets ----------------------------------------------------------------

def test_net_bound_sobolev_formula():
    q = NetBoundQuery("sobolev", 0.001, 1, s=1.0)
    lam = (0.0005) ** -0.5
    n = weyl_count(lam * lam, 1)
    assert n == 14  # 2 pi |k| <= 44.7 for |k| <= 7
    assert math.isclose(epsilon_net_log_bound(q), n * math.log(1 + 2 / 0.001))
    assert epsilon_net_log_bound(NetBoundQuery("sobolev", 0.1, 1, s=1.0)) == 0.0


def test_net_bound_hoelder_limit_and_monotone():
    eps = np.linspace(0.05, 0.999, 40)
    vals = [epsilon_net_log_bound(NetBoundQuery("hoelder", e, 2, alpha=1.0, volume=1e-6)) for e in eps]
    assert np.all(np.diff(vals) < 0)
    near_one = NetBoundQuery("hoelder", 0.999999, 2, alpha=1.0, volume=1e-6)
    assert math.isclose(epsilon_net_log_bound(near_one), math.log(3) - math.log(0.999999) + 1e-6 * math.log(7) / 0.999999**2,
                        rel_tol=1e-9)


def test_net_bound_rejects_bad_queries():
    with pytest.raises(ValueError):
        NetBoundQuery("sobolev", 1.5, 1, s=1.0)
    with pytest.raises(ValueError):
        NetBoundQuery("hoelder", 0.5, 1)
    with pytest.raises(ValueError):
        NetBoundQuery("besov", 0.5, 1, s=1.0)
