import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torusmix import correlations as corr
from torusmix import rates
from torusmix.dynamics import (
    CAT_MAP,
    RandomSystem,
    Word,
    compose,
    identity_map,
    linear_map,
    map_on_grid,
    sample_grid_points,
    sample_word,
    translation_map,
    word_composition,
)
from torusmix.errors import BudgetExceeded, TruncationError
from torusmix.experiments.scenarios import sl2_system
from torusmix.observables import TrigPolynomial, difference_lift, evaluate_grid, pairing, pullback, tensor
from torusmix.streams import stream_rng

CAT_INV = CAT_MAP.inverse()
TWO_GEN = RandomSystem([CAT_MAP, CAT_INV], [Fraction(3, 4), Fraction(1, 4)])


def _poly(seed, modes=3, freq=2):
    return TrigPolynomial.random_real(2, modes, freq, np.random.default_rng(seed))


def _int_poly(seed, modes=3, freq=2):
    """Real polynomial with integer coefficients, so exact paths compare with ``==``."""
    rng = np.random.default_rng(seed)
    terms = {}
    for _ in range(modes):
        k = tuple(int(v) for v in rng.integers(-freq, freq + 1, 2))
        if any(k):
            c = int(rng.integers(1, 5))
            terms[k] = c
            terms[tuple(-v for v in k)] = c
    return TrigPolynomial(2, terms)


def test_quenched_translation_has_unit_modulus():
    sys = RandomSystem([translation_map([Fraction(1, 5)]), translation_map([Fraction(2, 7)])])
    word = sample_word(sys, 30, 0)
    A, B = TrigPolynomial.character((2,)), TrigPolynomial.character((-2,))
    for n in range(10):
        for k in range(10):
            v = corr.quenched_correlation(A, B, word, n, k)
            assert abs(abs(complex(v)) - 1) < 1e-12


def test_quenched_zero_observable():
    word = sample_word(TWO_GEN, 10, 0)
    zero = TrigPolynomial.zero(2)
    assert all(v == 0 for v in corr.quenched_series(_poly(0), zero, word, range(11)))


def test_quenched_word_too_short():
    word = sample_word(TWO_GEN, 3, 0)
    with pytest.raises(ValueError):
        corr.quenched_correlation(_poly(0), _poly(1), word, 2, 2)


def test_quenched_matches_grid_quadrature():
    A, B = _poly(1), _poly(2)
    word = sample_word(TWO_GEN, 6, 0)
    pts = sample_grid_points(stream_rng(0, 9), 200_000, 2)
    for n, k in [(0, 1), (2, 3), (1, 5)]:
        exact = complex(corr.quenched_correlation(A, B, word, n, k))
        fa = evaluate_grid(A, map_on_grid(word_composition(word, n), pts))
        fb = evaluate_grid(B, map_on_grid(word_composition(word, n + k), pts))
        vals = fa * fb
        se = vals.std() / math.sqrt(len(vals))
        assert abs(vals.mean() - exact) < 4 * se + 1e-12


def test_quenched_series_agrees_with_pointwise_calls():
    A, B = _poly(3), _poly(4)
    word = sample_word(TWO_GEN, 8, 2)
    series = corr.quenched_series(A, B, word, [0, 3, 8])
    assert series == [corr.quenched_correlation(A, B, word, 0, n) for n in (0, 3, 8)]


def test_annealed_three_steps_by_hand():
    A, B = _int_poly(5), _int_poly(6)
    total = 0
    for idx in itertools.product(range(2), repeat=3):
        F = identity_map(2)
        w = 1
        for i in idx:
            F = compose(TWO_GEN.generators[i], F)
            w *= TWO_GEN.probabilities[i]
        total += w * pairing(A, pullback(B, F))
    assert corr.annealed_correlation_exact(A, B, TWO_GEN, 3) == total
    assert corr.annealed_correlation_exact(A, B, TWO_GEN, 3, method="tree") == total


def test_koopman_and_tree_agree():
    sys = RandomSystem([CAT_MAP, CAT_INV, translation_map([Fraction(1, 3), 0])])
    A, B = _int_poly(7), _int_poly(8)
    for N in range(6):
        assert corr.annealed_correlation_exact(A, B, sys, N) == corr.annealed_correlation_exact(
            A, B, sys, N, method="tree")


def test_annealed_zero_steps_is_pairing():
    A, B = _poly(9), _poly(10)
    assert corr.annealed_correlation_exact(A, B, TWO_GEN, 0) == pairing(A, B)


def test_annealed_is_average_of_quenched():
    A, B = _int_poly(11), _int_poly(12)
    N = 4
    avg = 0
    for idx in itertools.product(range(2), repeat=N):
        w = math.prod(TWO_GEN.probabilities[i] for i in idx)
        avg += w * corr.quenched_series(A, B, Word(idx, TWO_GEN), [N])[0]
    assert avg == corr.annealed_correlation_exact(A, B, TWO_GEN, N)


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        corr.annealed_correlation_exact(_poly(0), _poly(1), TWO_GEN, 12, method="tree", budget=100)
    with pytest.raises(BudgetExceeded):
        corr.annealed_correlation_exact(_poly(0), _poly(1), TWO_GEN, 12, budget=20)


def test_grid_translations_cancel_after_one_step():
    q = 12
    sys = RandomSystem([translation_map([Fraction(j, q)]) for j in range(q)])
    for k in (1, 5, 13):
        A, B = TrigPolynomial.character((k,)), TrigPolynomial.character((-k,))
        assert corr.annealed_correlation_exact(A, B, sys, 1) == 0
    A, B = TrigPolynomial.character((q,)), TrigPolynomial.character((-q,))
    assert corr.annealed_correlation_exact(A, B, sys, 1) == 1


def test_mc_matches_exact():
    A, B = _poly(22, 6), _poly(23, 6)
    sys = RandomSystem([CAT_MAP, linear_map([[1, 1], [0, 1]])])
    exact = complex(corr.annealed_correlation_exact(A, B, sys, 6))
    est, se = corr.annealed_correlation_mc(A, B, sys, 6, 10_000, seed=3)
    assert se > 0
    assert abs(est - exact) < 3 * se


def test_mc_deterministic_system_has_zero_stderr():
    sys = RandomSystem([CAT_MAP])
    A, B = _poly(13), _poly(14)
    est, se = corr.annealed_correlation_mc(A, B, sys, 3, 50, seed=0)
    assert se == 0
    assert abs(est - complex(corr.annealed_correlation_exact(A, B, sys, 3))) < 1e-12


def test_mc_stderr_shrinks_like_inverse_sqrt():
    A, B = _poly(22, 6), _poly(23, 6)
    sys = RandomSystem([CAT_MAP, CAT_INV, linear_map([[1, 1], [0, 1]])])
    _, se_small = corr.annealed_correlation_mc(A, B, sys, 3, 400, seed=1)
    _, se_big = corr.annealed_correlation_mc(A, B, sys, 3, 6400, seed=1)
    assert 2 < se_small / se_big < 8


def test_mc_independent_of_thread_count():
    A, B = _poly(15), _poly(16)
    a = corr.annealed_series_mc(A, B, TWO_GEN, [1, 2, 3], 200, seed=5, threads=1)
    b = corr.annealed_series_mc(A, B, TWO_GEN, [1, 2, 3], 200, seed=5, threads=4)
    assert a.values == b.values and a.stderr == b.stderr


def test_sl2_mc_estimates_vanish():
    sys = sl2_system([0.4, 0.1, 0.4, 0.1])
    A, B = TrigPolynomial.character((1, 0)), TrigPolynomial.character((-1, 0))
    series = corr.annealed_series_mc(A, B, sys, [16, 20, 24, 28, 32], 2000, seed=0)
    for v, se in zip(series.values, series.stderr):
        assert abs(v) < 3 * se + 1e-3


def test_sl2_two_point_difference_decays_exponentially():
    sys = sl2_system([0.4, 0.1, 0.4, 0.1])
    D2 = difference_lift(TrigPolynomial.character((1, 0)))
    assert corr.annealed_two_point(D2, D2, sys, 0) == pairing(D2, D2)
    Ns = list(range(2, 15, 2))
    vals = [corr.annealed_two_point(D2, D2, sys, n) for n in Ns]
    cls = rates.classify_decay((Ns, vals))
    assert cls.tag == "exponential" and cls.exponential.rate > 0


def test_two_point_reduces_to_one_point():
    B = _poly(17)
    one = TrigPolynomial.constant(2)
    A2 = tensor(B, one)
    B2 = tensor(B, one)
    for N in range(4):
        assert corr.annealed_two_point(A2, B2, TWO_GEN, N) == corr.annealed_correlation_exact(B, B, TWO_GEN, N)


def test_series_container_invariants():
    with pytest.raises(ValueError):
        corr.CorrelationSeries([1, 2], [0, 0], "annealed-mc")
    with pytest.raises(ValueError):
        corr.CorrelationSeries([1, 2], [0, 0], "quenched", [0.1, 0.1])
    with pytest.raises(ValueError):
        corr.CorrelationSeries([2, 1], [0, 0], "quenched")
    s = corr.CorrelationSeries([1, 4], [1 + 2j, -0.5], "annealed-mc", [0.1, 0.2], {"samples": 10})
    again = corr.CorrelationSeries.from_dict(s.to_dict())
    assert again == s
    assert s.to_csv().splitlines()[1].startswith("1,1.0,2.0,0.1")


def test_step_law_roundtrip_and_validation():
    law = corr.StepLaw([2, -1, 1], [0.2, 0.3, 0.5])
    assert list(law.support) == [-1, 1, 2]
    again = corr.StepLaw.from_dict(law.to_dict())
    assert np.array_equal(again.support, law.support)
    assert np.array_equal(again.probabilities, law.probabilities)
    with pytest.raises(ValueError, match="sum to 1"):
        corr.StepLaw([1, 2], [0.5, 0.4])


def test_heavy_tail_law():
    law = corr.StepLaw.heavy_negative_tail(0.001, 100_000)
    assert abs(law.probabilities.sum() - 1) < 1e-12
    assert law.min_step == -100_000 and law.max_step == 2
    assert abs(law.mean() - 1.4966) < 1e-3


def test_walk_small_cases():
    law = corr.StepLaw.symmetric_simple()
    assert corr.walk_distribution(law, 0).as_dict() == {0: 1.0}
    assert corr.walk_distribution(law, 2).as_dict() == {-2: 0.25, 0: 0.5, 2: 0.25}
    w = corr.walk_distribution(law, 10)
    assert w.prob(0) == pytest.approx(math.comb(10, 5) / 2**10, rel=1e-12)
    assert w.prob(1) == 0.0 and w.prob(100) == 0.0


def test_walk_truncation_loss():
    law = corr.StepLaw.symmetric_simple()
    with pytest.raises(TruncationError):
        corr.walk_distribution(law, 20, truncation=2)
    w = corr.walk_distribution(law, 20, truncation=4, on_loss="warn")
    assert w.loss > 0
    assert abs(w.probs.sum() + w.loss - 1) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(1, 10), min_size=2, max_size=4), st.integers(0, 30))
def test_walk_matches_brute_force(weights, N):
    support = list(range(-1, len(weights) - 1))
    law = corr.StepLaw(support, np.array(weights) / sum(weights))
    w = corr.walk_distribution(law, N, truncation=100)
    p = np.ones(1)
    for _ in range(N):
        p = np.convolve(p, law.probabilities)
    for i, mass in enumerate(p):
        assert abs(w.prob(i - N) - mass) < 1e-12


def test_map_power():
    assert corr.map_power(CAT_MAP, 0) == identity_map(2)
    assert corr.map_power(CAT_MAP, 3) == compose(CAT_MAP, compose(CAT_MAP, CAT_MAP))
    assert corr.map_power(CAT_MAP, -2) == compose(CAT_INV, CAT_INV)


def test_power_hits():
    A, B = TrigPolynomial.character((1, 0)), TrigPolynomial.character((-1, 0))
    assert corr.power_hits(CAT_MAP, A, B, -50, 50) == {0: 1}
    rot = linear_map([[0, -1], [1, 0]])
    assert sorted(corr.power_hits(rot, A, B, -8, 8)) == [-8, -4, 0, 4, 8]
    C = TrigPolynomial.character((-5, -3))
    # (M^T)^3 (1, 0) = (13, 8) for the cat map, so (5, 3) sits at m = 2 via (M^T)^2 (1,0) = (5, 3)
    assert corr.power_hits(CAT_MAP, C, TrigPolynomial.character((1, 0)), -10, 10) == {2: 1}


def test_commuting_matches_exact():
    law = corr.StepLaw([-1, 1, 2], [0.3, 0.5, 0.2])
    A, B = _poly(18), _poly(19)
    series = corr.commuting_annealed_series(CAT_MAP, law, A, B, range(1, 9))
    sys = law.as_system(CAT_MAP)
    for N, v in zip(series.N, series.values):
        assert abs(v - complex(corr.annealed_correlation_exact(A, B, sys, N))) < 1e-12


def test_commuting_zero_steps_is_pairing():
    law = corr.StepLaw([-1, 2], [0.5, 0.5])
    A, B = _poly(24), _poly(25)
    assert corr.commuting_annealed_correlation(CAT_MAP, law, A, B, 0) == pairing(A, B)


def test_commuting_character_pair_is_return_probability():
    law = corr.StepLaw.symmetric_simple()
    A, B = TrigPolynomial.character((1, 0)), TrigPolynomial.character((-1, 0))
    series = corr.commuting_annealed_series(CAT_MAP, law, A, B, [2, 4, 10])
    for N, v in zip(series.N, series.values):
        assert v == pytest.approx(math.comb(N, N // 2) / 2**N, rel=1e-12)


def test_commuting_quenched_matches_word():
    law = corr.StepLaw([-1, 1], [0.5, 0.5])
    steps = corr.sample_steps(law, 12, seed=0)
    sys = law.as_system(CAT_MAP)
    word = Word([0 if s == -1 else 1 for s in steps], sys)
    A, B = _poly(20), _poly(21)
    got = corr.commuting_quenched_series(CAT_MAP, steps, A, B, range(13))
    want = corr.quenched_series(A, B, word, range(13))
    assert all(abs(complex(a) - complex(b)) < 1e-12 for a, b in zip(got, want))


def test_box_and_mixing_constant():
    box = corr.character_box(2, 1)
    assert len(box) == 8 and (0, 0) not in box
    weights = corr.box_hit_weights(CAT_MAP, box, -3, 3, s=0.0)
    # M (1, -1) = (1, 0), so the box also meets itself one step away in each direction
    assert weights == {-1: 1.0, 0: 1.0, 1: 1.0}
    steps = np.array([1, -1, 1, -1, 2])
    # the walk 0,1,0,1,0,2 is last at 0 after 4 steps and last at 1 after 3
    assert corr.commuting_mixing_constant(steps, weights, 0.5) == pytest.approx(math.exp(2.0))


def test_basis_scan_translations_and_cat():
    sys = RandomSystem([translation_map([Fraction(1, 3), Fraction(1, 4)])])
    word = sample_word(sys, 10, 0)
    freqs = [(1, 0), (0, 1), (-1, 0)]
    res = corr.basis_correlation_scan(word, freqs, range(5), range(5))
    assert {round(abs(complex(v)), 12) for v in res.table.values()} == {0.0, 1.0}
    cat = sample_word(RandomSystem([CAT_MAP]), 10, 0)
    res = corr.basis_correlation_scan(cat, [(1, 0), (0, 1)], range(1, 4), range(1, 6), beta=0.5, D=1.0)
    assert all(v == 0 for (i, j, n, k), v in res.table.items() if k >= 1)
    assert res.min_D == 0.0 and res.violations == []


def test_basis_scan_min_d_is_tight():
    word = sample_word(TWO_GEN, 12, 1)
    freqs = corr.character_box(2, 1)
    res = corr.basis_correlation_scan(word, freqs, range(1, 4), range(0, 4), beta=0.3, t=0.5)
    assert res.min_D > 0
    again = corr.basis_correlation_scan(word, freqs, range(1, 4), range(0, 4), beta=0.3, t=0.5, D=res.min_D)
    assert again.violations == []
    tighter = corr.basis_correlation_scan(word, freqs, range(1, 4), range(0, 4), beta=0.3, t=0.5,
                                          D=0.99 * res.min_D)
    assert tighter.violations
