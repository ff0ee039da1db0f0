from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torusmix.dynamics import (
    CAT_MAP,
    AffineToralMap,
    GridStepper,
    RandomSystem,
    Word,
    apply_map,
    compose,
    diagonal_lift,
    float_to_grid,
    grid_to_float,
    identity_map,
    iter_compositions,
    linear_map,
    map_on_grid,
    sample_grid_points,
    sample_word,
    shift_word,
    translation_map,
    word_composition,
)
from torusmix.streams import stream_rng

SL2 = [CAT_MAP, CAT_MAP.inverse(), linear_map([[1, 1], [0, 1]]), linear_map([[1, 0], [1, 1]])]


def affine_maps():
    mats = st.sampled_from(SL2)
    tr = st.tuples(st.fractions(0, 1, max_denominator=12), st.fractions(0, 1, max_denominator=12))
    return st.builds(lambda m, t: AffineToralMap(m.matrix, t), mats, tr)


def test_compose_examples():
    assert compose(identity_map(2), CAT_MAP) == CAT_MAP
    assert compose(CAT_MAP, CAT_MAP).matrix == ((5, 3), (3, 2))
    assert CAT_MAP.inverse().matrix == ((1, -1), (-1, 2))
    assert compose(CAT_MAP, CAT_MAP.inverse()) == identity_map(2)


def test_non_unimodular_rejected():
    with pytest.raises(ValueError, match="unimodular"):
        AffineToralMap([[2, 0], [0, 1]])


def test_apply_examples():
    assert apply_map(identity_map(2), [Fraction(1, 4), Fraction(1, 2)]) == (Fraction(1, 4), Fraction(1, 2))
    assert apply_map(CAT_MAP, [Fraction(1, 2), Fraction(1, 2)]) == (Fraction(1, 2), Fraction(0))
    out = apply_map(translation_map([0.3]), np.array([0.9]))
    assert abs(out[0] - 0.2) < 1e-12


@settings(max_examples=40, deadline=None)
@given(affine_maps(), affine_maps())
def test_compose_matches_application(f, g):
    x = (Fraction(1, 7), Fraction(3, 11))
    assert apply_map(compose(f, g), x) == apply_map(f, apply_map(g, x))


@settings(max_examples=40, deadline=None)
@given(affine_maps())
def test_inverse_roundtrip(f):
    assert compose(f, f.inverse()) == identity_map(2)
    assert compose(f.inverse(), f) == identity_map(2)


def test_sample_word_examples():
    sys1 = RandomSystem([CAT_MAP])
    assert len(sample_word(sys1, 0, 0)) == 0
    assert sample_word(sys1, 5, 0).indices == (0,) * 5
    sys2 = RandomSystem([CAT_MAP, CAT_MAP.inverse()], [Fraction(1, 2), Fraction(1, 2)])
    w = sample_word(sys2, 10_000, 3)
    assert abs(np.mean(np.array(w.indices) == 0) - 0.5) < 0.02
    assert sample_word(sys2, 50, 3, 7).indices == sample_word(sys2, 50, 3, 7).indices
    assert sample_word(sys2, 50, 3, 7).indices != sample_word(sys2, 50, 3, 8).indices


def test_probabilities_must_sum_to_one():
    with pytest.raises(ValueError, match="sum to 1"):
        RandomSystem([CAT_MAP, CAT_MAP.inverse()], [0.5, 0.4])


def test_word_composition_order():
    a, b = translation_map([Fraction(1, 3)]), linear_map([[-1]])
    sys = RandomSystem([a, b])
    w = Word([0, 1], sys)
    assert word_composition(w, 0) == identity_map(1)
    assert word_composition(w, 1) == a
    assert word_composition(w, 2) == compose(b, a)
    comps = list(iter_compositions(w))
    assert comps == [word_composition(w, n) for n in range(3)]


def test_shift_word():
    sys = RandomSystem([CAT_MAP, CAT_MAP.inverse()])
    w = Word([0, 1, 0], sys)
    assert shift_word(w, 0).indices == (0, 1, 0)
    assert shift_word(w, 3).indices == ()
    assert shift_word(w, 1).indices == (1, 0)


def test_diagonal_lift():
    assert diagonal_lift(identity_map(1)) == identity_map(2)
    lifted = diagonal_lift(CAT_MAP)
    assert lifted.matrix == ((2, 1, 0, 0), (1, 1, 0, 0), (0, 0, 2, 1), (0, 0, 1, 1))
    rng = np.random.default_rng(0)
    xy = rng.random((50, 4))
    out = apply_map(lifted, xy)
    assert np.allclose(out[:, :2], apply_map(CAT_MAP, xy[:, :2]), atol=1e-12)
    assert np.allclose(out[:, 2:], apply_map(CAT_MAP, xy[:, 2:]), atol=1e-12)


def test_system_serialization_roundtrip():
    sys = RandomSystem([CAT_MAP, translation_map([Fraction(1, 3), 0.25])], [Fraction(1, 3), Fraction(2, 3)])
    again = RandomSystem.from_json(sys.to_json())
    assert again.generators == sys.generators and again.probabilities == sys.probabilities


def test_grid_arithmetic_is_exact():
    rng = stream_rng(0, 1)
    pts = sample_grid_points(rng, 1000, 2)
    f = AffineToralMap(CAT_MAP.matrix, [Fraction(1, 4), Fraction(3, 8)])
    img = map_on_grid(f, pts)
    assert np.all(map_on_grid(f.inverse(), img) == pts)
    assert np.allclose(grid_to_float(img), apply_map(f, grid_to_float(pts)), atol=1e-12)
    # floats carry 53 bits, so only float-representable grid points round-trip
    coarse = float_to_grid(grid_to_float(pts))
    assert np.all(float_to_grid(grid_to_float(coarse)) == coarse)


def test_grid_stepper_uses_per_point_choice():
    sys = RandomSystem([CAT_MAP, CAT_MAP.inverse()])
    pts = sample_grid_points(stream_rng(0, 2), 10, 2)
    choices = np.array([0, 1] * 5)
    out = GridStepper(sys).step(pts, choices)
    assert np.all(out[0::2] == map_on_grid(CAT_MAP, pts[0::2]))
    assert np.all(out[1::2] == map_on_grid(CAT_MAP.inverse(), pts[1::2]))
