import math
import random

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from pwaffine.core import (
    InconsistentItineraryError,
    OutsideImageError,
    ParameterError,
    validate_params,
)
from pwaffine.dynamics import (
    f_apply,
    f_inverse,
    f_left,
    find_periodic_orbit,
    forward_orbit,
    iter_orbit,
    lift_F,
    orbit_closed_form,
)

HALF_PARAMS = validate_params(0.5, 0.5, 0.75)
GRID = [
    validate_params(0.5, 0.5, 0.75),
    validate_params(0.9, 0.8, 0.5),
    validate_params(0.95, 0.9, 0.6617),
    validate_params(0.9, 2.0, 0.15),
    validate_params(0.3, 1.5, 0.8),
]

params_st = st.sampled_from(GRID)


def test_f_values_half_parameters():
    assert f_apply(HALF_PARAMS, 0.0) == 0.75
    assert f_apply(HALF_PARAMS, 0.5) == 0.0
    assert f_left(HALF_PARAMS, 1.0) == 0.125
    assert f_left(HALF_PARAMS, HALF_PARAMS.eta) == 1.0


def test_domains():
    with pytest.raises(ParameterError):
        f_apply(HALF_PARAMS, 1.0)
    with pytest.raises(ParameterError):
        f_left(HALF_PARAMS, 0.0)
    with pytest.raises(ParameterError):
        f_inverse(HALF_PARAMS, -0.1)


@given(params_st, st.floats(0.0, 1.0, exclude_max=True, exclude_min=True))
def test_f_left_agrees_off_eta(p, x):
    assume(x != p.eta)
    assert f_left(p, x) == f_apply(p, x)


def test_lift_half_parameters():
    assert lift_F(HALF_PARAMS, 0.0) == 0.75
    assert lift_F(HALF_PARAMS, -1.0) == -0.25


@given(params_st, st.floats(-50, 50))
def test_lift_equivariance(p, x):
    frac = x - math.floor(x)
    assume(frac < 1)
    y = lift_F(p, x)
    assert (y - math.floor(y)) == pytest.approx(f_apply(p, frac) % 1.0, abs=1e-12)
    assert lift_F(p, x + 1) == pytest.approx(y + 1, abs=1e-12)


@given(params_st, st.floats(-20, 20), st.floats(1e-9, 3))
def test_lift_monotone(p, x, h):
    assert lift_F(p, x) <= lift_F(p, x + h) + 1e-12


def test_left_lift_on_integers():
    for n in (-2, 0, 3):
        assert lift_F(HALF_PARAMS, float(n), "left-limit") == pytest.approx(
            lift_F(HALF_PARAMS, float(n)) - HALF_PARAMS.delta + HALF_PARAMS.hole_left
        )
    assert lift_F(HALF_PARAMS, 0.3, "left-limit") == lift_F(HALF_PARAMS, 0.3)


@given(params_st, st.floats(0.0, 1.0 - 1e-9))
def test_inverse_round_trip(p, y):
    assume(abs(y - p.eta) > 1e-9)
    assert f_inverse(p, f_apply(p, y)) == pytest.approx(y, abs=1e-14 / p.lam / min(1, p.mu))


def test_inverse_hole():
    assert f_inverse(HALF_PARAMS, 0.75) == 0.0
    with pytest.raises(OutsideImageError):
        f_inverse(HALF_PARAMS, 0.5)


@given(params_st, st.lists(st.floats(0, 1 - 1e-9), min_size=2, max_size=30, unique=True))
def test_image_misses_the_hole_and_is_injective(p, xs):
    xs = sorted(xs)
    assume(all(b - a > 1e-9 for a, b in zip(xs, xs[1:])))
    ys = [f_apply(p, x) for x in xs]
    assert len(set(ys)) == len(ys)
    for y in ys:
        assert not (p.hole_left + 1e-12 < y < p.delta - 1e-12)


def test_forward_orbit_hand_iterated():
    tr = forward_orbit(HALF_PARAMS, 0.0, 4)
    assert list(tr.points[:3]) == [0.0, 0.75, 1.0625]
    assert tr.itinerary.sum() == math.floor(tr.points[-1]) - math.floor(tr.points[0])


def test_orbit_invariants():
    rng = random.Random(3)
    for p in GRID:
        tr = forward_orbit(p, rng.uniform(-5, 5), 500)
        assert set(np.unique(tr.itinerary)) <= {0, 1}
        assert ((tr.fracs >= 0) & (tr.fracs < 1)).all()
        assert np.all(np.diff(tr.floors) == tr.itinerary)


def test_orbit_matches_iter_orbit():
    p = GRID[2]
    it = iter_orbit(p, 0.3)
    tr = forward_orbit(p, 0.3, 50)
    for k in range(51):
        n, t = next(it)
        assert n + t == tr.points[k]


def test_streamed_orbit_keeps_itinerary():
    tr = forward_orbit(HALF_PARAMS, 0.0, 1000, keep_points=False)
    assert tr.n == 1000 and tr.floors is None
    with pytest.raises(ValueError):
        tr.points
    assert tr.rotation_estimate() == 0.5


def test_rational_itinerary_eventually_periodic():
    tr = forward_orbit(HALF_PARAMS, 0.37, 400)
    tail = tr.itinerary[-40:]
    assert tail.sum() == 20
    assert np.array_equal(tail[:-2], tail[2:])


def test_closed_form_matches_iteration_on_grid():
    rng = random.Random(11)
    for p in GRID:
        for _ in range(20):
            x = rng.uniform(-3, 3)
            tr = forward_orbit(p, x, 100)
            for l, n in [(0, 0), (0, 37), (5, 50), (20, 80)]:
                assert orbit_closed_form(p, x, tr.itinerary, l, n) == pytest.approx(tr.points[l + n], abs=1e-10)


def test_closed_form_n_zero_returns_x_l():
    tr = forward_orbit(HALF_PARAMS, 0.2, 10)
    assert orbit_closed_form(HALF_PARAMS, 0.2, tr.itinerary, 4, 0) == pytest.approx(tr.points[4], abs=1e-14)


def test_closed_form_constant_zero_itinerary():
    # below eta every step is affine with fixed point delta/(1-lam)
    p = validate_params(0.9, 0.8, 0.12)
    x = 0.0
    tr = forward_orbit(p, x, 6)
    assert tr.itinerary.sum() == 0
    fixed = p.delta / (1 - p.lam)
    for n in range(7):
        expected = p.lam ** n * (x - fixed) + fixed
        assert orbit_closed_form(p, x, tr.itinerary, 0, n) == pytest.approx(expected, abs=1e-13)


def test_closed_form_detects_wrong_itinerary():
    tr = forward_orbit(HALF_PARAMS, 0.1, 20)
    bad = 1 - tr.itinerary
    with pytest.raises(InconsistentItineraryError):
        orbit_closed_form(HALF_PARAMS, 0.1, bad, 0, 20)
    with pytest.raises(InconsistentItineraryError):
        orbit_closed_form(HALF_PARAMS, 0.1, [0, 2], 0, 2)
    with pytest.raises(ParameterError):
        orbit_closed_form(HALF_PARAMS, 0.1, tr.itinerary, 15, 10)


def test_periodic_orbit_search():
    cyc = find_periodic_orbit(HALF_PARAMS, 0.3)
    assert cyc == pytest.approx([1 / 14, 11 / 14], abs=1e-12)
    right = validate_params(0.5, 0.5, 0.9)
    assert find_periodic_orbit(right, 0.0) is None
    assert find_periodic_orbit(right, 1.0, left=True) == pytest.approx([0.2, 1.0], abs=1e-12)
