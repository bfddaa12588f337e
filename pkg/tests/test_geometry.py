import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fsrr.geometry import (
    Dec,
    Position,
    dec_build,
    dist_to_nearest_point,
    distance,
    forward_eligible,
)

from oracles import brute_nearest_on_circle

coord = st.floats(0, 500, allow_nan=False)
pos = st.builds(Position, coord, coord)


@pytest.mark.parametrize(
    "p, q, expected",
    [((0, 0), (0, 0), 0.0), ((0, 0), (3, 4), 5.0), ((1.5, 2.0), (4.5, 6.0), 5.0)],
)
def test_distance(p, q, expected):
    assert distance(Position(*p), Position(*q)) == expected


@given(pos, pos)
def test_distance_symmetric_nonnegative(p, q):
    assert distance(p, q) == distance(q, p) >= 0


def test_dec_build_formula():
    dec = dec_build(Position(100, 100), v_max_d=10, tau=30, t1=15, ts=5)
    assert dec.center == Position(100, 100)
    assert dec.radius == 200
    assert not dec.expired


def test_dec_build_static_destination():
    assert dec_build(Position(1, 1), 0, 30, 12, 4).radius == 0


def test_dec_build_zero_budget_boundary():
    dec = dec_build(Position(0, 0), 10, tau=10, t1=20, ts=10)
    assert dec.radius == 0
    assert not dec.expired


def test_dec_build_negative_budget_is_expired():
    dec = dec_build(Position(0, 0), 10, tau=5, t1=20, ts=10)
    assert dec.expired and dec.radius == 0


@given(st.floats(0, 50), st.floats(0, 60), st.floats(0, 30), st.floats(0, 30), st.floats(0, 30))
def test_dec_radius_monotone_in_age_and_linear_in_speed(v, tau, ts, a1, a2):
    lo, hi = sorted((a1, a2))
    r_young = dec_build(Position(0, 0), v, tau, ts + lo, ts).radius
    r_old = dec_build(Position(0, 0), v, tau, ts + hi, ts).radius
    assert r_old <= r_young
    doubled = dec_build(Position(0, 0), 2 * v, tau, ts + lo, ts).radius
    assert doubled == pytest.approx(2 * r_young)


@pytest.mark.parametrize(
    "p, center, radius, expected",
    [((0, 0), (10, 0), 10, 0.0), ((0, 0), (30, 40), 20, 30.0), ((5, 5), (0, 0), 20, 0.0)],
)
def test_dist_to_nearest_point(p, center, radius, expected):
    assert dist_to_nearest_point(Position(*p), Dec(Position(*center), radius)) == expected


def test_dist_to_nearest_point_matches_sampling():
    rng = np.random.default_rng(7)
    n = 2000
    px, py, cx, cy = rng.uniform(0, 500, (4, n))
    r = rng.uniform(0, 200, n)
    got = np.array([
        dist_to_nearest_point(Position(a, b), Dec(Position(c, d), e))
        for a, b, c, d, e in zip(px, py, cx, cy, r)
    ])
    outside = np.hypot(px - cx, py - cy) > r
    brute = brute_nearest_on_circle(px[outside], py[outside], cx[outside], cy[outside], r[outside])
    np.testing.assert_allclose(got[outside], brute, atol=1e-6)
    assert np.all(got[~outside] == 0)


def test_forward_eligible_radio_speed_always_reaches():
    dec = Dec(Position(490, 490), 5)
    assert forward_eligible(Position(0, 0), dec, 3e8, tau=2, t1=1, ts=0)


def test_forward_eligible_zero_budget_outside():
    dec = Dec(Position(100, 0), 10)
    assert not forward_eligible(Position(0, 0), dec, v_s=10, tau=10, t1=20, ts=10)


def test_forward_eligible_boundary_inclusive():
    # reach 10 * 5 = 50; the neighbour is 80 - 30 = 50 m from the circle
    dec = Dec(Position(0, 0), 30)
    assert forward_eligible(Position(80, 0), dec, v_s=10, tau=15, t1=20, ts=10)
    assert not forward_eligible(Position(80.001, 0), dec, v_s=10, tau=15, t1=20, ts=10)


@given(
    pos, pos, st.floats(0, 200), st.floats(0.1, 100), st.floats(0, 20),
    st.floats(0, 20), st.floats(0, 5), st.floats(0, 10),
)
def test_forward_eligible_monotone(nb, center, radius, v_s, tau, age, d_vs, d_tau):
    dec = Dec(center, radius)
    before = forward_eligible(nb, dec, v_s, tau, age, 0.0)
    if before:
        assert forward_eligible(nb, dec, v_s + d_vs, tau, age, 0.0)
        assert forward_eligible(nb, dec, v_s, tau + d_tau, age, 0.0)
        assert forward_eligible(nb, dec, v_s, tau, max(0.0, age - d_tau), 0.0)
        # moving the neighbour straight toward the centre shrinks its gap
        gap = distance(nb, center)
        if gap > 0:
            k = 0.5
            closer = Position(center.x + (nb.x - center.x) * k, center.y + (nb.y - center.y) * k)
            assert forward_eligible(closer, dec, v_s, tau, age, 0.0)


def test_forward_eligible_matches_inequality():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        nb = Position(*rng.uniform(0, 300, 2))
        dec = Dec(Position(*rng.uniform(0, 300, 2)), rng.uniform(0, 100))
        v_s, tau, t1, ts = rng.uniform(0.1, 40), rng.uniform(0, 10), rng.uniform(0, 20), rng.uniform(0, 20)
        reach = v_s * max(0.0, tau - (t1 - ts))
        gap = max(0.0, math.hypot(nb.x - dec.center.x, nb.y - dec.center.y) - dec.radius)
        assert forward_eligible(nb, dec, v_s, tau, t1, ts) == (reach >= gap)
