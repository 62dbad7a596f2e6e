import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gic.channel import ChannelParams, Regime
from gic.corners import (
    corner_points,
    costa_corner,
    region_boundary,
    sato_corner,
    single_user_capacity,
    strong_corners,
)
from gic.errors import DegenerateChannelError, ParameterError, RegimeError
from oracles import FROZEN, corner_oracle

powers = st.floats(1e-3, 1e3)


def test_weak_unit_example():
    cp = corner_points(ChannelParams(1, 1, 1, 0.5))
    assert cp.regime is Regime.WEAK
    assert cp.c1_prime == pytest.approx(FROZEN["weak_unit_c1_prime"], rel=1e-14)
    assert cp.c2_prime == pytest.approx(FROZEN["weak_unit_c2_prime"], rel=1e-14)
    assert cp.c1 == pytest.approx(0.5 * math.log(2), rel=1e-15)


def test_strong_corners_sit_on_sum_rate_line():
    cp = strong_corners(ChannelParams(1, 1, 1, 1.5))
    assert cp.c1_prime + cp.c2 == pytest.approx(cp.sum_rate, rel=1e-14)
    assert cp.c1 + cp.c2_prime == pytest.approx(cp.sum_rate, rel=1e-14)
    assert cp.sum_rate == pytest.approx(0.5 * math.log(3.5), rel=1e-14)


def test_very_strong_is_rectangle():
    cp = corner_points(ChannelParams(1, 1, 1, 5))
    assert (cp.c1_prime, cp.c2_prime) == (cp.c1, cp.c2)
    assert cp.sum_rate == cp.c1 + cp.c2


def test_no_interference():
    cp = corner_points(ChannelParams(2, 3, 1, 0))
    assert cp.regime is Regime.NO_INTERFERENCE
    assert (cp.c1_prime, cp.c2_prime) == (cp.c1, cp.c2)
    with pytest.raises(DegenerateChannelError):
        costa_corner(ChannelParams(2, 3, 1, 0))


def test_regime_guards():
    with pytest.raises(RegimeError):
        strong_corners(ChannelParams(1, 1, 1, 0.5))
    with pytest.raises(RegimeError):
        sato_corner(ChannelParams(1, 1, 1, 1.5))
    with pytest.raises(ParameterError):
        corner_points(ChannelParams(1, 1, 1, 0.5, b=0.1))


def test_single_user_capacity_rejects_bad_input():
    with pytest.raises(ValueError):
        single_user_capacity(0, 1)
    assert single_user_capacity(1e-20, 1) == pytest.approx(5e-21, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(powers, powers, powers, st.floats(0, 20))
def test_matches_oracle(p1, p2, n, a):
    regime, *vals = corner_oracle(p1, p2, n, a)
    cp = corner_points(ChannelParams(p1, p2, n, a))
    assert cp.regime.value == regime
    for got, want in zip((cp.c1, cp.c2, cp.c1_prime, cp.c2_prime), vals):
        assert abs(got - float(want)) <= 1e-12 * abs(float(want)) + 1e-300


@settings(max_examples=200, deadline=None)
@given(powers, powers, powers, st.floats(0, 20), st.floats(1e-3, 1e3))
def test_invariant_under_joint_power_scaling(p1, p2, n, a, lam):
    base = corner_points(ChannelParams(p1, p2, n, a))
    scaled = corner_points(ChannelParams(p1, p2, n, a).scaled(lam))
    assert scaled.regime == base.regime or abs(a - (1 + p2 / n)) < 1e-9 * a
    if scaled.regime == base.regime:
        for f in ("c1", "c2", "c1_prime", "c2_prime"):
            assert getattr(scaled, f) == pytest.approx(getattr(base, f), rel=1e-9, abs=1e-300)


@settings(max_examples=200, deadline=None)
@given(powers, powers, powers, st.floats(0, 20))
def test_primed_rates_never_exceed_single_user(p1, p2, n, a):
    cp = corner_points(ChannelParams(p1, p2, n, a))
    assert cp.c1_prime <= cp.c1 * (1 + 1e-14)
    assert cp.c2_prime <= cp.c2 * (1 + 1e-14)
    assert cp.c1_prime >= 0 and cp.c2_prime >= 0


@settings(max_examples=100, deadline=None)
@given(powers, powers, powers)
def test_continuity_at_regime_boundaries(p1, p2, n):
    at_one = ChannelParams(p1, p2, n, 1.0)
    s = strong_corners(at_one, enforce_regime=False)
    assert s.c1_prime == pytest.approx(costa_corner(at_one, enforce_regime=False), rel=1e-12)
    assert s.c2_prime == pytest.approx(sato_corner(at_one, enforce_regime=False), rel=1e-12)
    top = ChannelParams(p1, p2, n, 1 + p2 / n)
    s = strong_corners(top, enforce_regime=False)
    assert s.c2_prime == pytest.approx(s.c2, rel=1e-12)


def test_units_bits():
    p = ChannelParams(1, 1, 1, 0.5)
    nats = corner_points(p).to_dict("nats")
    bits = corner_points(p).to_dict("bits")
    for f in ("c1", "c2", "c1_prime", "c2_prime"):
        assert bits[f] == pytest.approx(nats[f] / math.log(2), rel=1e-15)
    with pytest.raises(ValueError):
        corner_points(p).to_dict("hartleys")


def test_region_rows():
    strong = region_boundary(ChannelParams(1, 1, 1, 1.5)).rows()
    assert len(strong) == 4 and all(r[2] for r in strong)
    weak = region_boundary(ChannelParams(1, 1, 1, 0.5)).rows()
    assert [r[2] for r in weak] == [True, False, True, True]
    vs = region_boundary(ChannelParams(1, 1, 1, 5)).rows()
    # the two corners coincide: a rectangle
    assert vs[1][:2] == vs[2][:2]
    r1 = [r[0] for r in weak]
    r2 = [r[1] for r in weak]
    assert np.all(np.diff(r1) >= 0) and np.all(np.diff(r2) <= 0)
