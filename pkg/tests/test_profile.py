import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fluidgame.profile import (
    Curve,
    CurveError,
    JointProfile,
    compose,
    curve_sum,
    generalized_inverse,
    sup_distance,
    support,
)


@st.composite
def monotone_curves(draw, min_knots=2, max_knots=8, jumps=True):
    n = draw(st.integers(min_knots, max_knots))
    gaps = draw(st.lists(st.floats(0.05, 2.0), min_size=n - 1, max_size=n - 1))
    t0 = draw(st.floats(-3.0, 1.0))
    ts = np.concatenate([[t0], t0 + np.cumsum(gaps)])
    inc = st.one_of(st.just(0.0), st.floats(0.01, 2.0))
    incs = draw(st.lists(inc, min_size=n - 1, max_size=n - 1))
    vs = np.concatenate([[0.0], np.cumsum(incs)])
    times, vals = list(ts), list(vs)
    if jumps and draw(st.booleans()):
        k = draw(st.integers(0, n - 1))
        h = draw(st.floats(0.1, 1.0))
        times = list(ts[: k + 1]) + list(ts[k:])
        vals = list(vs[: k + 1]) + list(vs[k:] + h)
    return Curve(times, vals)


def brute_sup_inverse(c, x, lo, hi, n=200001):
    s = np.linspace(lo, hi, n)
    ok = s[c(s) <= x]
    return ok.max() if ok.size else lo


# -- worked examples ----------------------------------------------------------

def test_from_rates_value_at_zero():
    f = Curve.from_rates([(-31 / 12, 0.75, 0.6)])
    assert f(0.0) == pytest.approx(0.6 * 31 / 12, abs=1e-12)
    assert f.total_increase == pytest.approx(2.0, abs=1e-12)


def test_jump_is_right_continuous():
    c = Curve([0.0, 0.0], [0.0, 1.0])
    assert c(0.0) == 1.0
    assert c.eval_left(0.0) == 0.0
    assert c.jumps() == [(0.0, 0.0, 1.0)]
    assert not c.is_continuous()


def test_merges_close_knots_and_rounding_jumps():
    c = Curve([0.0, 1.0, 1.0 + 1e-14, 2.0], [0.0, 1.0, 1.0 + 1e-17, 2.0])
    assert c.is_continuous()
    assert c.t.size == 3


def test_rejects_nonfinite():
    with pytest.raises(CurveError):
        Curve([0.0, np.inf], [0.0, 1.0])


def test_inverse_of_linear_ramp():
    inv = generalized_inverse(Curve([0.0, 1.0], [0.0, 2.0]))
    assert inv(1.0) == pytest.approx(0.5)
    assert inv(2.0) == pytest.approx(1.0)


def test_inverse_turns_flat_into_jump():
    c = Curve([0.0, 1.0, 2.0, 3.0], [0.0, 1.0, 1.0, 2.0])
    inv = generalized_inverse(c)
    assert inv.eval_left(1.0) == pytest.approx(1.0)
    assert inv(1.0) == pytest.approx(2.0)  # sup of the flat


def test_inverse_of_constant_rejected():
    with pytest.raises(CurveError):
        generalized_inverse(Curve.constant(1.0))


def test_compose_of_ramps():
    outer = Curve([0.0, 1.0], [0.0, 0.8])
    inner = Curve([0.0, 2.0], [0.0, 1.0])
    c = compose(outer, inner)
    assert c(1.0) == pytest.approx(0.4)
    assert c(2.0) == pytest.approx(0.8)


def test_support_of_two_pieces():
    f = Curve.from_rates([(-1.5, 0.0, 1.0), (1.0, 1.5, 1.0)])
    s = support(f)
    assert s.intervals == ((-1.5, 0.0), (1.0, 1.5))
    assert s.measure == pytest.approx(2.0)


def test_json_round_trip_with_jump_and_slope():
    c = Curve([-1.0, 0.0, 0.0, 1.0], [0.0, 1.0, 2.0, 3.0], right_slope=0.5)
    back = Curve.from_json(json.loads(json.dumps(c.to_json())))
    assert np.array_equal(back.t, c.t) and np.array_equal(back.v, c.v)
    assert back.right_slope == 0.5


@pytest.mark.parametrize("bad", [None, 3, [{"t": 0}], {"knots": "x"}, [{"t": "a", "v": 1}]])
def test_json_malformed(bad):
    with pytest.raises(CurveError):
        Curve.from_json(bad)


def test_joint_profile_json():
    jp = JointProfile(Curve.from_rates([(0, 1, 1)]), Curve.zero())
    back = JointProfile.from_json(jp.to_json())
    assert back.masses == (1.0, 0.0)


# -- properties ---------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(monotone_curves(), monotone_curves())
def test_sum_is_pointwise(a, b):
    s = curve_sum(a, b)
    ts = np.linspace(-5, 20, 301)
    assert np.allclose(s(ts), a(ts) + b(ts), atol=1e-12)
    assert np.allclose(s.eval_left(ts), a.eval_left(ts) + b.eval_left(ts), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(monotone_curves(jumps=True), monotone_curves(jumps=False))
def test_compose_matches_pointwise(outer, inner):
    c = compose(outer, inner)
    ts = np.linspace(-5, 20, 503)
    assert np.allclose(c(ts), outer(inner(ts)), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(monotone_curves(jumps=True))
def test_inverse_is_sup_of_sublevel_set(c):
    if c.total_increase == 0.0:
        return
    lo, hi = float(c.t[0]), float(c.t[-1])
    inv = generalized_inverse(c, below=lo)
    xs = np.linspace(c.v[0], c.v[-1], 23)[:-1]
    step = (hi - lo) / 200000
    for x in xs:
        assert inv(x) == pytest.approx(brute_sup_inverse(c, x, lo, hi), abs=2 * step + 1e-9)


@settings(max_examples=40, deadline=None)
@given(monotone_curves())
def test_support_carries_all_mass(c):
    s = support(c)
    inside = sum(c(b) - c.eval_left(a) for a, b in s)
    assert inside == pytest.approx(c.total_increase, abs=1e-12)


def test_sup_distance_of_shifted_steps():
    a = Curve.from_steps([0.0], [1.0])
    b = Curve.from_steps([0.01], [1.0])
    assert sup_distance(a, b) == 1.0
