import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ptnav.dynamics import (KNOT, NMI, ObstacleTrack, ShipParams, ShipState, admissible_bound,
                            integrate_predefined_flow, obstacle_position, predefined_flow_exact,
                            predefined_time_flow, rk4_step, ship_derivative)
from ptnav.errors import InfeasibleConstraint, InvalidArgument
from ptnav.geometry import Vec2


def test_units():
    assert NMI == 1852.0
    assert 25 * KNOT == pytest.approx(12.8611, abs=1e-4)


def test_params_validation_and_rate_limit():
    with pytest.raises(InvalidArgument):
        ShipParams(v=0, a=1, m=1)
    p = ShipParams.from_rate_limit(12, 1.67, 1.67 * (math.pi + 18))
    assert p.m == pytest.approx(18)
    assert p.c == pytest.approx(1.67 * (math.pi + 18))
    with pytest.raises(InfeasibleConstraint):
        admissible_bound(1.67 * math.pi, 1.67)


def test_obstacle_motion():
    tr = ObstacleTrack(Vec2(100, 50), math.pi, 10)
    q = obstacle_position(tr, 5)
    assert q[0] == pytest.approx(50)
    assert q[1] == pytest.approx(50)
    with pytest.raises(InvalidArgument):
        obstacle_position(tr, -1)
    with pytest.raises(InvalidArgument):
        ObstacleTrack(Vec2(0, 0), 0, -1)


def test_derivative():
    dx, dy, dpsi = ship_derivative(ShipState(Vec2(0, 0), 0.5), 1.0, ShipParams(10, 2, 5))
    assert (dx, dy) == pytest.approx((10 * math.cos(0.5), 10 * math.sin(0.5)))
    assert dpsi == pytest.approx(2 * (1.0 - 0.5))


def _exact(psi0, u, a, v, t):
    # heading relaxes exponentially; position by fine quadrature of the exact heading
    s = np.linspace(0, t, 200001)
    psi = u + (psi0 - u) * np.exp(-a * s)
    return (np.trapezoid(v * np.cos(psi), s), np.trapezoid(v * np.sin(psi), s),
            u + (psi0 - u) * math.exp(-a * t))


def test_rk4_matches_exact_heading_relaxation():
    params = ShipParams(12, 1.67, 18)
    s = ShipState(Vec2(0, 0), 0.3)
    dt = 0.01
    for _ in range(200):
        s = rk4_step(s, -0.4, dt, params)
    x, y, psi = _exact(0.3, -0.4, 1.67, 12, 2.0)
    assert s.t == pytest.approx(2.0)
    assert s.psi == pytest.approx(psi, abs=1e-9)
    assert s.p[0] == pytest.approx(x, abs=1e-6)
    assert s.p[1] == pytest.approx(y, abs=1e-6)


def test_rk4_fourth_order():
    params = ShipParams(12, 1.67, 18)
    ref = _exact(1.0, -1.0, 1.67, 12, 1.0)

    def err(dt):
        s = ShipState(Vec2(0, 0), 1.0)
        for _ in range(int(round(1 / dt))):
            s = rk4_step(s, -1.0, dt, params)
        return abs(s.psi - ref[2])

    ratio = err(0.1) / err(0.05)
    assert 12 < ratio < 20


@given(st.floats(-3, 3))
def test_rk4_holds_heading_when_u_equals_psi(psi):
    params = ShipParams(5, 1, 10)
    s = rk4_step(ShipState(Vec2(0, 0), psi), psi, 0.1, params)
    assert s.psi == psi
    assert math.hypot(*s.p) == pytest.approx(0.5)


def test_flow_zero_after_tp_and_validation():
    assert predefined_time_flow(3.0, 1.0, 0.0, 1.0, 3.5) == 0.0
    assert predefined_time_flow(0.0, 0.2, 0.0, 1.0, 3.5) == 0.0
    assert predefined_time_flow(1.0, 0.0, 0.0, 1.0, 2.0) == pytest.approx(-2 * (1 - math.exp(-1)))
    with pytest.raises(InvalidArgument):
        predefined_time_flow(1.0, 0.0, 0.0, 1.0, 1.0)


@given(st.floats(-5, 5), st.floats(1.1, 5), st.floats(0.1, 3), st.floats(0, 0.99))
def test_exact_flow_solves_ode(x0, eta, tp, frac):
    t = frac * tp
    h = 1e-6 * tp
    x = predefined_flow_exact(x0, t, 0, tp, eta)
    deriv = (predefined_flow_exact(x0, t + h, 0, tp, eta)
             - predefined_flow_exact(x0, t - h, 0, tp, eta)) / (2 * h) if t > h else None
    if deriv is not None:
        assert deriv == pytest.approx(predefined_time_flow(x, t, 0, tp, eta), rel=1e-4, abs=1e-6)
    assert predefined_flow_exact(x0, tp, 0, tp, eta) == 0.0


def test_implicit_flow_converges_first_order():
    errs = []
    for dt in (1e-2, 5e-3):
        t, x = integrate_predefined_flow(1.0, 0, 1, 3.5, dt)
        ex = np.array([predefined_flow_exact(1.0, ti, 0, 1, 3.5) for ti in t])
        errs.append(np.abs(x - ex).max())
    assert 1.6 < errs[0] / errs[1] < 2.4


@given(st.floats(-10, 10), st.floats(1.1, 4), st.floats(0.2, 2))
def test_implicit_flow_monotone_and_exact_at_tp(x0, eta, tp):
    t, x = integrate_predefined_flow(x0, 0, tp, eta, tp / 500)
    assert x[-1] == 0.0
    assert np.all(np.diff(np.abs(x)) <= 0)
    assert np.all(np.sign(x[:-1]) * np.sign(x0) >= 0)
