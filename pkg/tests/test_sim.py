import math

import numpy as np
import pytest

from ptnav import sim as sim_mod
from ptnav.dynamics import ObstacleTrack, ShipParams
from ptnav.errors import InvalidArgument
from ptnav.geometry import Vec2
from ptnav.guidance import GuidanceConfig
from ptnav.metrics import metrics
from ptnav.scenario import Scenario, example_static, imazu_case
from ptnav.sim import TRACE_COLUMNS, read_trace, simulate, write_trace


def _free(psi0=0.0, dt=0.05):
    params = ShipParams(12.0, 1.67, 18.0)
    return Scenario("free", Vec2(0, 0), psi0, params, GuidanceConfig.for_ship(params),
                    Vec2(600, 0), [], C_s=50.0, horizon=120.0, dt=dt)


def _same(a, b):
    for f in ("t", "x", "y", "psi", "u", "RI"):
        assert np.array_equal(getattr(a, f), getattr(b, f))
    assert np.array_equal(a.dist, b.dist)
    assert a.mode == b.mode and a.guards == b.guards and a.switch_log == b.switch_log


def test_deterministic():
    sc = imazu_case(5)
    for alg in ("proposed", "vo"):
        _same(simulate(sc, alg), simulate(sc, alg))


def test_obstacle_free_straight_run():
    tr = simulate(_free())
    assert tr.status == "reached"
    assert set(tr.mode) == {"S1"}
    assert np.allclose(tr.y, 0.0) and np.allclose(tr.psi, 0.0)
    m = metrics(tr, [])
    assert m.J3 == 0.0 and m.J4 == 0.0
    assert m.J6 == pytest.approx(12.0 * m.J5, rel=1e-12)


def test_uniform_time_grid():
    tr = simulate(example_static(), "proposed")
    dt = np.diff(tr.t)
    assert np.all(dt > 0)
    assert np.allclose(dt, 0.01, atol=1e-12)
    assert tr.t[-1] == pytest.approx(tr.reach_time)


def test_horizon_status():
    sc = _free()
    sc.horizon = 10.0
    tr = simulate(sc)
    assert tr.status == "horizon" and tr.reach_time is None
    assert len(tr.t) == 201
    m = metrics(tr, [])
    assert not m.reached and m.J5 == 10.0


def test_path_length_matches_speed():
    for sc in (imazu_case(7), example_static()):
        tr = simulate(sc)
        m = metrics(tr, sc.tracks)
        assert m.J6 == pytest.approx(sc.params.v * (tr.t[-1] - tr.t[0]), rel=1e-3)
        assert m.J6 >= math.dist((tr.x[0], tr.y[0]), (tr.x[-1], tr.y[-1]))


def test_j1_matches_brute_force():
    sc = imazu_case(14)
    tr = simulate(sc)
    best = math.inf
    for i in range(len(tr.t)):
        for o in sc.tracks:
            q = o.position(float(tr.t[i]))
            best = min(best, math.hypot(tr.x[i] - q[0], tr.y[i] - q[1]))
    assert metrics(tr, sc.tracks).J1 == best
    assert tr.dist.min() == pytest.approx(best, abs=1e-9)


def test_fault_keeps_last_good_record(monkeypatch):
    real = sim_mod.rk4_step
    calls = {"n": 0}

    def broken(state, u, dt, params):
        calls["n"] += 1
        if calls["n"] == 40:
            return type(state)(Vec2(math.nan, 0.0), state.psi, state.t + dt)
        return real(state, u, dt, params)

    monkeypatch.setattr(sim_mod, "rk4_step", broken)
    tr = simulate(_free())
    assert tr.status == "fault"
    assert len(tr.t) == 40
    assert np.all(np.isfinite(tr.x))


def test_unknown_algorithm():
    with pytest.raises(InvalidArgument):
        simulate(_free(), "rrt")


def test_trace_round_trip(tmp_path):
    tr = simulate(example_static())
    p = tmp_path / "ex.trace.csv"
    write_trace(tr, p)
    assert p.read_text().splitlines()[0].split(",") == TRACE_COLUMNS
    back = read_trace(p)
    for f in ("t", "x", "y", "psi", "u", "RI"):
        assert np.array_equal(getattr(back, f), getattr(tr, f))
    assert np.array_equal(back.dist[:, 0], tr.d_min)
    assert back.mode == tr.mode and back.guards == tr.guards
    assert back.status == tr.status and back.reach_time == tr.reach_time
    assert back.switch_log == [tuple(e) for e in tr.switch_log]
    assert back.boxes == tr.boxes


@pytest.mark.parametrize("text", ["", "a,b,c\n1,2,3\n", ",".join(TRACE_COLUMNS) + "\n",
                                  ",".join(TRACE_COLUMNS) + "\n0,x,0,0,0,S1,1,0,,,,,\n"])
def test_read_trace_rejects_malformed(tmp_path, text):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(InvalidArgument):
        read_trace(p)


def test_example_boxes_recorded_in_world_frame():
    tr = simulate(example_static())
    got = np.asarray(tr.boxes[0]["vertices"])
    assert np.allclose(got, [[150, -50], [250, -50], [250, 50], [150, 50]])


def test_halving_dt_keeps_reach_status():
    for n in range(1, 23):
        sc = imazu_case(n)
        sc.dt = 0.05
        tr = simulate(sc)
        assert tr.reached, n
        assert metrics(tr, sc.tracks).safe, n
