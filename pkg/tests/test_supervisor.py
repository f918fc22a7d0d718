import math

import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st

from ptnav.dynamics import ObstacleTrack, ShipParams
from ptnav.errors import InconsistentState, InvalidArgument
from ptnav.geometry import (Box, Vec2, obstacle_reach_region, regions_intersect,
                            ship_reach_region)
from ptnav.guidance import GuidanceConfig
from ptnav.risk import cpa
from ptnav.scenario import Scenario, example_static
from ptnav.sim import simulate
from ptnav.supervisor import (LEGAL_EDGES, S1, S2, S3, Supervisor, SupervisorConfig,
                              cluster_static, dynamic_unsafe_box, guards,
                              multi_dynamic_unsafe_box, parallel_stall, static_unsafe_box,
                              supervisor_step, virtual_waypoint)

P12 = ShipParams(12.0, 1.67, 18.0)


def test_static_box_example():
    ub = static_unsafe_box((200, 0), 50, 12)
    assert ub.vertices == [(150, -50), (250, -50), (250, 50), (150, 50)]
    assert ub.d_safe == 62
    with pytest.raises(InvalidArgument):
        static_unsafe_box((0, 0), 0)


def test_cluster_two_close():
    (ub,) = cluster_static([(0, 0), (50, 0)], 50, 62)
    assert ub.box.center == (25, 0)
    assert (ub.box.half_x, ub.box.half_y) == (75, 50)
    assert ub.members == ("s0", "s1")


def test_cluster_far_and_single():
    assert len(cluster_static([(0, 0), (300, 0)], 50, 62)) == 2
    (one,) = cluster_static([(200, 0)], 50, 62)
    ref = static_unsafe_box((200, 0), 50, 12)
    assert one.box == ref.box and one.d_safe == ref.d_safe


def test_cluster_transitive():
    boxes = cluster_static([(0, 0), (100, 0), (200, 0)], 50, 62)
    assert len(boxes) == 1
    assert boxes[0].box.center == (100, 0)


def _brute_cpa_time(track, v, t_hi=200.0, pitch=1e-3):
    t = np.arange(0, t_hi, pitch)
    vx, vy = track.velocity
    d = np.hypot(v * t - (track.p0[0] + vx * t), -(track.p0[1] + vy * t))
    return t[int(d.argmin())]


def test_dynamic_box_crossing_against_brute_force():
    tr = ObstacleTrack(Vec2(300, 150), -math.pi / 2, 5)
    ub = dynamic_unsafe_box((0, 0), 0.0, P12, tr, 50, 0.0, 1.0, "standard")
    tc = _brute_cpa_time(tr, 12.0)
    pmc = tr.position(tc)
    assert ub.box.center[0] == pytest.approx(pmc[0], abs=5e-3)
    assert ub.box.center[1] == pytest.approx(pmc[1], abs=5e-3)
    assert ub.box.half_x == pytest.approx(abs(300 - pmc[0]) + 50, abs=5e-3)
    assert ub.box.half_y == pytest.approx(abs(150 - pmc[1]) + 50, abs=5e-3)


def test_dynamic_box_range_form_center():
    tr = ObstacleTrack(Vec2(300, 150), -math.pi / 2, 5)
    ub = dynamic_unsafe_box((0, 0), 0.0, P12, tr, 50, 0.0, 1.0)
    tc = math.hypot(300, 150) / math.hypot(12, 5)
    assert ub.box.center == pytest.approx((300, 150 - 5 * tc))


def test_dynamic_box_d_safe_formula():
    tr = ObstacleTrack(Vec2(300, 150), -math.pi / 2, 5)
    ub = dynamic_unsafe_box((0, 0), 0.0, P12, tr, 50, 0.0, 1.0)
    D = math.dist((300, 150), ub.box.center)
    d2 = math.sqrt(((D / 5 - 1) * 12) ** 2 - ub.box.half_y ** 2)
    assert ub.d_safe == pytest.approx(d2 + ub.box.half_x + 12)


def test_dynamic_box_negative_radicand_falls_back():
    tr = ObstacleTrack(Vec2(100, 30), -math.pi / 2, 20)
    ub = dynamic_unsafe_box((0, 0), 0.0, P12, tr, 50, 0.0, 1.0)
    assert ub.diagnostics == ("negative d2 radicand",)
    assert ub.d_safe == pytest.approx(math.dist((0, 0), ub.box.center))


def test_static_track_reduces_to_static_box():
    tr = ObstacleTrack(Vec2(200, 0), 0.0, 0.0, "s")
    ub = dynamic_unsafe_box((0, 0), 0.0, P12, tr, 50, 0.0, 1.0)
    assert ub.box == static_unsafe_box((200, 0), 50).box


@given(st.floats(-500, 500), st.floats(-500, 500), st.floats(-math.pi, math.pi),
       st.floats(0.5, 10), st.floats(-math.pi, math.pi))
def test_dynamic_box_contains_obstacle_and_anchor(x, y, psi_m, v_o, psi):
    tr = ObstacleTrack(Vec2(x, y), psi_m, v_o)
    try:
        ub = dynamic_unsafe_box((0, 0), psi, P12, tr, 20, 0.0, 1.0)
    except Exception as exc:  # only co-moving geometries may fail
        assert type(exc).__name__ == "NoRelativeMotion"
        return
    assert ub.box.contains((x, y))
    assert ub.box.contains(ub.cpa_anchor)
    assert ub.box.half_x >= 20 and ub.box.half_y >= 20


def test_multi_with_one_track_matches_single():
    tr = ObstacleTrack(Vec2(300, 150), -math.pi / 2, 5, "a")
    single = dynamic_unsafe_box((0, 0), 0.0, P12, tr, 50, 0.0, 1.0)
    multi = multi_dynamic_unsafe_box((0, 0), 0.0, P12, [tr], 50, 0.0, 1.0)
    assert multi.box == single.box
    assert multi.d_safe == single.d_safe
    assert multi.members == ("a",)


def test_multi_far_separated_only_anchor():
    near = ObstacleTrack(Vec2(300, 40), math.pi, 5, "near")
    far = ObstacleTrack(Vec2(3000, 2500), -math.pi / 2, 5, "far")
    ub = multi_dynamic_unsafe_box((0, 0), 0.0, P12, [near, far], 50, 0.0, 1.0)
    # far track fails all four tests: check them directly
    D_sf = 50 + 12
    c_far = cpa((0, 0), 0.0, 12, far, 0.0)
    c_near = cpa((0, 0), 0.0, 12, near, 0.0)
    assert math.dist((0, 0), far.p0) >= D_sf
    assert math.dist(near.p0, far.p0) > 2 * D_sf
    assert math.dist((0, 0), c_far.p_cpa) >= D_sf
    assert math.dist((12 * c_near.tcpa, 0), far.position(c_near.tcpa)) >= D_sf
    assert ub.members == ("near",)


def test_multi_three_tracks_box_extents():
    # three tracks packed together; the one crossing nearest the ship anchors the box
    t1 = ObstacleTrack(Vec2(150, 60), math.pi, 2, "o1")
    t2 = ObstacleTrack(Vec2(120, -70), math.pi / 2, 2, "o2")
    t3 = ObstacleTrack(Vec2(70, 10), -math.pi / 2, 3, "o3")
    tracks = [t1, t2, t3]
    ub = multi_dynamic_unsafe_box((0, 0), 0.0, P12, tracks, 50, 0.0, 1.0)
    cs = {t.id: cpa((0, 0), 0.0, 12, t, 0.0) for t in tracks}
    anchor = min(cs, key=lambda k: math.dist((0, 0), cs[k].p_cpa))
    pmc = cs[anchor].p_cpa
    assert ub.cpa_anchor == pmc
    assert set(ub.members) == {"o1", "o2", "o3"}
    assert ub.box.half_x == pytest.approx(max(abs(t.p0[0] - pmc[0]) for t in tracks) + 50)
    assert ub.box.half_y == pytest.approx(max(abs(t.p0[1] - pmc[1]) for t in tracks) + 50)


def test_multi_empty_when_nothing_approaches():
    rec = ObstacleTrack(Vec2(-300, 0), math.pi, 5)
    assert multi_dynamic_unsafe_box((0, 0), 0.0, P12, [rec], 50, 0.0, 1.0) is None


def test_virtual_waypoint_example():
    ub = static_unsafe_box((200, 0), 50, 12)
    assert virtual_waypoint(ub, (138, 0), 0.0) == (150, -50)
    assert virtual_waypoint(ub, (138, 0), 0.0, "port") == (150, 50)
    with pytest.raises(InconsistentState):
        virtual_waypoint(ub, (200, 10), 0.0)


def test_virtual_waypoint_from_above_port():
    ub = static_unsafe_box((200, 0), 50, 12)
    p, psi = (100, 120), -0.5
    rho = [math.atan2(vy - p[1], vx - p[0]) - psi for vx, vy in ub.vertices]
    got = virtual_waypoint(ub, p, psi, "port")
    assert got == ub.vertices[int(np.argmax(rho))]


def _mode_log(trace):
    return [(round(t, 2), a, b) for t, a, b, _ in trace.switch_log]


@pytest.fixture(scope="module")
def ex2():
    return simulate(example_static())


def test_example_static_switch_times(ex2):
    log = ex2.switch_log
    assert (log[0][1], log[0][2]) == (S1, S2)
    assert log[0][0] == pytest.approx(11.5, abs=0.05)
    resume = [e for e in log if e[2] == S1]
    assert resume and resume[0][0] == pytest.approx(18.0, abs=2.0)
    assert ex2.reached
    assert ex2.dist.min() >= 50


def test_transitions_legal_and_justified(ex2):
    for t, a, b, reason in ex2.switch_log:
        assert a == b or (a, b) in LEGAL_EDGES
        if a == S1:
            assert reason.startswith("G11&G12")


def test_freeze_is_bit_identical(ex2):
    modes = ex2.mode
    entries = [i for i in range(1, len(modes)) if modes[i] == S3 and modes[i - 1] != S3]
    assert entries
    for i in entries:
        j = i
        while j < len(modes) and modes[j] == S3:
            assert ex2.u[j] == ex2.u[i]
            j += 1
        # the frozen value is the last S2 command
        if modes[i - 1] == S2:
            assert ex2.u[i] == ex2.u[i - 1]


def test_risk_switching_triggers_earlier(ex2):
    for K in (0.35, 0.5):
        tr = simulate(example_static("risk", K))
        t1 = tr.switch_log[0][0]
        assert t1 < ex2.switch_log[0][0]
        i = int(round(t1 / 0.01))
        assert math.dist((tr.x[i], tr.y[i]), (200, 0)) >= 62
        assert tr.switch_log[0][3].startswith("G11&G22")


def test_no_obstacles_stays_in_s1():
    sup = Supervisor((0, 0), (500, 0), P12, GuidanceConfig.for_ship(P12), [],
                     SupervisorConfig(C_s=50), 0.01)
    for k in range(50):
        state, u = supervisor_step(sup, (k * 0.12, 0.0), 0.0, k * 0.01)
        assert state.mode == S1
    assert sup.state.switch_log == []


def test_guards_do_not_mutate():
    tr = ObstacleTrack(Vec2(200, 0), 0.0, 0.0, "s1")
    sup = Supervisor((0, 0), (500, 0), P12, GuidanceConfig.for_ship(P12), [tr],
                     SupervisorConfig(C_s=50), 0.01)
    far = guards(sup, (0, 0), 0.0, 0.0)
    assert far.G11 is True and far.G12 is False
    near = guards(sup, (139, 0), 0.0, 0.0)
    assert near.G11 and near.G12
    assert sup.state.mode == S1 and sup.state.switch_log == []


def _sup_with(track, p_w=(5000.0, 0.0)):
    return Supervisor((0, 0), p_w, P12, GuidanceConfig.for_ship(P12), [track],
                      SupervisorConfig(C_s=50), 0.1)


@settings(max_examples=150)
@given(st.floats(-3000, 3000), st.floats(-3000, 3000), st.floats(-math.pi, math.pi),
       st.floats(0.5, 15), st.floats(0, 4000), st.floats(-300, 300), st.floats(0, 200))
def test_g23_fast_path_agrees_with_polygon_test(x, y, psi_m, v_o, px, py, t):
    tr = ObstacleTrack(Vec2(x, y), psi_m, v_o, "m")
    sup = _sup_with(tr)
    p = Vec2(px, py)
    fast = sup._g23(p, t, sup.tracks[0])
    T = 1.0 + math.dist(sup.p_w, p) / 12.0
    slow = not regions_intersect(obstacle_reach_region(sup.tracks[0], t, T, 50),
                                 ship_reach_region(p, 12.0, 1.0, sup.p_w))
    assert fast == slow


def test_parallel_stall_detection():
    v_o, C_s, t_p, S = 5.0, 50.0, 1.0, 1000.0
    # v/v_o = (S + C_s + (v - v_o) t_p)/S solved for v
    v = (1 + (C_s - v_o * t_p) / S) / (1 / v_o - t_p / S)
    tr = ObstacleTrack(Vec2(0, 100), 0.0, v_o)
    p_w = (S, 100)
    assert parallel_stall(0.0, tr, p_w, 0.0, v, C_s, t_p)
    assert not parallel_stall(0.0, tr, p_w, 0.0, v * 1.01, C_s, t_p)
    assert not parallel_stall(0.3, tr, p_w, 0.0, v, C_s, t_p)


def _safe_static_scenario(ox, oy):
    params = ShipParams(12.0, 1.67, 18.0)
    return Scenario("static-prop", Vec2(0, 0), 0.0, params, GuidanceConfig.for_ship(params),
                    Vec2(600, 0), [ObstacleTrack(Vec2(ox, oy), 0.0, 0.0, "s")], C_s=40.0,
                    horizon=150.0, dt=0.02)


# Offsets up to 20 m keep the centre-range trigger at least 8 m ahead of the
# box edge, which covers the one-second heading transient.
@settings(max_examples=12)
@given(st.floats(120, 450), st.floats(-20, 20))
def test_static_safety_near_head_on(ox, oy):
    sc = _safe_static_scenario(ox, oy)
    assert sc.assumption_warnings() == []
    tr = simulate(sc)
    cheb = np.maximum(np.abs(tr.x - ox), np.abs(tr.y - oy))
    assert cheb.min() >= 40
    assert tr.dist.min() >= 40
    assert tr.reached
    assert tr.saturation_count == 0


# The trigger compares centre range with C_s + v t_p.  For lateral offsets
# between roughly 27 and 40 m that fires too late: first the heading
# transient clips the box corner, then the ship is already inside the box
# when the range condition becomes true.
@pytest.mark.xfail(strict=True, reason="centre-range trigger fires late for offset obstacles")
@settings(max_examples=12)
@example(ox=120.0, oy=28.0)
@example(ox=200.0, oy=36.0)
@given(st.floats(120, 450), st.floats(-60, 60))
def test_static_chebyshev_clearance_all_offsets(ox, oy):
    tr = simulate(_safe_static_scenario(ox, oy))
    cheb = np.maximum(np.abs(tr.x - ox), np.abs(tr.y - oy))
    assert cheb.min() >= 40


def test_inside_box_at_trigger_is_reported():
    tr = simulate(_safe_static_scenario(200.0, 36.0))
    assert any("inside unsafe box" in msg for _, msg in tr.diagnostics)
    assert tr.reached
