"""Unsafe-set construction, virtual waypoints and the S1/S2/S3 switching supervisor.

Mode S1 steers to the waypoint, S2 to a virtual waypoint on a corner of an
unsafe box, and S3 holds the last S2 command.  All geometry is evaluated in
the mission frame, the LOS frame from the initial position to the waypoint,
so the unsafe boxes stay axis-aligned and a rigidly moved scenario behaves
identically.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .dynamics import ObstacleTrack, ShipParams
from .errors import InconsistentState, InvalidArgument, NoRelativeMotion
from .geometry import (Box, FrameTransform, Vec2, bearing, hull_hits_box, los_frame,
                       obstacle_reach_region, point_segment_distance, regions_intersect,
                       ship_reach_region, wrap_angle)
from .guidance import GuidanceConfig, predefined_time_control
from .risk import RiskParams, cpa, track_risk

log = logging.getLogger(__name__)

S1, S2, S3 = "S1", "S2", "S3"
LEGAL_EDGES = {(S1, S2), (S1, S3), (S2, S1), (S3, S1), (S2, S3), (S3, S2)}


@dataclass(frozen=True)
class UnsafeBox:
    box: Box
    cpa_anchor: Vec2
    d_safe: float
    kind: str = "static"
    members: tuple = ()
    diagnostics: tuple = ()

    @property
    def vertices(self) -> list:
        return self.box.vertices()


@dataclass(frozen=True)
class SupervisorConfig:
    C_s: float
    switching: str = "binary"
    side: str = "starboard"
    risk: RiskParams = field(default_factory=RiskParams)
    tcpa_form: str = "range"
    g23_horizon: str = "leg"
    auto_perturb: bool = False

    def __post_init__(self):
        if not self.C_s > 0:
            raise InvalidArgument("C_s must be positive")
        if self.switching not in ("binary", "risk"):
            raise InvalidArgument(f"unknown switching strategy {self.switching!r}")
        if self.side not in ("starboard", "port"):
            raise InvalidArgument(f"unknown side {self.side!r}")
        if self.g23_horizon not in ("leg", "transient"):
            raise InvalidArgument(f"unknown G23 horizon {self.g23_horizon!r}")


@dataclass
class SupervisorState:
    mode: str = S1
    active_target: Optional[Vec2] = None
    u_c: Optional[float] = None
    mode_entry_time: float = 0.0
    active_unsafe: Optional[UnsafeBox] = None
    virtual_wp: Optional[Vec2] = None
    last_u: Optional[float] = None
    switch_log: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)


@dataclass
class GuardReport:
    G11: Optional[bool] = None
    G12: Optional[bool] = None
    L1: Optional[bool] = None
    L2: Optional[bool] = None
    G23: Optional[bool] = None


# -- unsafe sets -------------------------------------------------------------

def static_unsafe_box(p_s, C_s: float, v_tp: float = 0.0, obstacle_id="") -> UnsafeBox:
    if not C_s > 0:
        raise InvalidArgument("C_s must be positive")
    c = Vec2(float(p_s[0]), float(p_s[1]))
    return UnsafeBox(Box(c, C_s, C_s), c, C_s + v_tp, "static",
                     (obstacle_id,) if obstacle_id else ())


def cluster_static(obstacles: Sequence, C_s: float, d_safe: float, ids=None) -> list:
    """Merge static obstacles closer than ``2 d_safe`` (transitively) into boxes.

    A cluster's trigger radius is ``d_safe`` plus how far its box reaches past
    a single obstacle's, so the approach margin is the same as for one obstacle.
    """
    if not C_s > 0:
        raise InvalidArgument("C_s must be positive")
    pts = [Vec2(float(p[0]), float(p[1])) for p in obstacles]
    ids = list(ids) if ids is not None else [f"s{i}" for i in range(len(pts))]
    parent = list(range(len(pts)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if (pts[i] - pts[j]).norm() < 2.0 * d_safe:
                parent[find(i)] = find(j)
    groups: dict = {}
    for i in range(len(pts)):
        groups.setdefault(find(i), []).append(i)
    boxes = []
    for members in sorted(groups.values()):
        xs = [pts[i].x for i in members]
        ys = [pts[i].y for i in members]
        L = 0.5 * (max(xs) - min(xs) + 2 * C_s)
        B = 0.5 * (max(ys) - min(ys) + 2 * C_s)
        center = Vec2(0.5 * (max(xs) + min(xs)), 0.5 * (max(ys) + min(ys)))
        boxes.append(UnsafeBox(Box(center, L, B), center, d_safe + max(L, B) - C_s,
                               "static", tuple(ids[i] for i in members)))
    return boxes


def _fv_safe_distance(p, p_m, p_mc, v_o, L, B, v, t_p):
    """``d_2 + L + v t_p``; falls back to the current range when ``d_2`` is imaginary."""
    D = math.hypot(p_m[0] - p_mc[0], p_m[1] - p_mc[1])
    lead = max(D / v_o - t_p, 0.0) * v
    rad = lead * lead - B * B
    if rad < 0.0:
        return math.hypot(p[0] - p_mc[0], p[1] - p_mc[1]), ("negative d2 radicand",)
    return math.sqrt(rad) + L + v * t_p, ()


def dynamic_unsafe_box(p, psi: float, params: ShipParams, track: ObstacleTrack, C_s: float,
                       t: float, t_p: float, tcpa_form: str = "range") -> UnsafeBox:
    """Box around the obstacle's CPA position spanning its current position."""
    if track.is_static:
        return static_unsafe_box(track.position(t), C_s, params.v * t_p, track.id)
    c = cpa(p, psi, params.v, track, t, tcpa_form)
    pm = track.position(t)
    pmc = c.p_cpa
    L = abs(pm[0] - pmc[0]) + C_s
    B = abs(pm[1] - pmc[1]) + C_s
    d_safe, diag = _fv_safe_distance(p, pm, pmc, track.v_o, L, B, params.v, t_p)
    return UnsafeBox(Box(pmc, L, B), pmc, d_safe, "dynamic", (track.id,), diag)


def multi_dynamic_unsafe_box(p, psi: float, params: ShipParams, tracks: Sequence[ObstacleTrack],
                             C_s: float, t: float, t_p: float, tcpa_form: str = "range",
                             anchor_id=None) -> Optional[UnsafeBox]:
    """One box for a group of moving obstacles, anchored on the riskiest CPA.

    The anchor is ``anchor_id`` or the approaching track whose CPA lies nearest
    the ship.  Other tracks join when (1) they are within ``D_sf = C_s + v t_p``
    of the ship, (2) within ``2 D_sf`` of a member, (3) their CPA is within
    ``D_sf`` of the ship, or (4) at the anchor's TCPA they are within ``D_sf``
    of the ship's predicted position.
    """
    v = params.v
    D_sf = C_s + v * t_p
    info = {}
    for tr in tracks:
        if tr.is_static:
            continue
        try:
            c = cpa(p, psi, v, tr, t, tcpa_form)
        except NoRelativeMotion:
            continue
        if c.approaching:
            info[tr.id] = (tr, c)
    if not info:
        return None
    if anchor_id is None:
        anchor_id = min(info, key=lambda k: (math.hypot(p[0] - info[k][1].p_cpa[0],
                                                        p[1] - info[k][1].p_cpa[1]), k))
    elif anchor_id not in info:
        return None
    anchor, ca = info[anchor_id]
    members = {anchor_id}
    ship_future = Vec2(p[0] + v * math.cos(psi) * ca.tcpa, p[1] + v * math.sin(psi) * ca.tcpa)
    for k, (tr, c) in info.items():
        pm = tr.position(t)
        if math.hypot(p[0] - pm[0], p[1] - pm[1]) < D_sf:
            members.add(k)
        if math.hypot(p[0] - c.p_cpa[0], p[1] - c.p_cpa[1]) < D_sf:
            members.add(k)
        pl = tr.position(t + ca.tcpa)
        if math.hypot(ship_future[0] - pl[0], ship_future[1] - pl[1]) < D_sf:
            members.add(k)
    grew = True
    while grew:
        grew = False
        for k, (tr, _) in info.items():
            if k in members:
                continue
            pk = tr.position(t)
            for j in list(members):
                pj = info[j][0].position(t)
                if math.hypot(pk[0] - pj[0], pk[1] - pj[1]) <= 2 * D_sf:
                    members.add(k)
                    grew = True
                    break
    pmc = ca.p_cpa
    L = max(abs(info[k][0].position(t)[0] - pmc[0]) for k in members) + C_s
    B = max(abs(info[k][0].position(t)[1] - pmc[1]) for k in members) + C_s
    d_safe, diag = _fv_safe_distance(p, anchor.position(t), pmc, anchor.v_o, L, B, v, t_p)
    return UnsafeBox(Box(pmc, L, B), pmc, d_safe, "dynamic", tuple(sorted(members)), diag)


# -- virtual waypoint ------------------------------------------------------

def relative_angles(box: UnsafeBox, p, psi: float) -> list:
    """Relative bearing of each box vertex from the ship's heading."""
    return [wrap_angle(bearing(p, vtx) - psi) for vtx in box.vertices]


def virtual_waypoint(box: UnsafeBox, p, psi: float, side: str = "starboard",
                     diagnostics: Optional[list] = None) -> Vec2:
    """Corner of ``box`` tangent to it on the preferred side, as seen from ``p``.

    For a starboard manoeuvre this is the vertex of most negative relative
    angle; the line from the ship through it leaves the whole box to port.
    """
    if side not in ("starboard", "port"):
        raise InvalidArgument(f"unknown side {side!r}")
    if box.box.contains(p):
        raise InconsistentState("ship is inside the unsafe box")
    verts = box.vertices
    ref = bearing(p, box.box.center)
    spread = [wrap_angle(bearing(p, vtx) - ref) for vtx in verts]
    pick = min if side == "starboard" else max
    i = pick(range(4), key=lambda k: (spread[k], k))
    rho = wrap_angle(bearing(p, verts[i]) - psi)
    if (side == "starboard" and rho >= 0) or (side == "port" and rho <= 0):
        if diagnostics is not None:
            diagnostics.append(f"{side} tangent vertex has relative angle {rho:+.3f} rad")
    return verts[i]


def parallel_stall(psi: float, track: ObstacleTrack, p_w, t: float, v: float,
                   C_s: float, t_p: float, tol: float = 1e-3) -> bool:
    """True in the single configuration where escape along parallel tracks never ends."""
    if track.v_o == 0.0 or abs(math.sin(psi - track.psi_m)) > tol:
        return False
    pm = track.position(t)
    S = math.hypot(p_w[0] - pm[0], p_w[1] - pm[1])
    if S == 0.0:
        return False
    v_r = v - track.v_o
    return abs(v / track.v_o - (S + C_s + v_r * t_p) / S) < tol


# -- supervisor --------------------------------------------------------------

class Supervisor:
    """Switching logic for one simulation run.

    ``step`` takes the world-frame ship state and returns the raw command and
    the guard values it evaluated.  Geometry is done in the mission frame.
    """

    def __init__(self, p0, p_w, params: ShipParams, guidance: GuidanceConfig,
                 tracks: Sequence[ObstacleTrack], cfg: SupervisorConfig, dt: float):
        self.params = params
        self.guidance = guidance
        self.cfg = cfg
        self.dt = dt
        self.frame: FrameTransform = los_frame(p0, p_w)
        self.p_w_world = Vec2(*p_w)
        self.p_w = self.frame.apply(p_w)
        self.tracks = [ObstacleTrack(self.frame.apply(tr.p0), self.frame.apply_angle(tr.psi_m),
                                     tr.v_o, tr.id) for tr in tracks]
        self.dynamic = [tr for tr in self.tracks if not tr.is_static]
        static = [tr for tr in self.tracks if tr.is_static]
        v_tp = params.v * guidance.t_p
        self.static_boxes = cluster_static([tr.p0 for tr in static], cfg.C_s, cfg.C_s + v_tp,
                                           ids=[tr.id for tr in static])
        self._static_by_id = {tr.id: tr for tr in static}
        self.state = SupervisorState(active_target=self.p_w_world)
        self.perturb_requested = False

    # geometry helpers in the mission frame
    def _hull_hits(self, p, box: Box, apex=None) -> bool:
        return hull_hits_box(p, self.params.v * self.guidance.t_p,
                             self.p_w if apex is None else apex, box)

    def _course_apex(self, p, psi):
        """Where the ship is actually heading: the goal, V1, or along the frozen course."""
        st = self.state
        if st.mode == S2 and st.virtual_wp is not None:
            return st.virtual_wp
        if st.mode == S3:
            reach = math.hypot(self.p_w[0] - p[0], self.p_w[1] - p[1])
            return Vec2(p[0] + reach * math.cos(psi), p[1] + reach * math.sin(psi))
        return self.p_w

    def _g23(self, p, t: float, track: ObstacleTrack) -> bool:
        v = self.params.v
        t_p = self.guidance.t_p
        if self.cfg.g23_horizon == "leg":
            T = t_p + math.hypot(self.p_w[0] - p[0], self.p_w[1] - p[1]) / v
        else:
            psi_los = bearing(p, self.p_w) if p != self.p_w else 0.0
            T = t_p + v * math.sin(psi_los) / (self.cfg.C_s + v * t_p)
            T = max(T, 0.0)
        a = track.position(t)
        b = track.position(t + T)
        r = v * t_p / math.cos(math.pi / 64)
        # capsule pre-checks: the swept box sits within C_s*sqrt(2) of [a, b]
        gap = _segment_distance(p, self.p_w, a, b)
        if gap > r + self.cfg.C_s * math.sqrt(2.0):
            return True
        if gap == 0.0:
            return False
        return not regions_intersect(obstacle_reach_region(track, t, T, self.cfg.C_s),
                                     ship_reach_region(p, v, t_p, self.p_w))

    def _g12(self, p, psi, t, ub: UnsafeBox) -> bool:
        if self.cfg.switching == "binary":
            d_s = math.hypot(p[0] - ub.cpa_anchor[0], p[1] - ub.cpa_anchor[1])
            return d_s <= ub.d_safe
        ri = 0.0
        for k in ub.members:
            tr = self._track(k)
            if tr is not None:
                ri = max(ri, track_risk(p, psi, self.params.v, tr, t, self.cfg.risk,
                                        self.cfg.tcpa_form))
        return ri >= self.cfg.risk.K

    def _track(self, k):
        for tr in self.tracks:
            if tr.id == k:
                return tr
        return None

    def _find_trigger(self, p, psi, t, exclude=(), apex=None):
        """Return (UnsafeBox, G11, G12) for the nearest triggering unsafe set.

        With nothing triggering, the report values describe the nearest set.
        """
        best = None
        focus = None
        for ub in self.static_boxes:
            if set(ub.members) & set(exclude):
                continue
            d = math.hypot(p[0] - ub.cpa_anchor[0], p[1] - ub.cpa_anchor[1])
            g11 = self._hull_hits(p, ub.box, apex)
            g12 = self._g12(p, psi, t, ub) if g11 else None
            if focus is None or d < focus[0]:
                focus = (d, g11, g12)
            if g11 and g12 and (best is None or d < best[0]):
                best = (d, ub, g11, g12)
        trig_dyn = []
        for tr in self.dynamic:
            if tr.id in exclude:
                continue
            try:
                c = cpa(p, psi, self.params.v, tr, t, self.cfg.tcpa_form)
            except NoRelativeMotion:
                continue
            if not c.approaching:
                continue
            ub = dynamic_unsafe_box(p, psi, self.params, tr, self.cfg.C_s, t,
                                    self.guidance.t_p, self.cfg.tcpa_form)
            d = math.hypot(p[0] - c.p_cpa[0], p[1] - c.p_cpa[1])
            g11 = self._hull_hits(p, ub.box, apex)
            g12 = self._g12(p, psi, t, ub) if g11 else None
            if focus is None or d < focus[0]:
                focus = (d, g11, g12)
            if g11 and g12 and not self._g23(p, t, tr):
                trig_dyn.append((d, tr.id))
        if trig_dyn:
            d, anchor = min(trig_dyn)
            ub = multi_dynamic_unsafe_box(p, psi, self.params, self.dynamic, self.cfg.C_s, t,
                                          self.guidance.t_p, self.cfg.tcpa_form, anchor)
            if ub is not None and (best is None or d < best[0]):
                best = (d, ub, True, True)
        if best is not None:
            return best[1], best[2], best[3]
        if focus is None:
            return None, None, None
        return None, focus[1], focus[2]

    def _switch(self, t, new_mode, reason):
        st = self.state
        if new_mode != st.mode and (st.mode, new_mode) not in LEGAL_EDGES:
            raise InconsistentState(f"illegal transition {st.mode}->{new_mode}")
        # a same-mode entry is a fresh episode and restarts the window too
        st.switch_log.append((t, st.mode, new_mode, reason))
        st.mode = new_mode
        st.mode_entry_time = t

    def _diag(self, t, msg):
        d = self.state.diagnostics
        if not d or d[-1][1] != msg:
            d.append((t, msg))

    def _start_episode(self, p, psi, psi_w, t, ub: UnsafeBox, reason):
        st = self.state
        diag = []
        try:
            vw = virtual_waypoint(ub, p, psi, self.cfg.side, diag)
        except InconsistentState:
            rho = relative_angles(ub, p, psi)
            i = min(range(4), key=lambda k: rho[k]) if self.cfg.side == "starboard" \
                else max(range(4), key=lambda k: rho[k])
            vw = ub.vertices[i]
            diag.append("ship inside unsafe box at trigger")
        for msg in diag + list(ub.diagnostics):
            self._diag(t, msg)
        st.active_unsafe = ub
        st.virtual_wp = vw
        st.active_target = self.frame.inverse(vw)
        l1, l2 = self._l_guards(p, psi, vw)
        if l1 and l2:
            self._switch(t, S2, reason)
        else:
            st.u_c = st.last_u if st.mode == S2 and st.last_u is not None else psi_w
            self._switch(t, S3, reason + "; L1&L2 false at entry")

    def _l_guards(self, p, psi, vw):
        l1 = math.hypot(p[0] - vw[0], p[1] - vw[1]) > self.guidance.delta
        l2 = abs(wrap_angle(bearing(p, vw) - psi)) < 0.5 * math.pi if l1 else False
        return l1, l2

    def step(self, p_world, psi_world_: float, t: float):
        """Advance the switching logic; return ``(u, GuardReport)``."""
        st = self.state
        p = self.frame.apply(p_world)
        psi = self.frame.apply_angle(psi_world_)
        rep = GuardReport()

        # resume checks
        if st.mode in (S2, S3) and st.active_unsafe is not None:
            ub = st.active_unsafe
            if ub.kind == "static":
                g11 = self._hull_hits(p, ub.box)
                rep.G11 = g11
                if not g11:
                    self._leave_avoidance(t, "not G11")
            elif st.mode == S3:
                ok = True
                for k in ub.members:
                    tr = self._track(k)
                    if tr is None:
                        continue
                    if self._g23(p, t, tr):
                        continue
                    ok = False
                    if parallel_stall(psi, tr, self.p_w, t, self.params.v, self.cfg.C_s,
                                      self.guidance.t_p):
                        self._diag(t, f"parallel-track stall against {k}")
                        if self.cfg.auto_perturb:
                            self.perturb_requested = True
                    break
                rep.G23 = ok
                if ok:
                    self._leave_avoidance(t, "G23")

        # trigger checks
        exclude = st.active_unsafe.members if st.mode != S1 and st.active_unsafe else ()
        ub, g11, g12 = self._find_trigger(p, psi, t, exclude, self._course_apex(p, psi))
        if rep.G11 is None:
            rep.G11 = g11
        rep.G12 = g12
        if ub is not None:
            tag = "G22" if self.cfg.switching == "risk" else "G12"
            self._start_episode(p, psi, psi_world_, t, ub, f"G11&{tag} [{','.join(ub.members)}]")

        # S2 <-> S3
        if st.mode in (S2, S3):
            l1, l2 = self._l_guards(p, psi, st.virtual_wp)
            rep.L1, rep.L2 = l1, l2
            if st.mode == S2 and not (l1 and l2):
                st.u_c = st.last_u if st.last_u is not None else psi_world_
                self._switch(t, S3, "not L1" if not l1 else "not L2")
            elif st.mode == S3 and l1 and l2:
                self._switch(t, S2, "L1&L2")
                st.u_c = None

        if st.mode in (S1, S2):
            self._rearm(p_world, psi_world_, t)
        if st.mode == S1:
            target = self.p_w_world
            u = predefined_time_control(p_world, psi_world_, target, t, st.mode_entry_time,
                                        self.guidance, self.params, self.dt)
        elif st.mode == S2:
            u = predefined_time_control(p_world, psi_world_, st.active_target, t,
                                        st.mode_entry_time, self.guidance, self.params, self.dt)
        else:
            u = st.u_c
        st.last_u = u
        return u, rep

    def _rearm(self, p_world, psi_w, t):
        """Restart the heading window when the held heading would miss the target.

        On a time grid the window ends with a tiny residual error, which the
        heading hold then carries all the way down the leg.
        """
        st = self.state
        if t < st.mode_entry_time + self.guidance.t_p:
            return
        tgt = st.active_target
        rng = math.hypot(tgt[0] - p_world[0], tgt[1] - p_world[1])
        if rng <= self.guidance.delta:
            return
        e = wrap_angle(psi_w - bearing(p_world, tgt))
        if abs(math.sin(e)) * rng > 0.25 * self.guidance.delta or abs(e) > 0.5 * math.pi:
            st.mode_entry_time = t

    def _leave_avoidance(self, t, reason):
        st = self.state
        self._switch(t, S1, reason)
        st.active_unsafe = None
        st.virtual_wp = None
        st.u_c = None
        st.active_target = self.p_w_world


def _segment_distance(a, b, c, d) -> float:
    """Distance between segments [a, b] and [c, d]."""
    if _segments_cross(a, b, c, d):
        return 0.0
    return min(point_segment_distance(a, c, d), point_segment_distance(b, c, d),
               point_segment_distance(c, a, b), point_segment_distance(d, a, b))


def _segments_cross(a, b, c, d) -> bool:
    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    d1 = orient(c, d, a)
    d2 = orient(c, d, b)
    d3 = orient(a, b, c)
    d4 = orient(a, b, d)
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True
    return False


def guards(sup: Supervisor, p_world, psi_world: float, t: float) -> GuardReport:
    """Evaluate the guards at the given state without changing ``sup``."""
    st = sup.state
    p = sup.frame.apply(p_world)
    psi = sup.frame.apply_angle(psi_world)
    rep = GuardReport()
    exclude = st.active_unsafe.members if st.mode != S1 and st.active_unsafe else ()
    _, rep.G11, rep.G12 = sup._find_trigger(p, psi, t, exclude, sup._course_apex(p, psi))
    if st.mode in (S2, S3) and st.active_unsafe is not None:
        ub = st.active_unsafe
        if ub.kind == "static":
            rep.G11 = sup._hull_hits(p, ub.box)
        else:
            rep.G23 = all(sup._g23(p, t, tr) for tr in sup.tracks if tr.id in ub.members)
        rep.L1, rep.L2 = sup._l_guards(p, psi, st.virtual_wp)
    return rep


def supervisor_step(sup: Supervisor, p_world, psi_world: float, t: float):
    """One switching step; returns ``(state, u)``."""
    u, _ = sup.step(p_world, psi_world, t)
    return sup.state, u
