"""Fixed-step simulation loop and trace files.

Record ``k`` holds the state at ``t_k = k dt`` together with the command
applied over the following step.  The final record carries the terminal
state with the last command repeated.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .dynamics import ShipParams, ShipState, rk4_step
from .errors import InvalidArgument
from .geometry import Vec2, point_segment_distance
from .risk import track_risk
from .scenario import Scenario
from .supervisor import Supervisor, SupervisorConfig
from .vo import vo_select_heading

log = logging.getLogger(__name__)

ALGORITHMS = ("proposed", "vo")
TRACE_COLUMNS = ["t", "x", "y", "psi", "u", "mode", "d_min", "RI",
                 "G11", "G12_or_G22", "L1", "L2", "G23"]
GUARD_COLUMNS = ["G11", "G12_or_G22", "L1", "L2", "G23"]


@dataclass
class SimTrace:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    psi: np.ndarray
    u: np.ndarray
    mode: list
    dist: np.ndarray            # (n, n_obstacles)
    RI: np.ndarray
    guards: dict                # column -> list of True/False/None
    status: str = "horizon"     # reached | horizon | fault
    reach_time: Optional[float] = None
    saturation_count: int = 0
    switch_log: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    boxes: list = field(default_factory=list)
    algorithm: str = "proposed"
    scenario: Optional[dict] = None

    def __len__(self):
        return len(self.t)

    @property
    def d_min(self) -> np.ndarray:
        if self.dist.shape[1] == 0:
            return np.full(len(self.t), np.inf)
        return self.dist.min(axis=1)

    @property
    def reached(self) -> bool:
        return self.status == "reached"


def _box_world(sup: Supervisor, ub) -> list:
    return [list(sup.frame.inverse(vtx)) for vtx in ub.vertices]


def simulate(sc: Scenario, algorithm: str = "proposed",
             vo_period: Optional[float] = None) -> SimTrace:
    """Run ``sc`` to the waypoint latch, the horizon or a numerical fault.

    ``vo_period`` sets how often the VO baseline re-plans; by default it
    re-plans every step, holding the command in between otherwise.
    """
    from .scenario import scenario_to_dict

    if algorithm not in ALGORITHMS:
        raise InvalidArgument(f"unknown algorithm {algorithm!r}")
    dt = sc.dt
    params = sc.params
    n_steps = int(math.ceil(sc.horizon / dt - 1e-9))
    tracks = list(sc.tracks)
    K = len(tracks)
    delta = sc.guidance.delta

    vo_every = 1 if vo_period is None else max(1, int(round(vo_period / dt)))
    u_vo = sc.psi0
    sup = None
    if algorithm == "proposed":
        cfg = SupervisorConfig(C_s=sc.C_s, switching=sc.switching, side=sc.side, risk=sc.risk,
                               auto_perturb=sc.auto_perturb)
        sup = Supervisor(sc.p0, sc.p_w, params, sc.guidance, tracks, cfg, dt)

    ts, xs, ys, psis, us, modes, ris = [], [], [], [], [], [], []
    dists = []
    gcols = {c: [] for c in GUARD_COLUMNS}
    boxes = []
    sat = 0
    status = "horizon"
    reach_time = None
    state = ShipState(sc.p0, sc.psi0, 0.0)
    last_box = None
    u = sc.psi0

    for k in range(n_steps + 1):
        t = k * dt
        state = ShipState(state.p, state.psi, t)
        p = state.p
        d_k = [math.hypot(p[0] - pm[0], p[1] - pm[1]) for pm in (tr.position(t) for tr in tracks)]
        ri = max((track_risk(p, state.psi, params.v, tr, t, sc.risk) for tr in tracks), default=0.0)
        if k == n_steps:
            _append(ts, xs, ys, psis, us, modes, ris, dists, gcols, t, state, u,
                    modes[-1] if modes else "S1", ri, d_k, None)
            break
        if sup is not None:
            u_raw, rep = sup.step(p, state.psi, t)
            mode = sup.state.mode
            ub = sup.state.active_unsafe
            # one record per avoidance episode, not per S2/S3 switch
            if ub is not None and mode != "S1" and ub is not last_box:
                last_box = ub
                boxes.append({"t": t, "members": list(ub.members), "kind": ub.kind,
                              "vertices": _box_world(sup, ub)})
        else:
            if k % vo_every == 0:
                u_vo = vo_select_heading(p, state.psi, params.v, tracks, sc.p_w, sc.C_s, t,
                                         sc.horizon)
            u_raw = u_vo
            mode, rep = "VO", None
        if not math.isfinite(u_raw):
            status = "fault"
            log.error("%s: non-finite command at t=%.3f", sc.name, t)
            break
        u = u_raw
        if abs(u) > params.m:
            sat += 1
            u = math.copysign(params.m, u)
        _append(ts, xs, ys, psis, us, modes, ris, dists, gcols, t, state, u, mode, ri, d_k, rep)
        nxt = rk4_step(state, u, dt, params)
        if not (math.isfinite(nxt.p[0]) and math.isfinite(nxt.p[1]) and math.isfinite(nxt.psi)):
            status = "fault"
            log.error("%s: non-finite state after t=%.3f", sc.name, t)
            break
        if point_segment_distance(sc.p_w, p, nxt.p) <= delta:
            state = nxt
            status = "reached"
            reach_time = (k + 1) * dt
            t = reach_time
            d_k = [math.hypot(nxt.p[0] - pm[0], nxt.p[1] - pm[1])
                   for pm in (tr.position(t) for tr in tracks)]
            ri = max((track_risk(nxt.p, nxt.psi, params.v, tr, t, sc.risk) for tr in tracks),
                     default=0.0)
            _append(ts, xs, ys, psis, us, modes, ris, dists, gcols, t, nxt, u, mode, ri, d_k, None)
            break
        state = nxt
        if sup is not None and sup.perturb_requested:
            sup.perturb_requested = False
            params = ShipParams(params.v * 1.01, params.a, params.m)
            sup.params = params
            sup.state.diagnostics.append((t, "ship speed perturbed by 1%"))

    dist = np.asarray(dists, dtype=float).reshape(len(ts), K)
    return SimTrace(
        t=np.asarray(ts), x=np.asarray(xs), y=np.asarray(ys), psi=np.asarray(psis),
        u=np.asarray(us), mode=modes, dist=dist, RI=np.asarray(ris), guards=gcols,
        status=status, reach_time=reach_time, saturation_count=sat,
        switch_log=list(sup.state.switch_log) if sup else [],
        diagnostics=list(sup.state.diagnostics) if sup else [],
        boxes=boxes, algorithm=algorithm, scenario=scenario_to_dict(sc))


def _append(ts, xs, ys, psis, us, modes, ris, dists, gcols, t, state, u, mode, ri, d_k, rep):
    ts.append(t)
    xs.append(state.p[0])
    ys.append(state.p[1])
    psis.append(state.psi)
    us.append(u)
    modes.append(mode)
    ris.append(ri)
    dists.append(d_k)
    vals = (None,) * 5 if rep is None else (rep.G11, rep.G12, rep.L1, rep.L2, rep.G23)
    for c, v in zip(GUARD_COLUMNS, vals):
        gcols[c].append(v)


# -- files -------------------------------------------------------------------

def _fmt_bool(v):
    return "" if v is None else ("1" if v else "0")


def _parse_bool(s):
    return None if s == "" else s == "1"


def events_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".events.json")


def write_trace(trace: SimTrace, path) -> None:
    """CSV trace plus a JSON sidecar with switch log, boxes and per-obstacle ranges."""
    path = Path(path)
    d_min = trace.d_min
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for i in range(len(trace.t)):
            w.writerow([repr(float(trace.t[i])), repr(float(trace.x[i])), repr(float(trace.y[i])),
                        repr(float(trace.psi[i])), repr(float(trace.u[i])), trace.mode[i],
                        repr(float(d_min[i])), repr(float(trace.RI[i]))]
                       + [_fmt_bool(trace.guards[c][i]) for c in GUARD_COLUMNS])
    events = {
        "algorithm": trace.algorithm,
        "status": trace.status,
        "reach_time": trace.reach_time,
        "saturation_count": trace.saturation_count,
        "switch_log": [list(e) for e in trace.switch_log],
        "diagnostics": [list(e) for e in trace.diagnostics],
        "boxes": trace.boxes,
        "scenario": trace.scenario,
    }
    events_path(path).write_text(json.dumps(events, indent=1, sort_keys=True))


def read_trace(path) -> SimTrace:
    """Inverse of :func:`write_trace`; raises ``InvalidArgument`` on malformed input."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InvalidArgument(f"cannot read trace {path}: {exc}") from exc
    if not rows or rows[0] != TRACE_COLUMNS:
        raise InvalidArgument(f"{path}: missing or wrong header")
    body = rows[1:]
    if not body:
        raise InvalidArgument(f"{path}: trace has no records")
    try:
        num = np.array([[float(r[j]) for j in (0, 1, 2, 3, 4, 6, 7)] for r in body])
        guards = {c: [_parse_bool(r[8 + j]) for r in body] for j, c in enumerate(GUARD_COLUMNS)}
        modes = [r[5] for r in body]
    except (ValueError, IndexError) as exc:
        raise InvalidArgument(f"{path}: malformed record: {exc}") from exc
    ev = {}
    ep = events_path(path)
    if ep.exists():
        try:
            ev = json.loads(ep.read_text())
        except json.JSONDecodeError as exc:
            raise InvalidArgument(f"{ep}: {exc}") from exc
    return SimTrace(t=num[:, 0], x=num[:, 1], y=num[:, 2], psi=num[:, 3], u=num[:, 4],
                    mode=modes, dist=num[:, 5:6], RI=num[:, 6], guards=guards,
                    status=ev.get("status", "horizon"), reach_time=ev.get("reach_time"),
                    saturation_count=ev.get("saturation_count", 0),
                    switch_log=[tuple(e) for e in ev.get("switch_log", [])],
                    diagnostics=[tuple(e) for e in ev.get("diagnostics", [])],
                    boxes=ev.get("boxes", []), algorithm=ev.get("algorithm", "proposed"),
                    scenario=ev.get("scenario"))
