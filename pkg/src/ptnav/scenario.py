"""Scenario definitions, the Imazu encounter set and YAML scenario files.

Files declare their unit system: ``si`` (m, m/s, rad, s) or ``nmi_knots_deg``
(nmi, knots, degrees, s).  Everything is converted to SI on load.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import yaml

from .dynamics import KNOT, NMI, ObstacleTrack, ShipParams
from .errors import InvalidArgument
from .geometry import Vec2
from .guidance import GuidanceConfig
from .risk import RiskParams

log = logging.getLogger(__name__)

UNIT_SYSTEMS = ("si", "nmi_knots_deg")

# (x nmi, y nmi, heading deg) per obstacle
IMAZU_TABLE = {
    1: [(6, 0, 180)],
    2: [(5, -2, 90)],
    3: [(3, 0, 0)],
    4: [(3.44, 1.55, 255)],
    5: [(5, -2.1, 90), (7, 0, 180)],
    6: [(3.4, -1.5, 45), (3, -0.35, 10)],
    7: [(3, 0, 0), (3.4, -1.5, 45)],
    8: [(5, -2.1, 19), (7, 0, 180)],
    9: [(3.4, -1.5, 45), (5, -2.1, 19)],
    10: [(3, 0.3, -10), (5, -2.1, 90)],
    11: [(5, 2.1, -90), (3.4, -1.5, 45)],
    12: [(7, 0, 180), (3, 0.3, -10), (3.44, -1.55, 45)],
    13: [(7, 0, 180), (3, 0.3, -10), (3.4, 1.5, 255)],
    14: [(3.4, -1.5, 45), (3, -0.3, 10), (5, -2.1, 90)],
    15: [(3, 0, 0), (-3.4, -1.5, 45), (5, -2.1, 90)],
    16: [(3.4, 1.5, -45), (5, 2.1, -90), (5, -2.1, 90)],
    17: [(3, 0, 0), (3, 0.3, -10), (3.4, -1.5, 45)],
    18: [(0.3, -0.3, 10), (3.4, -1.5, 45), (6.5, -1.5, 135)],
    19: [(3, -0.3, 10), (3, 0.3, -10), (6.5, -1.5, 135)],
    20: [(3, 0, 0), (3, -0.3, 10), (5, -2.1, 90)],
    21: [(3, -0.3, 10), (3, 0.3, -10), (5, -2.1, 90)],
    22: [(3, 0, 0), (3.44, -1.55, 45), (5, -2.1, 90)],
}

IMAZU_SHIP_SPEED_KN = 25
IMAZU_OBSTACLE_SPEED_KN = 10
IMAZU_WAYPOINT_NMI = (12.82, 0)
IMAZU_CS_NMI = 0.018
IMAZU_A = 1.67
IMAZU_M = 18
DEFAULT_HORIZON = 5400.0
DEFAULT_DT = 0.1


@dataclass
class Scenario:
    name: str
    p0: Vec2
    psi0: float
    params: ShipParams
    guidance: GuidanceConfig
    p_w: Vec2
    tracks: list
    C_s: float
    risk: RiskParams = field(default_factory=RiskParams)
    switching: str = "binary"
    side: str = "starboard"
    horizon: float = DEFAULT_HORIZON
    dt: float = DEFAULT_DT
    units: str = "si"
    auto_perturb: bool = False

    def __post_init__(self):
        if not self.horizon > 0:
            raise InvalidArgument("horizon must be positive")
        if not self.dt > 0:
            raise InvalidArgument("dt must be positive")
        if not self.C_s > 0:
            raise InvalidArgument("C_s must be positive")
        if self.switching not in ("binary", "risk"):
            raise InvalidArgument(f"unknown switching strategy {self.switching!r}")
        if self.side not in ("starboard", "port"):
            raise InvalidArgument(f"unknown side {self.side!r}")
        if self.units not in UNIT_SYSTEMS:
            raise InvalidArgument(f"unknown unit system {self.units!r}")
        ids = [tr.id for tr in self.tracks]
        if len(set(ids)) != len(ids):
            raise InvalidArgument("obstacle ids must be distinct")
        self.p0 = Vec2(float(self.p0[0]), float(self.p0[1]))
        self.p_w = Vec2(float(self.p_w[0]), float(self.p_w[1]))

    def assumption_warnings(self) -> list:
        """Initial-condition checks that the safety argument relies on.

        The ship must start outside every trigger radius and each obstacle
        must sit farther than that radius from the waypoint.
        """
        d_safe = self.C_s + self.params.v * self.guidance.t_p
        out = []
        for tr in self.tracks:
            if math.dist(self.p0, tr.p0) <= d_safe:
                out.append(f"{tr.id}: ship starts within {d_safe:.1f} m of the obstacle")
            if tr.is_static and math.dist(tr.p0, self.p_w) <= d_safe:
                out.append(f"{tr.id}: obstacle within {d_safe:.1f} m of the waypoint")
        return out


# -- documents ---------------------------------------------------------------

def imazu_document(n: int) -> dict:
    """Case ``n`` as a plain document in nautical units."""
    if not isinstance(n, int) or n not in IMAZU_TABLE:
        raise InvalidArgument(f"Imazu case must be an integer in 1..22, got {n!r}")
    return {
        "name": f"imazu-{n:02d}",
        "units": "nmi_knots_deg",
        "ship": {"x": 0, "y": 0, "psi": 0, "v": IMAZU_SHIP_SPEED_KN, "a": IMAZU_A, "m": IMAZU_M},
        "guidance": {"t_p": 1.0, "eta": 3.5},
        "waypoint": list(IMAZU_WAYPOINT_NMI),
        "C_s": IMAZU_CS_NMI,
        "switching": "binary",
        "side": "starboard",
        "horizon": DEFAULT_HORIZON,
        "dt": DEFAULT_DT,
        "obstacles": [{"id": f"o{i + 1}", "x": x, "y": y, "psi": h, "v": IMAZU_OBSTACLE_SPEED_KN}
                      for i, (x, y, h) in enumerate(IMAZU_TABLE[n])],
    }


def scenario_from_dict(doc: dict) -> Scenario:
    units = doc.get("units", "si")
    if units not in UNIT_SYSTEMS:
        raise InvalidArgument(f"unknown unit system {units!r}")
    nm = units == "nmi_knots_deg"
    L = NMI if nm else 1.0
    V = KNOT if nm else 1.0
    ang = math.radians if nm else float
    try:
        s = doc["ship"]
        params = ShipParams(v=float(s["v"]) * V, a=float(s["a"]), m=float(s["m"]))
        g = doc.get("guidance", {})
        delta = g.get("delta")
        guidance = GuidanceConfig.for_ship(
            params, float(g.get("t_p", 1.0)), float(g.get("eta", 3.5)),
            None if delta is None else float(delta) * L, strict=False)
        r = doc.get("risk")
        if r is None:
            risk = RiskParams()
        else:
            risk = RiskParams(tuple(x * L for x in r["dcpa"]), tuple(r["tcpa"]),
                              tuple(x * L for x in r["dist"]), float(r["K"]))
        tracks = [ObstacleTrack(Vec2(float(o["x"]) * L, float(o["y"]) * L), ang(float(o["psi"])),
                                float(o.get("v", 0.0)) * V, str(o.get("id", f"o{i + 1}")))
                  for i, o in enumerate(doc.get("obstacles", []))]
        sc = Scenario(
            name=str(doc.get("name", "scenario")),
            p0=Vec2(float(s["x"]) * L, float(s["y"]) * L),
            psi0=ang(float(s.get("psi", 0.0))),
            params=params, guidance=guidance,
            p_w=Vec2(float(doc["waypoint"][0]) * L, float(doc["waypoint"][1]) * L),
            tracks=tracks, C_s=float(doc["C_s"]) * L, risk=risk,
            switching=doc.get("switching", "binary"), side=doc.get("side", "starboard"),
            horizon=float(doc.get("horizon", DEFAULT_HORIZON)),
            dt=float(doc.get("dt", DEFAULT_DT)), units=units,
            auto_perturb=bool(doc.get("auto_perturb", False)))
    except (KeyError, TypeError, IndexError) as exc:
        raise InvalidArgument(f"malformed scenario: {exc!r}") from exc
    for msg in sc.assumption_warnings():
        log.warning("%s: %s", sc.name, msg)
    return sc


def scenario_to_dict(sc: Scenario) -> dict:
    """SI document for ``sc``; loading it back gives an equal scenario."""
    return {
        "name": sc.name,
        "units": "si",
        "ship": {"x": sc.p0[0], "y": sc.p0[1], "psi": sc.psi0, "v": sc.params.v,
                 "a": sc.params.a, "m": sc.params.m},
        "guidance": {"t_p": sc.guidance.t_p, "eta": sc.guidance.eta, "delta": sc.guidance.delta},
        "risk": {"dcpa": list(sc.risk.dcpa), "tcpa": list(sc.risk.tcpa),
                 "dist": list(sc.risk.dist), "K": sc.risk.K},
        "waypoint": [sc.p_w[0], sc.p_w[1]],
        "C_s": sc.C_s,
        "switching": sc.switching,
        "side": sc.side,
        "horizon": sc.horizon,
        "dt": sc.dt,
        "auto_perturb": sc.auto_perturb,
        "obstacles": [{"id": tr.id, "x": tr.p0[0], "y": tr.p0[1], "psi": tr.psi_m, "v": tr.v_o}
                      for tr in sc.tracks],
    }


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InvalidArgument(f"cannot read scenario {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InvalidArgument(f"cannot parse scenario {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise InvalidArgument(f"scenario {path} is not a mapping")
    return scenario_from_dict(doc)


def save_scenario(sc: Scenario, path) -> None:
    Path(path).write_text(yaml.safe_dump(scenario_to_dict(sc), sort_keys=False))


def imazu_case(n: int) -> Scenario:
    return scenario_from_dict(imazu_document(n))


def imazu_data_file(n: int):
    """Path of the shipped data file for case ``n``."""
    if n not in IMAZU_TABLE:
        raise InvalidArgument(f"Imazu case must be in 1..22, got {n!r}")
    return resources.files("ptnav") / "data" / "imazu" / f"case{n:02d}.yaml"


# -- worked examples ---------------------------------------------------------

def example_waypoint(dt: float = 1e-3, horizon: float = 5.0) -> Scenario:
    """Single waypoint, no obstacles, tight input bound."""
    params = ShipParams(v=11.996, a=1.67, m=3.0)
    guidance = GuidanceConfig.for_ship(params, 1.0, 3.5, delta=0.3093, strict=False)
    return Scenario("example-waypoint", Vec2(0.0, 0.0), 0.0, params, guidance,
                    Vec2(10.0, 9.0), [], C_s=1.0, horizon=horizon, dt=dt)


EXAMPLE_STATIC_RISK = RiskParams(dcpa=(50.0, 100.0), tcpa=(5.0, 10.0), dist=(62.0, 124.0), K=0.35)


def example_static(switching: str = "binary", K: float = 0.35, dt: float = 0.01,
                   horizon: float = 120.0) -> Scenario:
    """One static obstacle on the straight path to the waypoint."""
    params = ShipParams(v=12.0, a=1.67, m=18.0)
    guidance = GuidanceConfig.for_ship(params, 1.0, 3.5)
    risk = RiskParams(EXAMPLE_STATIC_RISK.dcpa, EXAMPLE_STATIC_RISK.tcpa,
                      EXAMPLE_STATIC_RISK.dist, K)
    return Scenario("example-static", Vec2(0.0, 0.0), 0.0, params, guidance, Vec2(500.0, 0.0),
                    [ObstacleTrack(Vec2(200.0, 0.0), 0.0, 0.0, "s1")], C_s=50.0, risk=risk,
                    switching=switching, horizon=horizon, dt=dt)


def transformed(sc: Scenario, frame, name: Optional[str] = None) -> Scenario:
    """Copy of ``sc`` moved rigidly by ``frame`` (a FrameTransform)."""
    tracks = [ObstacleTrack(frame.apply(tr.p0), frame.apply_angle(tr.psi_m), tr.v_o, tr.id)
              for tr in sc.tracks]
    return Scenario(name or sc.name, frame.apply(sc.p0), frame.apply_angle(sc.psi0), sc.params,
                    sc.guidance, frame.apply(sc.p_w), tracks, sc.C_s, sc.risk, sc.switching,
                    sc.side, sc.horizon, sc.dt, sc.units, sc.auto_perturb)
