"""Closest point of approach and the fuzzy collision-risk index."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dynamics import NMI, ObstacleTrack
from .errors import InvalidArgument, NoRelativeMotion
from .geometry import Vec2

TCPA_FORMS = ("range", "standard")

#: relative speeds below this (m/s) count as no relative motion
VR_FLOOR = 1e-12


@dataclass(frozen=True)
class CpaResult:
    dcpa: float
    tcpa: float
    p_cpa: Vec2
    alpha: float
    tcpa_standard: float

    @property
    def approaching(self) -> bool:
        return self.tcpa_standard > 0.0


@dataclass(frozen=True)
class RiskParams:
    """Membership breakpoints (beta1, beta2) per metric, and the trigger level K."""

    dcpa: tuple = (0.25 * NMI, 0.5 * NMI)
    tcpa: tuple = (120.0, 240.0)
    dist: tuple = (0.08 * NMI, 0.25 * NMI)
    K: float = 0.35

    def __post_init__(self):
        for name in ("dcpa", "tcpa", "dist"):
            b1, b2 = getattr(self, name)
            if not 0 <= b1 < b2:
                raise InvalidArgument(f"{name} breakpoints must satisfy 0 <= b1 < b2")
            object.__setattr__(self, name, (float(b1), float(b2)))
        if not 0 <= self.K <= 1:
            raise InvalidArgument("K must lie in [0, 1]")


def relative_state(p, psi: float, v: float, track: ObstacleTrack, t: float):
    """Relative position ``R = p - p_m`` and relative velocity ``Vr``."""
    pm = track.position(t)
    vm = track.velocity
    R = Vec2(p[0] - pm[0], p[1] - pm[1])
    Vr = Vec2(v * math.cos(psi) - vm[0], v * math.sin(psi) - vm[1])
    return R, Vr


def cpa(p, psi: float, v: float, track: ObstacleTrack, t: float,
        tcpa_form: str = "range") -> CpaResult:
    """CPA between the own ship (position, heading, speed) and a track at time ``t``.

    ``tcpa_form="range"`` gives ``|R|/|Vr|``; ``"standard"`` the projection
    ``-R.Vr/|Vr|^2``.  ``p_cpa`` is the obstacle position after ``tcpa``.
    """
    if tcpa_form not in TCPA_FORMS:
        raise InvalidArgument(f"unknown tcpa form {tcpa_form!r}")
    R, Vr = relative_state(p, psi, v, track, t)
    nv = math.hypot(Vr[0], Vr[1])
    if nv < VR_FLOOR:
        raise NoRelativeMotion("ship and obstacle share the same velocity")
    nr = math.hypot(R[0], R[1])
    dot = R[0] * Vr[0] + R[1] * Vr[1]
    cross = abs(R[0] * Vr[1] - R[1] * Vr[0])
    # atan2 form of the angle between R and Vr; no division, so tiny R is fine
    alpha = math.atan2(cross, dot) if nr > 0.0 else 0.0
    dcpa = cross / nv
    t_std = -dot / (nv * nv)
    tc = nr / nv if tcpa_form == "range" else t_std
    pm = track.position(t)
    vm = track.velocity
    return CpaResult(dcpa, tc, Vec2(pm[0] + vm[0] * tc, pm[1] + vm[1] * tc), alpha, t_std)


def fuzzy_membership(z: float, beta1: float, beta2: float) -> float:
    if not 0 <= beta1 < beta2:
        raise InvalidArgument("membership needs 0 <= beta1 < beta2")
    if z <= beta1:
        return 1.0
    if z > beta2:
        return 0.0
    w = beta2 - beta1
    if z <= 0.5 * (beta1 + beta2):
        s = (z - beta1) / w
        return 1.0 - 2.0 * s * s
    s = (z - beta2) / w
    return 2.0 * s * s


def risk_index(c: CpaResult, d_s: float, params: RiskParams) -> float:
    """Mean of the DCPA, TCPA and range memberships."""
    return (fuzzy_membership(c.dcpa, *params.dcpa)
            + fuzzy_membership(max(c.tcpa, 0.0), *params.tcpa)
            + fuzzy_membership(d_s, *params.dist)) / 3.0


def track_risk(p, psi: float, v: float, track: ObstacleTrack, t: float,
               params: RiskParams, tcpa_form: str = "range") -> float:
    """Risk index of one track; receding tracks score 0, co-moving ones use range only."""
    pm = track.position(t)
    d_s = math.hypot(p[0] - pm[0], p[1] - pm[1])
    try:
        c = cpa(p, psi, v, track, t, tcpa_form)
    except NoRelativeMotion:
        return fuzzy_membership(d_s, *params.dist)
    if not c.approaching:
        return 0.0
    return risk_index(c, d_s, params)


def risk_trigger(ri: float, K: float) -> bool:
    return ri >= K
