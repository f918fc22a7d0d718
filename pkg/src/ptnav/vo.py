"""Velocity-obstacle heading selector used as the comparison baseline.

Headings are searched on a fixed 1 degree grid; the grid, the tie-break and
the horizon are plain choices made for determinism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import ObstacleTrack
from .geometry import Vec2, bearing, wrap_angle

GRID_DEG = 1.0


@dataclass(frozen=True)
class VoCone:
    apex: Vec2
    axis: float          # bearing from the ship to the obstacle
    half_angle: float    # pi for an emergency full cone
    velocity: Vec2       # obstacle velocity; the cone lives in relative-velocity space
    source: str = "obs"

    @property
    def left(self) -> float:
        return wrap_angle(self.axis + self.half_angle)

    @property
    def right(self) -> float:
        return wrap_angle(self.axis - self.half_angle)

    def contains_heading(self, psi: float, v: float) -> bool:
        vr = (v * math.cos(psi) - self.velocity[0], v * math.sin(psi) - self.velocity[1])
        if self.half_angle >= math.pi:
            return True
        if vr == (0.0, 0.0):
            return False
        return abs(wrap_angle(math.atan2(vr[1], vr[0]) - self.axis)) < self.half_angle


def vo_cones(p, tracks: Sequence[ObstacleTrack], C_s: float, t: float, v: float,
             horizon: float = math.inf) -> list:
    """One cone per obstacle, dropping those that cannot be reached within ``horizon``.

    The reach test is conservative: a track counts when its range minus
    ``C_s`` can be closed at the largest possible closing speed.
    """
    cones = []
    for tr in tracks:
        pm = tr.position(t)
        rng = math.hypot(pm[0] - p[0], pm[1] - p[1])
        if rng <= C_s:
            cones.append(VoCone(Vec2(*p), 0.0, math.pi, tr.velocity, tr.id))
            continue
        if (rng - C_s) > (v + tr.v_o) * horizon:
            continue
        cones.append(VoCone(Vec2(*p), bearing(p, pm), math.asin(C_s / rng), tr.velocity, tr.id))
    return cones


def _clearance(headings: np.ndarray, v: float, cones: list) -> np.ndarray:
    """Angular margin of each heading's relative velocity outside the nearest cone."""
    out = np.full(headings.shape, np.inf)
    hx = v * np.cos(headings)
    hy = v * np.sin(headings)
    for c in cones:
        if c.half_angle >= math.pi:
            out = np.minimum(out, -math.pi)
            continue
        vx = hx - c.velocity[0]
        vy = hy - c.velocity[1]
        ang = np.arctan2(vy, vx) - c.axis
        ang = np.abs((ang + np.pi) % (2 * np.pi) - np.pi)
        out = np.minimum(out, ang - c.half_angle)
    return out


def vo_select_heading(p, psi: float, v: float, tracks: Sequence[ObstacleTrack], p_w,
                      C_s: float, t: float, horizon: float = math.inf) -> float:
    """Heading command for the VO baseline.

    Candidates step out from the bearing to the waypoint, starboard first at
    each offset.  With every candidate blocked the widest-margin heading wins.
    The result is unwrapped next to ``psi`` so the lag model turns the short way.
    """
    goal = bearing(p, p_w)
    cones = vo_cones(p, tracks, C_s, t, v, horizon)
    if not cones:
        h = goal
    else:
        n = int(round(180.0 / GRID_DEG))
        k = np.arange(0, n + 1)
        offs = np.empty(2 * n + 1)
        offs[0] = 0.0
        offs[1::2] = -k[1:] * GRID_DEG   # starboard
        offs[2::2] = k[1:] * GRID_DEG
        cand = goal + np.radians(offs)
        clr = _clearance(cand, v, cones)
        free = np.nonzero(clr > 0.0)[0]
        idx = int(free[0]) if free.size else int(np.argmax(clr))
        h = float(cand[idx])
    return psi + wrap_angle(h - psi)
