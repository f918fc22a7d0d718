"""Own-ship and obstacle kinematics, RK4 integration and the predefined-time flow.

Units are SI throughout (m, s, rad).  Conversions from nautical units happen
only where scenarios are loaded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InfeasibleConstraint, InvalidArgument
from .geometry import Vec2, wrap_angle

NMI = 1852.0
KNOT = 1852.0 / 3600.0


@dataclass(frozen=True)
class ShipState:
    p: Vec2
    psi: float
    t: float = 0.0


@dataclass(frozen=True)
class ShipParams:
    """Constant speed ``v``, heading lag ``a``, heading-rate limit ``c`` and input bound ``m``.

    Either ``c`` or ``m`` may be given; the other follows from ``m = (c - a pi)/a``.
    """

    v: float
    a: float
    m: float

    def __post_init__(self):
        if not self.v > 0:
            raise InvalidArgument("ship speed must be positive")
        if not self.a > 0:
            raise InvalidArgument("heading constant a must be positive")
        if not self.m > 0:
            raise InvalidArgument("input bound m must be positive")

    @property
    def c(self) -> float:
        return self.a * (math.pi + self.m)

    @classmethod
    def from_rate_limit(cls, v: float, a: float, c: float) -> "ShipParams":
        return cls(v=v, a=a, m=admissible_bound(c, a))


@dataclass(frozen=True)
class ObstacleTrack:
    p0: Vec2
    psi_m: float
    v_o: float = 0.0
    id: str = field(default="obs")

    def __post_init__(self):
        if self.v_o < 0:
            raise InvalidArgument("obstacle speed must be non-negative")
        object.__setattr__(self, "p0", Vec2(float(self.p0[0]), float(self.p0[1])))
        object.__setattr__(self, "_vx", self.v_o * math.cos(self.psi_m))
        object.__setattr__(self, "_vy", self.v_o * math.sin(self.psi_m))

    @property
    def is_static(self) -> bool:
        return self.v_o == 0.0

    @property
    def velocity(self) -> Vec2:
        return Vec2(self._vx, self._vy)  # type: ignore[attr-defined]

    def position(self, t: float) -> Vec2:
        return Vec2(self.p0[0] + t * self._vx, self.p0[1] + t * self._vy)  # type: ignore[attr-defined]


def obstacle_position(track: ObstacleTrack, t: float) -> Vec2:
    if t < 0:
        raise InvalidArgument("obstacle time must be non-negative")
    return track.position(t)


def ship_derivative(s: ShipState, u: float, params: ShipParams) -> tuple[float, float, float]:
    if not math.isfinite(u):
        raise InvalidArgument("control must be finite")
    psi = wrap_angle(s.psi)
    return (params.v * math.cos(psi), params.v * math.sin(psi), -params.a * psi + params.a * u)


def _rhs(psi: float, u: float, v: float, a: float):
    return v * math.cos(psi), v * math.sin(psi), a * (u - psi)


def rk4_step(s: ShipState, u: float, dt: float, params: ShipParams) -> ShipState:
    """Advance one classical RK4 step with ``u`` held over the step.

    Inside the step the heading is kept continuous; it is wrapped once at the end.
    """
    if not dt > 0:
        raise InvalidArgument("dt must be positive")
    v, a = params.v, params.a
    x, y, psi = s.p[0], s.p[1], s.psi
    k1 = _rhs(psi, u, v, a)
    h = 0.5 * dt
    k2 = _rhs(psi + h * k1[2], u, v, a)
    k3 = _rhs(psi + h * k2[2], u, v, a)
    k4 = _rhs(psi + dt * k3[2], u, v, a)
    w = dt / 6.0
    nx = x + w * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    ny = y + w * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    npsi = psi + w * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    return ShipState(Vec2(nx, ny), wrap_angle(npsi), s.t + dt)


def predefined_time_flow(x: float, t: float, t0: float, t_p: float, eta: float) -> float:
    """Right-hand side of the scalar flow that reaches 0 exactly at ``t_p``.

    Uses ``1 - exp(-x)`` in place of ``(exp(x) - 1)/exp(x)``.
    """
    if not eta > 1:
        raise InvalidArgument("eta must exceed 1")
    if not t0 < t_p:
        raise InvalidArgument("t0 must precede t_p")
    if t >= t_p:
        return 0.0
    return -eta * (-math.expm1(-x)) / (t_p - t)


def admissible_bound(c: float, a: float) -> float:
    """Input bound ``m`` implied by the heading-rate limit ``c``."""
    if c <= a * math.pi:
        raise InfeasibleConstraint(
            f"heading-rate limit c={c} does not exceed a*pi={a * math.pi}",
            {"c": c, "a_pi": a * math.pi})
    return (c - a * math.pi) / a


def predefined_flow_exact(x0: float, t: float, t0: float, t_p: float, eta: float) -> float:
    """Closed-form solution of the predefined-time flow.

    With ``w = exp(x) - 1`` the flow becomes ``w' = -eta w / (t_p - t)``.
    """
    if t >= t_p:
        return 0.0
    ratio = (t_p - t) / (t_p - t0)
    return math.log1p(math.expm1(x0) * ratio ** eta)


def integrate_predefined_flow(x0: float, t0: float, t_p: float, eta: float, dt: float):
    """Backward-Euler integration of the flow on ``[t0, t_p]``; returns ``(t, x)`` arrays.

    Each step solves ``y - x_n + c (1 - exp(-y)) = 0`` with ``c >= 0``.  The
    left side increases in ``y`` and changes sign between 0 and ``x_n``, so
    ``|x|`` can never grow and the step landing on ``t_p`` returns exactly 0.
    Explicit schemes overshoot there because the gain ``eta/(t_p - t)`` blows up.
    """
    import numpy as np

    if not eta > 1:
        raise InvalidArgument("eta must exceed 1")
    if not (t0 < t_p and dt > 0):
        raise InvalidArgument("need t0 < t_p and dt > 0")
    n = max(1, int(round((t_p - t0) / dt)))
    ts = np.linspace(t0, t_p, n + 1)
    xs = np.empty(n + 1)
    xs[0] = x = float(x0)
    for k in range(n):
        tau = t_p - ts[k + 1]
        if tau <= 0.0 or x == 0.0:
            x = 0.0
        else:
            x = _implicit_flow_step(x, (ts[k + 1] - ts[k]) * eta / tau)
        xs[k + 1] = x
    return ts, xs


def _implicit_flow_step(x: float, c: float) -> float:
    lo, hi = (0.0, x) if x > 0 else (x, 0.0)
    y = x / (1.0 + c)  # linearised guess, already inside the bracket
    for _ in range(60):
        g = y - x - c * math.expm1(-y)
        if g == 0.0:
            return y
        if g > 0:
            hi = y
        else:
            lo = y
        y_new = y - g / (1.0 + c * math.exp(-y))
        if not lo < y_new < hi:
            y_new = 0.5 * (lo + hi)
        if abs(y_new - y) <= 1e-15 * max(1.0, abs(y)):
            return y_new
        y = y_new
    return y
