"""LOS guidance toward a point and the predefined-time heading controller."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .dynamics import ShipParams
from .errors import InfeasibleConstraint, InvalidArgument, SingularityError
from .geometry import bearing, wrap_angle

log = logging.getLogger(__name__)

#: below this range the LOS rate is treated as singular
RATE_FLOOR = 1e-6


@dataclass(frozen=True)
class GuidanceConfig:
    t_p: float = 1.0
    eta: float = 3.5
    delta: float = 1.0

    def __post_init__(self):
        if not self.t_p > 0:
            raise InvalidArgument("t_p must be positive")
        if not self.eta > 1:
            raise InvalidArgument("eta must exceed 1")
        if not self.delta > 0:
            raise InvalidArgument("delta must be positive")

    @classmethod
    def for_ship(cls, params: ShipParams, t_p: float = 1.0, eta: float = 3.5,
                 delta: float | None = None, e_max: float = math.pi,
                 strict: bool = True) -> "GuidanceConfig":
        """Build a config whose terminal radius honours the input bound.

        With ``delta=None`` the smallest feasible radius is used.  A radius
        below the bound raises, or only warns when ``strict`` is false (the
        bound itself may be infeasible for small ``m``).
        """
        try:
            dmin = min_terminal_radius(params, eta, t_p, e_max)
        except InfeasibleConstraint:
            if delta is None or strict:
                raise
            log.warning("terminal-radius bound infeasible for m=%g, a=%g; using delta=%g",
                        params.m, params.a, delta)
            return cls(t_p, eta, delta)
        if delta is None:
            return cls(t_p, eta, dmin)
        if delta < dmin:
            if strict:
                raise InfeasibleConstraint(
                    f"delta={delta} below the feasible minimum {dmin}", {"delta_min": dmin})
            log.warning("delta=%g is below the feasible minimum %g", delta, dmin)
        return cls(t_p, eta, delta)


def desired_heading(p, p_target) -> float:
    return bearing(p, p_target)


def desired_heading_rate(p, psi: float, p_target, v: float) -> float:
    """Analytic time derivative of the LOS angle for a fixed target."""
    dx = p_target[0] - p[0]
    dy = p_target[1] - p[1]
    d2 = dx * dx + dy * dy
    if d2 < RATE_FLOOR * RATE_FLOOR:
        raise SingularityError(f"LOS rate undefined at range {math.sqrt(d2):.3g} m")
    return v * (dy * math.cos(psi) - dx * math.sin(psi)) / d2


def predefined_time_control(p, psi: float, p_target, t: float, t0: float,
                            cfg: GuidanceConfig, params: ShipParams,
                            dt: float | None = None) -> float:
    """Raw (unsaturated) heading command driving psi onto the LOS by ``t0 + t_p``.

    When ``dt`` is given the last step before ``t0 + t_p`` already uses the
    hold-heading branch, which keeps the command bounded on a time grid.
    """
    t_end = t0 + cfg.t_p
    remaining = t_end - t
    if t < t0 or remaining <= 0.0:
        return psi
    if dt is not None and remaining < 1.5 * dt:
        return psi
    psi_dg = bearing(p, p_target)
    e = wrap_angle(psi - psi_dg)
    rate = desired_heading_rate(p, psi, p_target, params.v)
    return rate / params.a + psi - cfg.eta * (-math.expm1(-e)) / (params.a * remaining)


def asymptotic_control(p, psi: float, p_target, params: ShipParams) -> float:
    """Exponentially converging law; kept only for comparison tests."""
    psi_dg = bearing(p, p_target)
    return desired_heading_rate(p, psi, p_target, params.v) / params.a + psi - wrap_angle(psi - psi_dg)


def min_terminal_radius(params: ShipParams, eta: float, t_p: float,
                        e_max: float = math.pi) -> float:
    """Smallest terminal radius for which the command stays within ``|u| <= m``."""
    a = params.a
    lag_term = a * math.pi
    transient_term = eta * abs(-math.expm1(-e_max)) / t_p
    den = a * params.m - lag_term - transient_term
    if den <= 0:
        raise InfeasibleConstraint(
            f"no terminal radius keeps |u| <= m: a*m={a * params.m:.4g}, "
            f"a*pi={lag_term:.4g}, transient={transient_term:.4g}",
            {"a_m": a * params.m, "a_pi": lag_term, "transient": transient_term})
    return 2.0 * params.v / den


def reach_time_bound(d_at_tp: float, v: float, t_p: float) -> float:
    """Upper bound on the time to reach the waypoint, counted from the window start."""
    if d_at_tp < 0 or not v > 0:
        raise InvalidArgument("need d >= 0 and v > 0")
    return t_p + d_at_tp / v
