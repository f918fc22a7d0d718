"""Planar geometry: angles, LOS frames and convex-set construction/intersection.

All polygons are lists of ``(x, y)`` tuples in counter-clockwise order.  The
constructions here are conservative: a polygonised region always contains the
exact region it stands for, so an intersection test can only err towards
reporting a (false) intersection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

from .errors import DegenerateGeometry, InvalidArgument

TWO_PI = 2.0 * math.pi

#: number of vertices used to polygonise a disc
DISC_VERTICES = 64


class Vec2(NamedTuple):
    x: float
    y: float

    def __add__(self, other):  # type: ignore[override]
        return Vec2(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Vec2(self.x - other[0], self.y - other[1])

    def __mul__(self, k):  # type: ignore[override]
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def __neg__(self):
        return Vec2(-self.x, -self.y)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def dot(self, other) -> float:
        return self.x * other[0] + self.y * other[1]

    def cross(self, other) -> float:
        return self.x * other[1] - self.y * other[0]


def wrap_angle(theta: float) -> float:
    """Wrap an angle to the half-open interval (-pi, pi]."""
    if not math.isfinite(theta):
        raise InvalidArgument(f"cannot wrap non-finite angle {theta!r}")
    if -math.pi < theta <= math.pi:
        return theta
    r = math.fmod(theta + math.pi, TWO_PI)
    if r <= 0.0:
        r += TWO_PI
    r -= math.pi
    if r <= -math.pi:
        r = math.pi
    return r


def bearing(frm: Sequence[float], to: Sequence[float]) -> float:
    dx = to[0] - frm[0]
    dy = to[1] - frm[1]
    if dx == 0.0 and dy == 0.0:
        raise DegenerateGeometry("bearing between coincident points")
    return math.atan2(dy, dx)


@dataclass(frozen=True)
class FrameTransform:
    """Rigid map ``q = R(rotation) p + translation``."""

    rotation: float
    translation: Vec2 = Vec2(0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "_c", math.cos(self.rotation))
        object.__setattr__(self, "_s", math.sin(self.rotation))

    def apply(self, p: Sequence[float]) -> Vec2:
        c, s = self._c, self._s  # type: ignore[attr-defined]
        return Vec2(c * p[0] - s * p[1] + self.translation[0],
                    s * p[0] + c * p[1] + self.translation[1])

    def inverse(self, q: Sequence[float]) -> Vec2:
        c, s = self._c, self._s  # type: ignore[attr-defined]
        x = q[0] - self.translation[0]
        y = q[1] - self.translation[1]
        return Vec2(c * x + s * y, -s * x + c * y)

    def apply_angle(self, psi: float) -> float:
        return wrap_angle(psi + self.rotation)

    def inverse_angle(self, psi: float) -> float:
        return wrap_angle(psi - self.rotation)


def los_frame(p_ref: Sequence[float], p_target: Sequence[float]) -> FrameTransform:
    """Frame with ``p_ref`` at the origin and ``p_target`` on the positive x-axis."""
    rot = -bearing(p_ref, p_target)
    c, s = math.cos(rot), math.sin(rot)
    t = Vec2(-(c * p_ref[0] - s * p_ref[1]), -(s * p_ref[0] + c * p_ref[1]))
    return FrameTransform(rot, t)


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle ``|x - cx| <= half_x, |y - cy| <= half_y``."""

    center: Vec2
    half_x: float
    half_y: float

    def __post_init__(self):
        if not (self.half_x > 0 and self.half_y > 0):
            raise InvalidArgument("box half extents must be positive")

    @property
    def xmin(self) -> float:
        return self.center[0] - self.half_x

    @property
    def xmax(self) -> float:
        return self.center[0] + self.half_x

    @property
    def ymin(self) -> float:
        return self.center[1] - self.half_y

    @property
    def ymax(self) -> float:
        return self.center[1] + self.half_y

    def vertices(self) -> list[Vec2]:
        """V1..V4, counter-clockwise from the (min x, min y) corner."""
        return [Vec2(self.xmin, self.ymin), Vec2(self.xmax, self.ymin),
                Vec2(self.xmax, self.ymax), Vec2(self.xmin, self.ymax)]

    def contains(self, p: Sequence[float]) -> bool:
        return (abs(p[0] - self.center[0]) <= self.half_x
                and abs(p[1] - self.center[1]) <= self.half_y)

    def polygon(self) -> list[tuple[float, float]]:
        return [tuple(v) for v in self.vertices()]


@dataclass(frozen=True)
class ConvexRegion:
    """A convex region together with a containing convex polygon.

    ``kind`` is one of ``"disc-point-hull"``, ``"inflated-segment"``,
    ``"polygon"``; ``params`` keeps the defining geometry.
    """

    kind: str
    vertices: tuple
    params: dict = field(default_factory=dict, compare=False)

    def polygon(self) -> list[tuple[float, float]]:
        return list(self.vertices)


Region = Union[Box, ConvexRegion, Sequence]


# -- polygon helpers -------------------------------------------------------

def convex_hull(points) -> list[tuple[float, float]]:
    """Andrew's monotone chain; CCW, collinear points dropped."""
    pts = sorted(set((float(p[0]), float(p[1])) for p in points))
    if len(pts) <= 2:
        return pts

    def half(seq):
        out: list = []
        for p in seq:
            while len(out) >= 2:
                ox, oy = out[-2]
                ax, ay = out[-1]
                if (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox) <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return lower[:-1] + upper[:-1]


def disc_polygon(center: Sequence[float], r: float, n: int = DISC_VERTICES):
    """Regular n-gon circumscribing the disc (its edges are tangent to it)."""
    big = r / math.cos(math.pi / n)
    cx, cy = center[0], center[1]
    return [(cx + big * math.cos(TWO_PI * k / n), cy + big * math.sin(TWO_PI * k / n))
            for k in range(n)]


def point_in_polygon(p: Sequence[float], poly) -> bool:
    """Closed containment test for a CCW convex polygon."""
    n = len(poly)
    if n == 1:
        return p[0] == poly[0][0] and p[1] == poly[0][1]
    if n == 2:
        return point_segment_distance(p, poly[0], poly[1]) == 0.0
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        if (bx - ax) * (p[1] - ay) - (by - ay) * (p[0] - ax) < 0:
            return False
    return True


def point_segment_distance(p, a, b) -> float:
    ax, ay = a[0], a[1]
    dx, dy = b[0] - ax, b[1] - ay
    px, py = p[0] - ax, p[1] - ay
    ll = dx * dx + dy * dy
    if ll == 0.0:
        return math.hypot(px, py)
    s = (px * dx + py * dy) / ll
    if s <= 0.0:
        return math.hypot(px, py)
    if s >= 1.0:
        return math.hypot(px - dx, py - dy)
    return abs(px * dy - py * dx) / math.sqrt(ll)


def _as_polygon(region: Region):
    if isinstance(region, (Box, ConvexRegion)):
        return region.polygon()
    return [tuple(v) for v in region]


def _axes(poly):
    n = len(poly)
    if n == 1:
        return []
    if n == 2:
        (ax, ay), (bx, by) = poly
        return [(-(by - ay), bx - ax), (bx - ax, by - ay)]
    out = []
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        out.append((-(by - ay), bx - ax))
    return out


def polygons_intersect(p1, p2) -> bool:
    """Separating-axis test for convex polygons; touching counts as intersecting."""
    axes = _axes(p1) + _axes(p2)
    if not axes:
        return p1[0] == p2[0]
    for nx, ny in axes:
        if nx == 0.0 and ny == 0.0:
            continue
        lo1 = hi1 = p1[0][0] * nx + p1[0][1] * ny
        for x, y in p1[1:]:
            d = x * nx + y * ny
            if d < lo1:
                lo1 = d
            elif d > hi1:
                hi1 = d
        lo2 = hi2 = p2[0][0] * nx + p2[0][1] * ny
        for x, y in p2[1:]:
            d = x * nx + y * ny
            if d < lo2:
                lo2 = d
            elif d > hi2:
                hi2 = d
        if hi1 < lo2 or hi2 < lo1:
            return False
    return True


def regions_intersect(a: Region, b: Region) -> bool:
    """True iff the conservative polygonal representations of ``a`` and ``b`` meet."""
    return polygons_intersect(_as_polygon(a), _as_polygon(b))


# -- region constructors ---------------------------------------------------

def ship_reach_region(p0: Sequence[float], v: float, t_p: float,
                      p_goal: Sequence[float]) -> ConvexRegion:
    """Convex hull of the transient disc ``B2(p0, v t_p)`` and the goal point."""
    if not (v > 0 and t_p > 0):
        raise InvalidArgument("ship_reach_region needs v > 0 and t_p > 0")
    r = v * t_p
    disc = disc_polygon(p0, r)
    params = {"center": Vec2(*p0[:2]), "radius": r, "apex": Vec2(*p_goal[:2])}
    if math.hypot(p_goal[0] - p0[0], p_goal[1] - p0[1]) <= r:
        return ConvexRegion("disc-point-hull", tuple(disc), params)
    return ConvexRegion("disc-point-hull", tuple(convex_hull(disc + [tuple(p_goal[:2])])), params)


def inflated_segment(a: Sequence[float], b: Sequence[float], half_width: float) -> ConvexRegion:
    """Segment ``[a, b]`` Minkowski-summed with the square ``B_inf(0, half_width)``."""
    h = half_width
    pts = []
    for px, py in (a, b):
        pts += [(px - h, py - h), (px + h, py - h), (px + h, py + h), (px - h, py + h)]
    if h == 0:
        pts = [tuple(a), tuple(b)]
    poly = convex_hull(pts)
    return ConvexRegion("inflated-segment", tuple(poly),
                        {"a": Vec2(*a), "b": Vec2(*b), "half_width": h})


def obstacle_reach_region(track, t0: float, T: float, C_s: float) -> ConvexRegion:
    """Swept positions of a constant-velocity track over ``[t0, t0+T]``, inflated by C_s."""
    if T < 0:
        raise InvalidArgument("horizon T must be non-negative")
    if C_s < 0:
        raise InvalidArgument("C_s must be non-negative")
    a = track.position(t0)
    b = track.position(t0 + T)
    return inflated_segment(a, b, C_s)


# -- fast paths used by the supervisor on every step ------------------------

def segment_box_distance(a, b, box: Box) -> float:
    """Euclidean distance between a segment and an axis-aligned box (0 if they meet)."""
    if segment_hits_box(a, b, box):
        return 0.0
    d = min(_point_box_distance(a, box), _point_box_distance(b, box))
    for v in box.vertices():
        d = min(d, point_segment_distance(v, a, b))
    return d


def _point_box_distance(p, box: Box) -> float:
    dx = max(box.xmin - p[0], 0.0, p[0] - box.xmax)
    dy = max(box.ymin - p[1], 0.0, p[1] - box.ymax)
    return math.hypot(dx, dy)


def segment_hits_box(a, b, box: Box) -> bool:
    """Liang-Barsky clip of segment ``[a, b]`` against a closed box."""
    x0, y0 = a[0], a[1]
    dx, dy = b[0] - x0, b[1] - y0
    t0, t1 = 0.0, 1.0
    for p, q in ((-dx, x0 - box.xmin), (dx, box.xmax - x0),
                 (-dy, y0 - box.ymin), (dy, box.ymax - y0)):
        if p == 0.0:
            if q < 0.0:
                return False
            continue
        r = q / p
        if p < 0.0:
            if r > t1:
                return False
            if r > t0:
                t0 = r
        else:
            if r < t0:
                return False
            if r < t1:
                t1 = r
    return True


def hull_hits_box(center, r: float, apex, box: Box) -> bool:
    """``regions_intersect(ship_reach_region(center, r, 1, apex), box)`` with cheap exits.

    The polygonised hull lies inside the capsule of radius ``r / cos(pi/n)``
    around ``[center, apex]`` and contains that segment, which settles most
    queries without building the hull.
    """
    big = r / math.cos(math.pi / DISC_VERTICES)
    bx, by = box.center
    circ = math.hypot(box.half_x, box.half_y)
    if point_segment_distance((bx, by), center, apex) > big + circ:
        return False
    if segment_hits_box(center, apex, box):
        return True
    if segment_box_distance(center, apex, box) > big:
        return False
    return regions_intersect(ship_reach_region(center, r, 1.0, apex), box)
