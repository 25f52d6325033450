"""
2D geometry kernel: incircles, lines, circle intersections and the
tracking-zone construction built on top of them.

All values are immutable. Tolerances are absolute (metres) unless noted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .errors import (
    CoincidentCircles,
    CoincidentPoints,
    DegenerateTriangle,
    GeometryError,
    UnstableGeometry,
)

EPS = 1e-9
ANGLE_EPS = 1e-6
# default zone radius floor, metres
R_MIN = 0.5


class GeometryWarning(UserWarning):
    """Diagnostic for inputs that are self-inconsistent but still usable."""


@dataclass(frozen=True, slots=True)
class Point2D:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError(f"non-finite point ({self.x}, {self.y})")

    def __add__(self, other: "Point2D") -> "Point2D":
        return Point2D(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Point2D") -> "Point2D":
        return Point2D(self.x - other.x, self.y - other.y)

    def scale(self, k: float) -> "Point2D":
        return Point2D(self.x * k, self.y * k)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def as_tuple(self) -> Tuple[float, float]:
        return (self.x, self.y)


def dist(p: Point2D, q: Point2D) -> float:
    return math.hypot(p.x - q.x, p.y - q.y)


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


@dataclass(frozen=True, slots=True)
class LineParams:
    """Either ``y = slope*x + intercept`` or, when ``vertical``, ``x = x0``.

    The slope/intercept pair is symmetric in the two defining points, so
    swapping them yields an identical object.
    """

    slope: float = 0.0
    intercept: float = 0.0
    vertical: bool = False
    x0: float = 0.0

    def __post_init__(self):
        vals = (self.x0,) if self.vertical else (self.slope, self.intercept)
        if not all(math.isfinite(v) for v in vals):
            raise GeometryError("non-finite line parameters")

    def contains(self, p: Point2D, tol: float = EPS) -> bool:
        if self.vertical:
            return abs(p.x - self.x0) <= tol
        return abs(self.slope * p.x + self.intercept - p.y) <= tol

    def anchor_and_direction(self) -> Tuple[Point2D, Tuple[float, float]]:
        """A point on the line and a unit direction vector."""
        if self.vertical:
            return Point2D(self.x0, 0.0), (0.0, 1.0)
        n = math.hypot(1.0, self.slope)
        return Point2D(0.0, self.intercept), (1.0 / n, self.slope / n)


@dataclass(frozen=True, slots=True)
class Circle:
    center: Point2D
    radius: float

    def __post_init__(self):
        if not math.isfinite(self.radius) or self.radius < 0:
            raise GeometryError(f"invalid radius {self.radius}")


@dataclass(frozen=True, slots=True)
class TriangleSides:
    d1: float
    d2: float
    d3: float

    @property
    def s(self) -> float:
        return (self.d1 + self.d2 + self.d3) / 2.0

    def is_valid(self) -> bool:
        a, b, c = self.d1, self.d2, self.d3
        return a > 0 and b > 0 and c > 0 and a + b > c and a + c > b and b + c > a


@dataclass(frozen=True, slots=True)
class TrackingZone:
    center: Point2D
    radius: float
    created_step: int = 0

    def __post_init__(self):
        if not math.isfinite(self.radius) or self.radius < 0:
            raise GeometryError(f"invalid zone radius {self.radius}")

    def as_circle(self) -> Circle:
        return Circle(self.center, self.radius)


# ---------------------------------------------------------------------------
# incircle
# ---------------------------------------------------------------------------

def inradius(sides: TriangleSides) -> float:
    """Radius of the inscribed circle, sqrt((s-d1)(s-d2)(s-d3)/s).

    The product is evaluated in Kahan's cancellation-free arrangement
    (sides sorted a >= b >= c), which is algebraically the same quantity.
    """
    if not sides.is_valid():
        raise DegenerateTriangle(
            f"sides ({sides.d1}, {sides.d2}, {sides.d3}) violate the strict triangle inequality")
    a, b, c = sorted((sides.d1, sides.d2, sides.d3), reverse=True)
    num = (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    r2 = num / (4.0 * (a + (b + c)))
    if r2 <= 0:
        raise DegenerateTriangle("zero-area triangle")
    return math.sqrt(r2)


def incircle(va: Point2D, vb: Point2D, vc: Point2D) -> Circle:
    a = dist(vb, vc)
    b = dist(va, vc)
    c = dist(va, vb)
    area2 = _cross(vb.x - va.x, vb.y - va.y, vc.x - va.x, vc.y - va.y)
    scale = max(a, b, c)
    if scale == 0 or abs(area2) <= 1e-12 * scale * scale:
        raise DegenerateTriangle("collinear vertices")
    p = a + b + c
    center = Point2D((a * va.x + b * vb.x + c * vc.x) / p,
                     (a * va.y + b * vb.y + c * vc.y) / p)
    return Circle(center, inradius(TriangleSides(a, b, c)))


# ---------------------------------------------------------------------------
# lines and circles
# ---------------------------------------------------------------------------

def line_through(p_prev: Point2D, p_cur: Point2D) -> LineParams:
    dx = p_cur.x - p_prev.x
    if dx == 0.0 and p_cur.y == p_prev.y:
        raise CoincidentPoints("line through coincident points")
    if abs(dx) <= 1e-12 * max(1.0, abs(p_cur.x), abs(p_prev.x)):
        return LineParams(vertical=True, x0=(p_cur.x + p_prev.x) / 2.0)
    k = (p_cur.y - p_prev.y) / dx
    c = (p_cur.x * p_prev.y - p_prev.x * p_cur.y) / dx
    return LineParams(slope=k, intercept=c)


def motion_circle(p_prev: Point2D, p_cur: Point2D) -> Circle:
    """Circle of radius half the last displacement, centred on the latest fix."""
    d = dist(p_prev, p_cur)
    if d == 0.0:
        raise CoincidentPoints("no displacement between the last two fixes")
    return Circle(p_cur, d / 2.0)


def _tangent_tol(r: float) -> float:
    return 1e-12 * max(1.0, r)


def intersect_line_circle(line: LineParams, circle: Circle) -> List[Point2D]:
    """0, 1 or 2 intersection points, ordered by position along the line."""
    a, (ux, uy) = line.anchor_and_direction()
    cx, cy = circle.center.x, circle.center.y
    # foot of the perpendicular from the centre
    t0 = (cx - a.x) * ux + (cy - a.y) * uy
    fx, fy = a.x + t0 * ux, a.y + t0 * uy
    h = math.hypot(cx - fx, cy - fy)
    r = circle.radius
    if h > r + _tangent_tol(r):
        return []
    if abs(h - r) <= _tangent_tol(r):
        return [Point2D(fx, fy)]
    w = math.sqrt((r - h) * (r + h))
    return [Point2D(fx - w * ux, fy - w * uy), Point2D(fx + w * ux, fy + w * uy)]


def intersect_circles(c1: Circle, c2: Circle) -> List[Point2D]:
    """Intersections of two circles, sorted by (x, y) so the result is
    independent of argument order."""
    dx = c2.center.x - c1.center.x
    dy = c2.center.y - c1.center.y
    d = math.hypot(dx, dy)
    r1, r2 = c1.radius, c2.radius
    if d == 0.0:
        if r1 == r2:
            raise CoincidentCircles("identical circles")
        return []
    tol = _tangent_tol(max(r1, r2, d))
    if d > r1 + r2 + tol or d < abs(r1 - r2) - tol:
        return []
    # distance from c1 along the centre line to the radical line
    a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d)
    ux, uy = dx / d, dy / d
    h2 = r1 * r1 - a * a
    mx, my = c1.center.x + a * ux, c1.center.y + a * uy
    # half-chord of a circle pair separated from tangency by `tol`
    if h2 <= 2.0 * max(r1, r2) * tol:
        return [Point2D(mx, my)]
    h = math.sqrt(h2)
    pts = [Point2D(mx - h * uy, my + h * ux), Point2D(mx + h * uy, my - h * ux)]
    pts.sort(key=lambda p: (p.x, p.y))
    return pts


# ---------------------------------------------------------------------------
# zone construction
# ---------------------------------------------------------------------------

def _unit(dx: float, dy: float) -> Tuple[float, float]:
    n = math.hypot(dx, dy)
    return dx / n, dy / n


def _check_d_average(ref_a, ref_c, b_cur, d_a, d_c, factor):
    d_avg = (d_a + d_c) / 2.0
    mid = Point2D((ref_a.x + ref_c.x) / 2.0, (ref_a.y + ref_c.y) / 2.0)
    # a median never exceeds the mean of its adjacent sides
    if dist(b_cur, mid) > factor * d_avg:
        warnings.warn(
            f"fix {b_cur} lies {dist(b_cur, mid):.3f} m from the reference midpoint, "
            f"more than {factor}x the average range {d_avg:.3f} m",
            GeometryWarning, stacklevel=3)


def build_prediction_triangle(ref_a: Point2D, ref_c: Point2D, b_prev: Point2D, b_cur: Point2D,
                              d_a: float, d_c: float,
                              d_average_factor: float = 2.0) -> Tuple[Point2D, Point2D, Point2D]:
    """Apex at the latest fix, base parallel to the reference baseline.

    The base passes through the forward point Q = b_cur + r_n * u (u the unit
    motion vector, r_n half the last displacement). Its corners are where the
    rays ref_a -> b_cur and ref_c -> b_cur, extended past the fix, cross it.
    Returns ``(b_cur, x_a, x_c)``.
    """
    if d_a <= 0 or d_c <= 0:
        raise GeometryError("ranges must be positive")
    mc = motion_circle(b_prev, b_cur)
    ux, uy = _unit(b_cur.x - b_prev.x, b_cur.y - b_prev.y)
    q = Point2D(b_cur.x + mc.radius * ux, b_cur.y + mc.radius * uy)

    if ref_a == ref_c:
        raise UnstableGeometry("references coincide")
    ex, ey = _unit(ref_c.x - ref_a.x, ref_c.y - ref_a.y)
    # motion must carry the base strictly ahead of the apex
    if abs(_cross(ex, ey, ux, uy)) < ANGLE_EPS:
        raise UnstableGeometry("motion parallel to the reference baseline")

    _check_d_average(ref_a, ref_c, b_cur, d_a, d_c, d_average_factor)

    corners = []
    for ref in (ref_a, ref_c):
        vx, vy = b_cur.x - ref.x, b_cur.y - ref.y
        n = math.hypot(vx, vy)
        if n == 0.0:
            raise UnstableGeometry("fix coincides with a reference")
        sx, sy = vx / n, vy / n
        denom = _cross(sx, sy, ex, ey)
        if abs(denom) < ANGLE_EPS:
            raise UnstableGeometry("side ray parallel to the base line")
        # b_cur + t*s lies on the base line {q + s'*e}
        t = _cross(q.x - b_cur.x, q.y - b_cur.y, ex, ey) / denom
        corners.append(Point2D(b_cur.x + t * sx, b_cur.y + t * sy))
    return b_cur, corners[0], corners[1]


def clamp_zone_radius(r_m: float, r_n: float, r_min: float = R_MIN) -> float:
    return max(r_min, min(r_m, r_n))


def predict_zone(ref_a: Point2D, ref_c: Point2D, b_prev: Point2D, b_cur: Point2D,
                 d_a: float, d_c: float, *, r_min: float = R_MIN, step: int = 0,
                 d_average_factor: float = 2.0) -> TrackingZone:
    """Zone where the target is expected next.

    Centre is the forward intersection of the motion line with the motion
    circle; radius is the prediction triangle's inradius clamped to
    ``[r_min, r_n]``. When the triangle cannot be built the motion circle
    itself (floored at ``r_min``) is the zone.
    """
    mc = motion_circle(b_prev, b_cur)
    r_n = mc.radius
    try:
        tri = build_prediction_triangle(ref_a, ref_c, b_prev, b_cur, d_a, d_c,
                                        d_average_factor=d_average_factor)
        r_m = incircle(*tri).radius
    except (UnstableGeometry, DegenerateTriangle):
        return TrackingZone(b_cur, max(r_min, r_n), step)
    ux, uy = _unit(b_cur.x - b_prev.x, b_cur.y - b_prev.y)
    center = Point2D(b_cur.x + r_n * ux, b_cur.y + r_n * uy)
    return TrackingZone(center, clamp_zone_radius(r_m, r_n, r_min), step)


def zone_contains(zone: TrackingZone, p: Point2D) -> bool:
    return dist(zone.center, p) <= zone.radius


def point_line_distance(p: Point2D, a: Point2D, b: Point2D) -> float:
    """Distance from ``p`` to the infinite line through ``a`` and ``b``."""
    return abs(_cross(b.x - a.x, b.y - a.y, p.x - a.x, p.y - a.y)) / dist(a, b)


def nearest(candidates: List[Point2D], target: Optional[Point2D]) -> Point2D:
    return min(candidates, key=lambda p: dist(p, target))
