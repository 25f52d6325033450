"""ToA/ToD ranging, noisy range and bearing measurements, and two-reference
triangulation with zone-based disambiguation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Hashable, Optional

import numpy as np

from .errors import AmbiguousFix, CoincidentPoints, GeometryError, NegativeFlight
from .geom import Circle, Point2D, TrackingZone, dist, intersect_circles, zone_contains
from .rf import SPEED_OF_LIGHT, wrap_angle

NS = 1e-9


@dataclass(frozen=True)
class TimestampPair:
    tod: float  # ns
    toa: float  # ns


@dataclass(frozen=True)
class ClockModel:
    bias: float = 0.0          # ns
    jitter_sigma: float = 3.0  # ns

    def __post_init__(self):
        if self.jitter_sigma < 0:
            raise ValueError("jitter_sigma must be non-negative")


@dataclass(frozen=True)
class RangeMeasurement:
    ref_id: Hashable
    distance: float
    sigma: float = 0.0

    def __post_init__(self):
        if not self.distance >= 0:
            raise ValueError(f"negative range {self.distance}")


@dataclass(frozen=True)
class BearingMeasurement:
    ref_id: Hashable
    bearing: float
    sigma: float = 0.0


def distance_from_timing(ts: TimestampPair, round_trip: bool = False) -> float:
    """Flight time times c. With ``round_trip`` the interval covers both legs."""
    if ts.toa < ts.tod:
        raise NegativeFlight(f"ToA {ts.toa} ns precedes ToD {ts.tod} ns")
    d = (ts.toa - ts.tod) * NS * SPEED_OF_LIGHT
    return d / 2.0 if round_trip else d


def measure_range(true_distance: float, clock: ClockModel, rng: np.random.Generator,
                  ref_id: Hashable = None) -> RangeMeasurement:
    if true_distance < 0:
        raise ValueError("true distance must be non-negative")
    # always consume one draw so streams stay aligned across noise settings
    z = rng.standard_normal()
    err_ns = clock.bias + clock.jitter_sigma * z
    d = max(0.0, true_distance + err_ns * NS * SPEED_OF_LIGHT) if err_ns else true_distance
    return RangeMeasurement(ref_id, d, clock.jitter_sigma * NS * SPEED_OF_LIGHT)


def bearing_to(ref: Point2D, target: Point2D) -> float:
    if ref == target:
        raise CoincidentPoints("bearing to a coincident point")
    return wrap_angle(math.atan2(target.y - ref.y, target.x - ref.x))


def measure_bearing(ref: Point2D, target: Point2D, sigma: float, rng: np.random.Generator,
                    ref_id: Hashable = None) -> BearingMeasurement:
    truth = bearing_to(ref, target)
    z = rng.standard_normal()
    b = wrap_angle(truth + sigma * z) if sigma else truth
    return BearingMeasurement(ref_id, b, sigma)


def repair_point(ref_a: Point2D, d_a: float, ref_c: Point2D, d_c: float) -> Point2D:
    """Best guess on the baseline when the two range circles do not meet.

    Disjoint circles split the segment in the ratio d_a:d_c. Nested circles
    take the midpoint of the two closest-approach points on the baseline,
    which keeps the result continuous at internal tangency.
    """
    L = dist(ref_a, ref_c)
    ux, uy = (ref_c.x - ref_a.x) / L, (ref_c.y - ref_a.y) / L
    if d_a > L + d_c:
        t = (d_a + L + d_c) / 2.0
    elif d_c > L + d_a:
        t = (L - d_c - d_a) / 2.0
    else:
        t = L * d_a / (d_a + d_c) if d_a + d_c > 0 else L / 2.0
    return Point2D(ref_a.x + t * ux, ref_a.y + t * uy)


def _tie_break(p: Point2D):
    return (p.y, p.x)


def triangulate_two_ref(ref_a: Point2D, d_a: float, ref_c: Point2D, d_c: float,
                        zone: Optional[TrackingZone] = None,
                        previous: Optional[Point2D] = None,
                        strict: bool = False,
                        accept: Optional[Callable[[Point2D], bool]] = None) -> Point2D:
    """Fix from two ranges.

    If ``accept`` rules out exactly one of the two circle intersections (for
    instance because it lies outside a detecting beam) the other wins.
    Otherwise the one inside ``zone`` wins, then the one nearer ``previous``. A perfect tie resolves to the smaller y, then x; with
    ``strict=True`` it raises :class:`AmbiguousFix` instead.
    """
    if ref_a == ref_c:
        raise CoincidentPoints("references coincide")
    if d_a <= 0 or d_c <= 0:
        raise GeometryError("ranges must be positive")
    pts = intersect_circles(Circle(ref_a, d_a), Circle(ref_c, d_c))
    if not pts:
        return repair_point(ref_a, d_a, ref_c, d_c)
    if len(pts) == 1:
        return pts[0]

    if accept is not None:
        ok = [p for p in pts if accept(p)]
        if len(ok) == 1:
            return ok[0]
    if zone is not None:
        inside = [p for p in pts if zone_contains(zone, p)]
        if len(inside) == 1:
            return inside[0]
    if previous is not None:
        da, db = dist(pts[0], previous), dist(pts[1], previous)
        if da != db:
            return pts[0] if da < db else pts[1]
    if zone is not None and previous is None:
        # neither or both inside: fall back to the one nearer the zone centre
        da, db = dist(pts[0], zone.center), dist(pts[1], zone.center)
        if da != db:
            return pts[0] if da < db else pts[1]
    if strict:
        raise AmbiguousFix(f"cannot choose between {pts[0]} and {pts[1]}")
    return min(pts, key=_tie_break)
