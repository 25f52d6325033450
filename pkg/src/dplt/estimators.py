"""Position estimators: the zone-tracking two-reference pipeline plus RSS and
AoA baselines."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

from .errors import BehindRay, CoincidentPoints, ParallelBearings
from .geom import (
    R_MIN,
    Point2D,
    TrackingZone,
    dist,
    predict_zone,
    zone_contains,
)
from .ranging import BearingMeasurement, RangeMeasurement, triangulate_two_ref
from .rf import SPEED_OF_LIGHT, footprint_radius, required_beamwidth


class EstimatorKind(enum.Enum):
    DPLT = "dplt"
    RSS = "rss"
    AOA = "aoa"


@dataclass(frozen=True)
class PathLossModel:
    exponent: float = 3.0
    ref_distance: float = 1.0
    ref_loss: float = 40.0  # dB at ref_distance

    def __post_init__(self):
        if self.exponent <= 0 or self.ref_distance <= 0:
            raise ValueError("path-loss exponent and reference distance must be positive")

    @classmethod
    def free_space_reference(cls, carrier: float, exponent: float = 3.0,
                             ref_distance: float = 1.0) -> "PathLossModel":
        """Reference loss taken from free space at ``ref_distance``."""
        pl0 = 20.0 * math.log10(4.0 * math.pi * ref_distance * carrier / SPEED_OF_LIGHT)
        return cls(exponent, ref_distance, pl0)


@dataclass(frozen=True)
class EstimateRecord:
    tick: int
    estimator: EstimatorKind
    position: Point2D
    zone: Optional[TrackingZone] = None
    beamwidth: float = math.nan
    beamwidths: Tuple[float, float] = (math.nan, math.nan)
    zone_updated: bool = False


# ---------------------------------------------------------------------------
# zone-tracking pipeline
# ---------------------------------------------------------------------------

def beamwidth_for_zone(zone: TrackingZone, ref: Point2D, floor: float) -> float:
    d = dist(ref, zone.center)
    if d <= zone.radius:
        return math.pi
    return max(required_beamwidth(zone.radius, d), floor)


def dplt_step(prev_estimates: Sequence[Point2D], ref_a: Point2D, ref_c: Point2D,
              meas_a: RangeMeasurement, meas_c: RangeMeasurement,
              zone: Optional[TrackingZone], *, tick: int = 0,
              r_min: float = R_MIN, min_beamwidth: float = math.radians(5.0),
              footprint_zone: bool = True,
              d_average_factor: float = 2.0,
              accept: Optional[Callable[[Point2D], bool]] = None) -> EstimateRecord:
    """One tracking update.

    The fix is triangulated with the current zone as disambiguator (after
    ``accept``, if given). If it
    falls outside the zone a new zone is predicted from the last two fixes.
    Each reference then gets the beamwidth that covers the zone, floored at
    ``min_beamwidth``. With ``footprint_zone`` a new zone is widened to what
    the floored beam actually illuminates from the nearer reference.
    """
    prev = prev_estimates[-1]
    pos = triangulate_two_ref(ref_a, meas_a.distance, ref_c, meas_c.distance,
                              zone=zone, previous=prev, accept=accept)
    updated = False
    if zone is None or not zone_contains(zone, pos):
        updated = True
        try:
            zone = predict_zone(ref_a, ref_c, prev, pos, max(meas_a.distance, 1e-9),
                                max(meas_c.distance, 1e-9), r_min=r_min, step=tick,
                                d_average_factor=d_average_factor)
        except CoincidentPoints:
            zone = TrackingZone(pos, r_min, tick)
        if footprint_zone:
            d_near = min(dist(ref_a, zone.center), dist(ref_c, zone.center))
            r_beam = footprint_radius(min_beamwidth, d_near)
            if r_beam > zone.radius:
                zone = TrackingZone(zone.center, r_beam, tick)
    bws = (beamwidth_for_zone(zone, ref_a, min_beamwidth),
           beamwidth_for_zone(zone, ref_c, min_beamwidth))
    return EstimateRecord(tick, EstimatorKind.DPLT, pos, zone, max(bws), bws, updated)


# ---------------------------------------------------------------------------
# baselines
# ---------------------------------------------------------------------------

def received_power(distance: float, tx_power: float, gain: float, model: PathLossModel) -> float:
    """Log-distance received power in dBm (no shadowing)."""
    return tx_power + gain - model.ref_loss - 10.0 * model.exponent * math.log10(
        distance / model.ref_distance)


def rss_distance(pr: float, tx_power: float, gain: float, model: PathLossModel) -> float:
    return model.ref_distance * 10.0 ** ((tx_power + gain - model.ref_loss - pr)
                                         / (10.0 * model.exponent))


def rss_estimate(pr_a: float, pr_c: float, ref_a: Point2D, ref_c: Point2D,
                 tx_power: float, gain: float, model: PathLossModel,
                 zone: Optional[TrackingZone] = None,
                 previous: Optional[Point2D] = None) -> Point2D:
    d_a = rss_distance(pr_a, tx_power, gain, model)
    d_c = rss_distance(pr_c, tx_power, gain, model)
    return triangulate_two_ref(ref_a, d_a, ref_c, d_c, zone=zone, previous=previous)


def aoa_estimate(b_a: BearingMeasurement, b_c: BearingMeasurement,
                 ref_a: Point2D, ref_c: Point2D) -> Point2D:
    """Intersection of the two bearing rays."""
    ax, ay = math.cos(b_a.bearing), math.sin(b_a.bearing)
    cx, cy = math.cos(b_c.bearing), math.sin(b_c.bearing)
    denom = ax * cy - ay * cx
    if abs(denom) < 1e-6:
        raise ParallelBearings("bearing rays are parallel")
    wx, wy = ref_c.x - ref_a.x, ref_c.y - ref_a.y
    t = (wx * cy - wy * cx) / denom
    s = (wx * ay - wy * ax) / denom
    p = Point2D(ref_a.x + t * ax, ref_a.y + t * ay)
    if t < 0 or s < 0:
        raise BehindRay("rays meet behind a reference", point=p)
    return p
