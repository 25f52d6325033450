"""Tracker mode machine (Searching / Tracking / Reset), detection hazard,
target mobility and reference-node selection."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Hashable, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import CoverageGap
from .geom import Point2D, dist
from .rf import TWO_PI, BeamConfig, angle_diff, wrap_angle

SHARP_TURN = math.pi / 4


class Mode(enum.Enum):
    SEARCHING = "S"
    TRACKING = "T"
    RESET = "R"


class Event(enum.Enum):
    NONE = "none"
    TARGET_DETECTED = "detected"
    TARGET_LOST = "lost"


@dataclass(frozen=True)
class TrackerState:
    node_id: Hashable
    mode: Mode = Mode.SEARCHING
    mode_entry: float = 0.0  # ms
    beam: Optional[BeamConfig] = None
    tau: float = 1500.0      # ms
    r_c: float = 500.0       # ms

    def __post_init__(self):
        if self.tau <= 0 or self.r_c <= 0:
            raise ValueError("tau and r_c must be positive")


def step_mode(state: TrackerState, event: Event, now: float) -> TrackerState:
    """Advance one node's mode. Detection is checked before the S timeout."""
    if now < state.mode_entry:
        raise ValueError(f"time went backwards: {now} < {state.mode_entry}")
    elapsed = now - state.mode_entry
    mode = state.mode
    if mode is Mode.SEARCHING:
        if event is Event.TARGET_DETECTED:
            return replace(state, mode=Mode.TRACKING, mode_entry=now)
        if elapsed > state.tau:
            return replace(state, mode=Mode.RESET, mode_entry=now)
    elif mode is Mode.RESET:
        if elapsed > state.r_c:
            return replace(state, mode=Mode.SEARCHING, mode_entry=now)
    elif mode is Mode.TRACKING:
        if event is Event.TARGET_LOST:
            return replace(state, mode=Mode.SEARCHING, mode_entry=now)
    return state


def detection_hazard(elapsed: float, tau: float) -> float:
    """Probability a searching node has found the target after ``elapsed`` ms;
    exactly one half at tau/2."""
    if elapsed < 0:
        raise ValueError("elapsed must be non-negative")
    return 1.0 - 2.0 ** (-elapsed / (tau / 2.0))


# ---------------------------------------------------------------------------
# mobility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MobilityParams:
    speed_min: float = 10.0
    speed_max: float = 40.0
    p_turn: float = 0.005
    turn_slowdown: float = 0.5
    bounds: Tuple[float, float, float, float] = (0.0, 0.0, 500.0, 500.0)  # xmin, ymin, xmax, ymax
    relax_time: float = 1.0  # s, speed recovery after a turn

    def __post_init__(self):
        if not 0 < self.speed_min <= self.speed_max:
            raise ValueError("need 0 < speed_min <= speed_max")
        if not 0 <= self.p_turn <= 1:
            raise ValueError("p_turn must lie in [0, 1]")
        if not 0 < self.turn_slowdown <= 1:
            raise ValueError("turn_slowdown must lie in (0, 1]")
        x0, y0, x1, y1 = self.bounds
        if not (x1 > x0 and y1 > y0):
            raise ValueError("empty bounds")


def _reflect(v: float, lo: float, hi: float) -> Tuple[float, bool]:
    flipped = False
    span = hi - lo
    while v < lo or v > hi:
        v = 2 * lo - v if v < lo else 2 * hi - v
        flipped = not flipped
        if span == 0:
            break
    return v, flipped


def move_target(pos: Point2D, heading: float, speed: float, params: MobilityParams,
                dt: float, rng: np.random.Generator) -> Tuple[Point2D, float, float]:
    """One mobility step. Returns ``(position, heading, speed)``.

    A turn draws a fresh heading and a fresh cruise speed; turns sharper than
    45 degrees scale that speed by ``turn_slowdown``. Between turns the speed
    relaxes toward a uniform cruise draw. Walls reflect specularly.
    """
    if dt == 0:
        return pos, heading, speed
    if dt < 0:
        raise ValueError("dt must be non-negative")
    u_turn, u_heading, u_speed = rng.random(3)
    cruise = params.speed_min + (params.speed_max - params.speed_min) * u_speed
    if u_turn < params.p_turn:
        new_heading = TWO_PI * u_heading
        sharp = angle_diff(new_heading, heading) > SHARP_TURN
        heading = new_heading
        speed = cruise * params.turn_slowdown if sharp else cruise
    else:
        alpha = 1.0 - math.exp(-dt / params.relax_time)
        speed = speed + alpha * (cruise - speed)

    x = pos.x + speed * dt * math.cos(heading)
    y = pos.y + speed * dt * math.sin(heading)
    x0, y0, x1, y1 = params.bounds
    x, fx = _reflect(x, x0, x1)
    y, fy = _reflect(y, y0, y1)
    if fx:
        heading = math.pi - heading
    if fy:
        heading = -heading
    return Point2D(x, y), wrap_angle(heading), speed


# ---------------------------------------------------------------------------
# reference selection
# ---------------------------------------------------------------------------

def subtended_angle(target: Point2D, a: Point2D, c: Point2D) -> float:
    """Angle at ``target`` between the directions to ``a`` and ``c``."""
    if target == a or target == c:
        return 0.0
    ta = math.atan2(a.y - target.y, a.x - target.x)
    tc = math.atan2(c.y - target.y, c.x - target.x)
    return angle_diff(ta, tc)


def _well_spread(target, a, c, min_angle):
    ang = subtended_angle(target, a, c)
    return min_angle <= ang <= math.pi - min_angle


def select_references(target_est: Point2D, friendly: Mapping[Hashable, Point2D],
                      max_range: float,
                      current: Optional[Tuple[Hashable, Hashable]] = None,
                      min_angle: float = 0.0) -> Tuple[Hashable, Hashable]:
    """Keep ``current`` while both stay within ``max_range``; otherwise the two
    nearest in-range nodes (ties broken by id).

    With ``min_angle > 0`` the pair must also subtend an angle in
    ``[min_angle, pi - min_angle]`` at the target, since two-range fixes
    degrade as the target approaches the line through the references. The
    current pair is kept down to half that margin; the replacement is the
    acceptable pair with the smallest farther range. If no pair qualifies the
    plain nearest two are used.
    """
    if not friendly:
        raise ValueError("no friendly nodes")
    if current is not None and all(
            nid in friendly and dist(friendly[nid], target_est) <= max_range for nid in current):
        if min_angle <= 0 or _well_spread(target_est, friendly[current[0]],
                                          friendly[current[1]], min_angle / 2.0):
            return current
    ranked = sorted(((dist(p, target_est), nid) for nid, p in friendly.items()
                     if dist(p, target_est) <= max_range))
    if len(ranked) < 2:
        raise CoverageGap(f"{len(ranked)} friendly node(s) within {max_range} m")
    if min_angle > 0:
        for j in range(1, len(ranked)):
            for i in range(j):
                a, c = ranked[i][1], ranked[j][1]
                if _well_spread(target_est, friendly[a], friendly[c], min_angle):
                    return a, c
    return ranked[0][1], ranked[1][1]


def nodes_in_range(target: Point2D, friendly: Mapping[Hashable, Point2D],
                   max_range: float) -> Sequence[Hashable]:
    return [nid for nid, p in friendly.items() if dist(p, target) <= max_range]
