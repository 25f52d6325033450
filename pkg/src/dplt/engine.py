"""
Discrete-time scenario runner and the experiment sweeps built on it.

One scenario owns one logical timeline and a fixed set of random streams
spawned from its seed (placement, mobility, ranging noise, baseline noise,
channel errors, outlier draws), so the three estimators see the same
trajectory while their noise stays independent. Sweeps derive one seed per
replicate from ``(master seed, replicate index)``; every cell is a pure
function of its config and can run in any order or process.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import rf
from .agents import (
    Event,
    MobilityParams,
    Mode,
    TrackerState,
    move_target,
    select_references,
    subtended_angle,
    step_mode,
)
from .config import ScenarioConfig, validate
from .errors import BehindRay, CoverageGap, EmptyRun, InvalidBeamwidth, ParallelBearings
from .estimators import (
    EstimatorKind,
    PathLossModel,
    aoa_estimate,
    dplt_step,
    received_power,
    rss_estimate,
)
from .geom import GeometryWarning, Point2D, TrackingZone, dist
from .ranging import ClockModel, bearing_to, measure_bearing, measure_range, triangulate_two_ref

N_STREAMS = 6
PLACEMENT, MOBILITY, RANGING, BASELINE, CHANNEL, OUTLIER = range(N_STREAMS)


@dataclass(frozen=True)
class StepRecord:
    tick: int
    time_ms: float
    true_x: float
    true_y: float
    est_x: float
    est_y: float
    error: float
    mode_a: str
    mode_c: str
    ref_a: int
    ref_c: int
    zone_x: float
    zone_y: float
    zone_r: float
    beamwidth: float
    zone_updated: bool
    coverage_gap: bool
    ref_switched: bool
    fix: bool


RECORD_FIELDS = tuple(f.name for f in fields(StepRecord))


@dataclass(frozen=True)
class SummaryMetrics:
    mean_error: float
    accuracy: float
    zone_update_count: int
    mean_broadcast_time: float
    coverage_gap_fraction: float
    ref_switch_count: int
    ticks: int


@dataclass
class ChannelStats:
    """Sample-level error counters for the packet corruption model."""
    samples: int = 0
    raw_errors: int = 0
    residual_errors: int = 0
    blocks: int = 0
    block_frac_sum: float = 0.0
    block_frac_sq_sum: float = 0.0
    packets: int = 0
    corrupted_packets: int = 0

    @property
    def raw_ber(self) -> float:
        return self.raw_errors / self.samples if self.samples else math.nan

    @property
    def residual_ber(self) -> float:
        return self.residual_errors / self.samples if self.samples else math.nan

    @property
    def residual_ber_se(self) -> float:
        if self.blocks < 2:
            return math.nan
        mean = self.block_frac_sum / self.blocks
        var = self.block_frac_sq_sum / self.blocks - mean * mean
        return math.sqrt(max(var, 0.0) / self.blocks)


def derive_seed(master: int, index: int) -> int:
    """Seed for replicate ``index`` of a sweep; independent of execution order."""
    return int(np.random.SeedSequence([master, index]).generate_state(1, np.uint64)[0])


def _streams(seed: int) -> List[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(N_STREAMS)]


def place_nodes(cfg: ScenarioConfig, rng: np.random.Generator) -> Dict[int, Point2D]:
    xy = rng.random((cfg.node_count, 2)) * (cfg.area_width_m, cfg.area_height_m)
    return {i: Point2D(float(x), float(y)) for i, (x, y) in enumerate(xy)}


def mobility_params(cfg: ScenarioConfig) -> MobilityParams:
    m = cfg.mobility
    return MobilityParams(m.speed_min, m.speed_max, m.p_turn, m.turn_slowdown,
                          (0.0, 0.0, cfg.area_width_m, cfg.area_height_m), m.relax_time_s)


def antenna_params(cfg: ScenarioConfig) -> rf.AntennaParams:
    a = cfg.antenna
    return rf.AntennaParams(a.radiation_efficiency, rf.dbm_to_watts(a.tx_power_dbm),
                            a.elements, a.aperture_m, a.max_range_m, a.reference_range_m)


def doppler_factor(speed: float, cfg: ScenarioConfig) -> float:
    """ToA jitter inflation from Doppler spread, sqrt(1 + (f_d / f_ref)^2)."""
    f_ref = cfg.channel.doppler_ref_hz
    if f_ref <= 0:
        return 1.0
    fd = rf.doppler_shift(speed, cfg.channel.carrier_hz)
    return math.sqrt(1.0 + (fd / f_ref) ** 2)


class _Channel:
    """Packet corruption with interleaving and the 1-of-4 FEC stand-in."""

    def __init__(self, cfg: ScenarioConfig, rng, outlier_rng):
        self.enabled = cfg.channel.corrupt_packets
        self.samples = cfg.channel.packet_samples
        self.p = rf.ber(cfg.channel.ebn0_db, rf.Fading(cfg.channel.fading))
        self.fec = rf.FecConfig(enabled=cfg.fec.enabled)
        self.max_range = cfg.antenna.max_range_m
        self.rng = rng
        self.outlier_rng = outlier_rng
        self.stats = ChannelStats()

    def deliver(self, distance: float) -> float:
        if not self.enabled:
            return distance
        on_air = self.rng.random(self.samples) < self.p
        # draw the outlier unconditionally so FEC on/off runs stay aligned
        outlier = float(self.outlier_rng.uniform(0.0, self.max_range))
        errors = rf.deinterleave(on_air)
        residual = rf.apply_fec(errors, self.fec)
        s = self.stats
        s.samples += self.samples
        s.raw_errors += int(errors.sum())
        s.residual_errors += int(residual.sum())
        n_full = self.samples // 4
        if n_full:
            frac = residual[:n_full * 4].reshape(n_full, 4).mean(axis=1)
            s.blocks += n_full
            s.block_frac_sum += float(frac.sum())
            s.block_frac_sq_sum += float((frac * frac).sum())
        s.packets += 1
        if residual.any():
            s.corrupted_packets += 1
            return outlier
        return distance


class _Slot:
    """One reference role (A or C) with its tracker state and beam."""

    def __init__(self, node_id: int, now: float, cfg: ScenarioConfig, steering: float):
        self.state = TrackerState(node_id, Mode.SEARCHING, now, None, cfg.tau_ms, cfg.r_c_ms)
        self.search_bw = math.radians(cfg.tracking.search_beamwidth_deg)
        self.sidelobe = cfg.antenna.sidelobe_gain_db
        self.beam = rf.BeamConfig(self.search_bw, steering, self.sidelobe)

    @property
    def node_id(self) -> int:
        return self.state.node_id

    def search_from(self, steering: float):
        self.beam = rf.BeamConfig(self.search_bw, steering, self.sidelobe)


def _bearing_or(ref: Point2D, target: Point2D, default: float = 0.0) -> float:
    return bearing_to(ref, target) if ref != target else default


def run_scenario(cfg: ScenarioConfig) -> Tuple[List[StepRecord], SummaryMetrics]:
    records, _ = simulate(cfg)
    return records, summarize(records, cfg.accuracy_threshold_m)


def simulate(cfg: ScenarioConfig) -> Tuple[List[StepRecord], ChannelStats]:
    """Run one scenario and return its per-tick log plus channel counters."""
    validate(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GeometryWarning)
        return _Run(cfg).execute()


class _Run:
    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.kind = EstimatorKind(cfg.estimator)
        rngs = _streams(cfg.seed)
        self.rng_mob = rngs[MOBILITY]
        self.rng_rng = rngs[RANGING]
        self.rng_base = rngs[BASELINE]
        self.channel = _Channel(cfg, rngs[CHANNEL], rngs[OUTLIER])

        self.nodes = place_nodes(cfg, rngs[PLACEMENT])
        self.mob = mobility_params(cfg)
        self.ant = antenna_params(cfg)
        self.dt = cfg.tick_ms / 1000.0
        t = cfg.tracking
        self.floor = math.radians(t.min_beamwidth_deg)
        self.scan_step = math.radians(t.scan_rate_deg_s) * self.dt
        self.min_angle = math.radians(t.min_ref_angle_deg)
        self.reach_margin = 1.1
        # neighbourhood radius: what a searching directional node can reach;
        # shared by every estimator so all of them see the same reference geometry
        widest = max(math.radians(t.search_beamwidth_deg), self.floor)
        self.sel_range = min(self.ant.max_range, rf.directional_range(self.ant, widest))
        r = cfg.ranging
        scale = 0.5 if r.round_trip else 1.0
        self.clock = ClockModel(r.bias_ns * scale, r.jitter_ns * scale)
        b = cfg.baseline
        self.pl = PathLossModel(b.path_loss_exponent, b.ref_distance_m, b.ref_loss_db)
        self.aoa_sigma = math.radians(b.aoa_sigma_deg)
        # how long to go without a fix before falling back to neighbourhood detection
        self.reacquire_ticks = int(math.ceil(t.reacquire_ms / cfg.tick_ms))

        # target
        u = self.rng_mob.random(2)
        self.pos = Point2D(cfg.area_width_m / 2.0, cfg.area_height_m / 2.0)
        self.heading = rf.TWO_PI * float(u[0])
        self.speed = self.mob.speed_min + (self.mob.speed_max - self.mob.speed_min) * float(u[1])

        self.estimate = self.pos
        self.history: List[Point2D] = []
        self.hint: Optional[Tuple[float, float]] = None
        self.zone: Optional[TrackingZone] = None
        self.slots: Optional[List[_Slot]] = None
        self.since_fix = 0

    # -- acquisition -------------------------------------------------------

    def _acquire(self, now: float) -> bool:
        """Neighbourhood detection: the nodes that hear the target become the
        references and get a coarse AoA toward it."""
        try:
            pair = select_references(self.pos, self.nodes, self.sel_range, None, self.min_angle)
        except CoverageGap:
            return False
        hints = []
        for nid in pair:
            ref = self.nodes[nid]
            hints.append(measure_bearing(ref, self.pos, self.aoa_sigma, self.rng_base, nid).bearing
                         if ref != self.pos else 0.0)
        self.slots = [_Slot(nid, now, self.cfg, h) for nid, h in zip(pair, hints)]
        self.hint = (hints[0], hints[1])
        self.history = []
        self.zone = None
        self.since_fix = 0
        return True

    def _previous_for_fix(self, d_a: float) -> Point2D:
        if self.history:
            return self.history[-1]
        ref = self.nodes[self.slots[0].node_id]
        b = self.hint[0]
        return Point2D(ref.x + d_a * math.cos(b), ref.y + d_a * math.sin(b))

    # -- main loop ---------------------------------------------------------

    def execute(self) -> Tuple[List[StepRecord], ChannelStats]:
        cfg = self.cfg
        records: List[StepRecord] = []
        prev_pair = None
        for k in range(1, cfg.n_ticks + 1):
            now = k * cfg.tick_ms
            self.pos, self.heading, self.speed = move_target(
                self.pos, self.heading, self.speed, self.mob, self.dt, self.rng_mob)

            gap = False
            if self.slots is None or self.since_fix > self.reacquire_ticks:
                gap = not self._acquire(now)
            else:
                gap = not self._reselect(now)

            fix = updated = False
            bw = math.nan
            if not gap:
                if self.kind is EstimatorKind.DPLT:
                    fix, updated, bw = self._tick_dplt(now, k)
                else:
                    fix = self._tick_baseline()
            if fix:
                self.since_fix = 0
            else:
                self.since_fix += 1

            pair = tuple(s.node_id for s in self.slots) if self.slots else (-1, -1)
            switched = prev_pair is not None and pair != prev_pair and pair != (-1, -1)
            if pair != (-1, -1):
                prev_pair = pair
            z = self.zone
            modes = [s.state.mode.value for s in self.slots] if self.slots else ["S", "S"]
            records.append(StepRecord(
                k, now, self.pos.x, self.pos.y, self.estimate.x, self.estimate.y,
                dist(self.pos, self.estimate), modes[0], modes[1], pair[0], pair[1],
                z.center.x if z else math.nan, z.center.y if z else math.nan,
                z.radius if z else math.nan, bw, updated, gap, switched, fix))
        return records, self.channel.stats

    def _reselect(self, now: float) -> bool:
        current = tuple(s.node_id for s in self.slots)
        try:
            pair = select_references(self.pos, self.nodes, self.sel_range, current, self.min_angle)
        except CoverageGap:
            return False
        if pair != current:
            old = {s.node_id: s for s in self.slots}
            new = []
            for nid in pair:
                if nid in old:
                    new.append(old[nid])
                else:
                    ref = self.nodes[nid]
                    new.append(_Slot(nid, now, self.cfg, _bearing_or(ref, self.estimate)))
            self.slots = new
        return True

    def _tick_dplt(self, now: float, k: int) -> Tuple[bool, bool, float]:
        detected = []
        for slot in self.slots:
            ref = self.nodes[slot.node_id]
            st = slot.state
            hit = False
            if st.mode is not Mode.RESET and ref != self.pos:
                d = dist(ref, self.pos)
                hit = (d <= rf.directional_range(self.ant, slot.beam.beamwidth)
                       and slot.beam.covers(bearing_to(ref, self.pos)))
            if st.mode is Mode.SEARCHING:
                ev = Event.TARGET_DETECTED if hit else Event.NONE
            elif st.mode is Mode.TRACKING:
                ev = Event.NONE if hit else Event.TARGET_LOST
            else:
                ev = Event.NONE
            new = step_mode(st, ev, now)
            if st.mode is Mode.TRACKING and new.mode is Mode.SEARCHING:
                slot.search_from(_bearing_or(ref, self.estimate, slot.beam.steering))
            elif new.mode is Mode.SEARCHING and not hit:
                slot.search_from(slot.beam.steering + self.scan_step)
            slot.state = new
            detected.append(hit and new.mode is Mode.TRACKING)

        if not all(detected):
            return False, False, math.nan

        meas = []
        for slot in self.slots:
            ref = self.nodes[slot.node_id]
            clock = self.clock
            factor = doppler_factor(self.speed, self.cfg)
            if self.cfg.ranging.gain_scaled:
                factor *= 10.0 ** (-rf.antenna_gain_db(slot.beam, self.ant.radiation_efficiency) / 20.0)
            if factor != 1.0:
                clock = ClockModel(clock.bias, clock.jitter_sigma * factor)
            m = measure_range(dist(ref, self.pos), clock, self.rng_rng, slot.node_id)
            d = max(self.channel.deliver(m.distance), 1e-6)
            meas.append(replace(m, distance=d))

        ref_a, ref_c = (self.nodes[s.node_id] for s in self.slots)
        t = self.cfg.tracking
        beams = [(self.nodes[s.node_id], s.beam) for s in self.slots]

        def in_beams(p: Point2D) -> bool:
            # both references detected the target, so it sits inside both sectors
            return all(ref != p and beam.covers(bearing_to(ref, p)) for ref, beam in beams)

        if len(self.history) < 2:
            # bootstrap: plain triangulation, zone machinery engages from the third fix
            prev = self._previous_for_fix(meas[0].distance)
            pos = triangulate_two_ref(ref_a, meas[0].distance, ref_c, meas[1].distance,
                                      previous=prev, accept=in_beams)
            if not self._plausible(pos, meas):
                return False, False, math.nan
            self._push(pos)
            bws = self._aim(pos, (self.floor, self.floor), meas)
            return True, False, max(bws)

        rec = dplt_step(self.history, ref_a, ref_c, meas[0], meas[1], self.zone, tick=k,
                        r_min=t.r_min_m, min_beamwidth=self.floor,
                        footprint_zone=t.footprint_zone, d_average_factor=t.d_average_factor,
                        accept=in_beams)
        if not self._plausible(rec.position, meas):
            return False, False, math.nan
        self.zone = rec.zone
        self._push(rec.position)
        bws = self._aim(rec.position, rec.beamwidths, meas)
        return True, rec.zone_updated, max(bws)

    def _aim(self, fix: Point2D, widths, meas) -> Tuple[float, float]:
        """Steer both beams at the latest fix. Each beam is at least as wide as
        ``widths`` (zone cover, floored) and also covers ``k`` standard
        deviations of the fix's position uncertainty, so a noisy fix after
        reacquisition widens the beams instead of losing the target again."""
        refs = [self.nodes[s.node_id] for s in self.slots]
        u = self._uncertainty(fix, meas)
        out = []
        for slot, ref, bw in zip(self.slots, refs, widths):
            d = dist(ref, fix)
            if u > 0 and d > 0:
                bw = max(bw, math.pi if u >= d else rf.required_beamwidth(u, d))
            # never so wide that the beam stops reaching the target
            bw = min(bw, max(self.floor, rf.widest_beam_reaching(self.ant, self.reach_margin * d)))
            slot.beam = rf.BeamConfig(bw, _bearing_or(ref, fix, slot.beam.steering),
                                      slot.beam.sidelobe_gain)
            out.append(bw)
        return out[0], out[1]

    def _uncertainty(self, fix: Point2D, meas) -> float:
        """k-sigma position uncertainty of a two-range fix (range sigma over the
        sine of the angle the references subtend)."""
        refs = [self.nodes[s.node_id] for s in self.slots]
        sin_ang = max(math.sin(subtended_angle(fix, refs[0], refs[1])), 0.1)
        return self.cfg.tracking.uncertainty_sigmas * max(m.sigma for m in meas) / sin_ang

    def _plausible(self, fix: Point2D, meas) -> bool:
        """Innovation gate: reject a fix farther from the last one than the
        target could have moved plus the fix uncertainty."""
        if not self.cfg.tracking.gate or not self.history:
            return True
        elapsed = (self.since_fix + 1) * self.dt
        gate = (self.mob.speed_max * elapsed + self._uncertainty(fix, meas)
                + self.cfg.tracking.r_min_m)
        return dist(fix, self.history[-1]) <= gate

    def _push(self, pos: Point2D):
        self.estimate = pos
        self.history = (self.history + [pos])[-2:]

    def _tick_baseline(self) -> bool:
        refs = [self.nodes[s.node_id] for s in self.slots]
        in_range = [dist(r, self.pos) <= self.ant.max_range and r != self.pos for r in refs]
        for slot, ok in zip(self.slots, in_range):
            slot.state = replace(slot.state, mode=Mode.TRACKING if ok else Mode.SEARCHING)
        if not all(in_range):
            return False
        ref_a, ref_c = refs
        b = self.cfg.baseline
        if self.kind is EstimatorKind.RSS:
            tx = self.cfg.antenna.tx_power_dbm
            prs = []
            for ref in refs:
                z = self.rng_base.standard_normal()
                pr = received_power(dist(ref, self.pos), tx, 0.0, self.pl)
                prs.append(pr + b.rss_shadowing_db * z)
            d_a = max(1e-6, self.pl.ref_distance * 10.0 ** ((tx - self.pl.ref_loss - prs[0])
                                                           / (10.0 * self.pl.exponent)))
            prev = self._previous_for_fix(d_a)
            pos = rss_estimate(prs[0], prs[1], ref_a, ref_c, tx, 0.0, self.pl, previous=prev)
        else:
            bearings = [measure_bearing(ref, self.pos, self.aoa_sigma, self.rng_base, s.node_id)
                        for ref, s in zip(refs, self.slots)]
            try:
                pos = aoa_estimate(bearings[0], bearings[1], ref_a, ref_c)
            except (ParallelBearings, BehindRay):
                return False
        if max(dist(ref_a, pos), dist(ref_c, pos)) > self.ant.max_range:
            # both references hear the target, so a fix outside radio range is rejected
            return False
        self._push(pos)
        return True


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def _search_episodes(records: Sequence[StepRecord], tick_s: float) -> List[float]:
    """Durations of searching spells that ended in (re)acquisition, per slot."""
    out = []
    for mode_attr, ref_attr in (("mode_a", "ref_a"), ("mode_c", "ref_c")):
        run = 0
        ref = None
        for r in records:
            mode, node = getattr(r, mode_attr), getattr(r, ref_attr)
            if node != ref:
                run, ref = 0, node
            if mode == "T":
                if run:
                    out.append(run * tick_s)
                run = 0
            else:
                run += 1
    return out


def summarize(records: Sequence[StepRecord], accuracy_threshold: float = 1.0) -> SummaryMetrics:
    if not records:
        raise EmptyRun("no records to summarise")
    errors = np.array([r.error for r in records], dtype=float)
    tick_s = records[0].time_ms / records[0].tick / 1000.0
    episodes = _search_episodes(records, tick_s)
    return SummaryMetrics(
        mean_error=float(errors.mean()),
        accuracy=float(np.mean(errors <= accuracy_threshold)),
        zone_update_count=sum(r.zone_updated for r in records),
        mean_broadcast_time=float(np.mean(episodes)) if episodes else math.nan,
        coverage_gap_fraction=sum(r.coverage_gap for r in records) / len(records),
        ref_switch_count=sum(r.ref_switched for r in records),
        ticks=len(records),
    )


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def map_cells(fn: Callable, cells: Sequence, workers: int = 1,
              order: Optional[Sequence[int]] = None) -> list:
    """Evaluate ``fn`` on every cell and return results by cell index.

    ``order`` only changes the execution order (used to check that results do
    not depend on it); ``workers > 1`` runs cells in separate processes.
    """
    idx = list(order) if order is not None else list(range(len(cells)))
    if sorted(idx) != list(range(len(cells))):
        raise ValueError("order must be a permutation of the cell indices")
    results = [None] * len(cells)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, res in zip(idx, pool.map(fn, [cells[i] for i in idx])):
                results[i] = res
    else:
        for i in idx:
            results[i] = fn(cells[i])
    return results


def _replicate(cfg: ScenarioConfig, r: int) -> ScenarioConfig:
    return replace(cfg, seed=derive_seed(cfg.seed, r))


def _summary_cell(cfg: ScenarioConfig) -> SummaryMetrics:
    return run_scenario(cfg)[1]


@dataclass(frozen=True)
class SpeedRow:
    speed: float
    mean_error: float
    seeds: int


def speed_sweep(cfg: ScenarioConfig, speeds: Sequence[float], seeds: int = 1,
                workers: int = 1, order=None) -> List[SpeedRow]:
    if not speeds:
        raise ValueError("speeds must be non-empty")
    cells = [replace(_replicate(cfg, r),
                     mobility=replace(cfg.mobility, speed_min=float(v), speed_max=float(v)))
             for v in speeds for r in range(seeds)]
    res = map_cells(_summary_cell, cells, workers, order)
    rows = []
    for i, v in enumerate(speeds):
        errs = [s.mean_error for s in res[i * seeds:(i + 1) * seeds]]
        rows.append(SpeedRow(float(v), float(np.mean(errs)), seeds))
    return rows


@dataclass(frozen=True)
class TradeoffRow:
    beamwidth_deg: float
    t_zonal: float
    p_error: float
    zone_update_overhead: float  # zone updates per second
    mean_error: float
    seeds: int


def beamwidth_tradeoff_sweep(cfg: ScenarioConfig, beamwidths_deg: Sequence[float],
                             seeds: int = 1, workers: int = 1, order=None) -> List[TradeoffRow]:
    for b in beamwidths_deg:
        if not b > 0:
            raise InvalidBeamwidth(f"beamwidth {b} must be positive")
    cells = [replace(_replicate(cfg, r),
                     tracking=replace(cfg.tracking, min_beamwidth_deg=float(b)))
             for b in beamwidths_deg for r in range(seeds)]
    res = map_cells(_summary_cell, cells, workers, order)
    rows = []
    for i, b in enumerate(beamwidths_deg):
        chunk = res[i * seeds:(i + 1) * seeds]
        t_zonal, p_error = rf.tradeoff_map(b)
        rows.append(TradeoffRow(
            float(b), t_zonal, p_error,
            float(np.mean([s.zone_update_count / cfg.duration_s for s in chunk])),
            float(np.mean([s.mean_error for s in chunk])), seeds))
    return rows


# -- broadcasting time ---------------------------------------------------------

OMNI = "omni"


def _beam_for(bw) -> rf.BeamConfig:
    if bw == OMNI:
        return rf.BeamConfig.omnidirectional()
    return rf.BeamConfig(math.radians(float(bw)))


def broadcast_times(cfg: ScenarioConfig, p_turn: float, beamwidth) -> List[float]:
    """Per-trial time until the first packet toward the moving target succeeds.

    The reference re-steers every tick at the target's last known position. A
    direction change during the tick costs ``broadcast.turn_penalty_db`` of
    Eb/N0 (channel estimate gone stale); a target outside the main lobe sees
    the sidelobe floor.
    """
    bc = cfg.broadcast
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0xB0]))
    mob = replace(mobility_params(cfg), p_turn=float(p_turn))
    ant = antenna_params(cfg)
    beam0 = _beam_for(beamwidth)
    reach = rf.directional_range(ant, beam0.beamwidth)
    fading = rf.Fading(cfg.channel.fading)
    dt = cfg.tick_ms / 1000.0
    max_ticks = int(math.ceil(bc.max_time_s / dt))
    eta = ant.radiation_efficiency
    out = []
    for _ in range(bc.trials):
        u = rng.random(4)
        w, h = cfg.area_width_m, cfg.area_height_m
        target = Point2D(w * (0.25 + 0.5 * u[0]), h * (0.25 + 0.5 * u[1]))
        heading = rf.TWO_PI * float(u[2])
        speed = mob.speed_min + (mob.speed_max - mob.speed_min) * float(u[3])
        d0 = rng.uniform(bc.distance_min_m, bc.distance_max_m)
        phi = rng.uniform(0.0, rf.TWO_PI)
        ref = Point2D(target.x + d0 * math.cos(phi), target.y + d0 * math.sin(phi))
        known = target
        t = max_ticks
        for k in range(1, max_ticks + 1):
            old_heading = heading
            target, heading, speed = move_target(target, heading, speed, mob, dt, rng)
            beam = replace(beam0, steering=_bearing_or(ref, known))
            gain = rf.antenna_gain_db(beam, eta, rf.angle_diff(beam.steering,
                                                                _bearing_or(ref, target)))
            ebn0 = cfg.channel.ebn0_db + gain
            if heading != old_heading:
                ebn0 -= bc.turn_penalty_db
            in_reach = dist(ref, target) <= reach
            ok = rf.packet_success(rf.ber(ebn0, fading), bc.packet_bits, rng)
            if in_reach and ok:
                t = k
                break
            known = target
        out.append(t * dt)
    return out


@dataclass(frozen=True)
class BroadcastRow:
    p_turn: float
    beamwidth: str
    mean_time_s: float
    trials: int


def _broadcast_cell(args) -> List[float]:
    cfg, p, bw = args
    return broadcast_times(cfg, p, bw)


def broadcasting_time_experiment(cfg: ScenarioConfig, p_turns: Sequence[float],
                                 beamwidths_deg: Sequence = (15, 30, 45, 60, 90, OMNI),
                                 seeds: int = 1, workers: int = 1, order=None
                                 ) -> List[BroadcastRow]:
    if not p_turns or not beamwidths_deg:
        raise ValueError("p_turns and beamwidths must be non-empty")
    cells = [(_replicate(cfg, r), float(p), bw)
             for p in p_turns for bw in beamwidths_deg for r in range(seeds)]
    res = map_cells(_broadcast_cell, cells, workers, order)
    rows = []
    i = 0
    for p in p_turns:
        for bw in beamwidths_deg:
            times = [t for chunk in res[i:i + seeds] for t in chunk]
            i += seeds
            rows.append(BroadcastRow(float(p), str(bw), float(np.mean(times)), len(times)))
    return rows


# -- FEC accuracy --------------------------------------------------------------

@dataclass(frozen=True)
class FecRow:
    ebn0_db: float
    accuracy_fec_on: float
    accuracy_fec_off: float
    residual_ber: float
    raw_ber: float
    residual_ber_mc: float
    residual_ber_se: float
    seeds: int


def _fec_cell(cfg: ScenarioConfig):
    records, stats = simulate(cfg)
    return summarize(records, cfg.accuracy_threshold_m).accuracy, stats


def fec_accuracy_experiment(cfg: ScenarioConfig, ebn0_list: Sequence[float], seeds: int = 1,
                            workers: int = 1, order=None) -> List[FecRow]:
    """Tracking accuracy with packet corruption, FEC on versus off.

    ``residual_ber`` is the analytic block-model value at the raw channel BER;
    ``residual_ber_mc`` and its standard error come from the FEC-on runs.
    """
    if not ebn0_list:
        raise ValueError("ebn0_list must be non-empty")
    cells = []
    for e in ebn0_list:
        for on in (True, False):
            for r in range(seeds):
                c = _replicate(cfg, r)
                cells.append(replace(
                    c, estimator="dplt",
                    channel=replace(cfg.channel, ebn0_db=float(e), corrupt_packets=True),
                    fec=replace(cfg.fec, enabled=on)))
    res = map_cells(_fec_cell, cells, workers, order)
    rows = []
    fading = rf.Fading(cfg.channel.fading)
    for i, e in enumerate(ebn0_list):
        on = res[(2 * i) * seeds:(2 * i + 1) * seeds]
        off = res[(2 * i + 1) * seeds:(2 * i + 2) * seeds]
        merged = ChannelStats()
        for _, s in on:
            for f in fields(ChannelStats):
                setattr(merged, f.name, getattr(merged, f.name) + getattr(s, f.name))
        raw = rf.ber(float(e), fading)
        rows.append(FecRow(
            float(e),
            float(np.mean([a for a, _ in on])),
            float(np.mean([a for a, _ in off])),
            rf.residual_ber_model(raw)[0],
            raw,
            merged.residual_ber,
            merged.residual_ber_se,
            seeds))
    return rows


# -- estimator comparison --------------------------------------------------------

@dataclass(frozen=True)
class ComparisonRow:
    seed_index: int
    seed: int
    dplt: float
    rss: float
    aoa: float


def _error_cell(cfg: ScenarioConfig) -> float:
    return run_scenario(cfg)[1].mean_error


def compare_estimators(cfg: ScenarioConfig, seeds: int = 10, workers: int = 1,
                       order=None) -> Tuple[List[ComparisonRow], Dict[str, float]]:
    """Mean error of each estimator on identical trajectories, per seed and pooled."""
    if seeds < 1:
        raise ValueError("seeds must be >= 1")
    kinds = ("dplt", "rss", "aoa")
    cells = [replace(_replicate(cfg, r), estimator=k) for r in range(seeds) for k in kinds]
    res = map_cells(_error_cell, cells, workers, order)
    rows = []
    for r in range(seeds):
        vals = dict(zip(kinds, res[3 * r:3 * r + 3]))
        rows.append(ComparisonRow(r, cells[3 * r].seed, vals["dplt"], vals["rss"], vals["aoa"]))
    pooled = {k: float(np.mean([getattr(row, k) for row in rows])) for k in kinds}
    return rows, pooled
