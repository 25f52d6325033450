"""
Scenario configuration.

Values are kept in user-facing units (degrees, dBm, ms); the engine converts
them when it builds the model objects. Every field maps to one flat key,
``section.field`` for nested sections, so a config file is a list of
``key = value`` lines.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, Iterator, List, Tuple

from .errors import ConfigError


@dataclass(frozen=True)
class AntennaSection:
    radiation_efficiency: float = 0.82
    tx_power_dbm: float = 40.0
    elements: int = 5
    aperture_m: float = 1.0
    max_range_m: float = 300.0
    reference_range_m: float = 75.0
    sidelobe_gain_db: float = -10.0


@dataclass(frozen=True)
class ChannelSection:
    carrier_hz: float = 2.54e9
    ebn0_db: float = 10.0
    fading: str = "rayleigh"
    # Doppler at which ToA jitter has grown by sqrt(2); 0 disables the effect
    doppler_ref_hz: float = 250.0
    corrupt_packets: bool = False
    packet_samples: int = 16


@dataclass(frozen=True)
class MobilitySection:
    speed_min: float = 10.0
    speed_max: float = 40.0
    p_turn: float = 0.005
    turn_slowdown: float = 0.5
    relax_time_s: float = 1.0


@dataclass(frozen=True)
class RangingSection:
    jitter_ns: float = 3.0
    bias_ns: float = 0.0
    round_trip: bool = False
    # scale jitter by the reference beam's amplitude gain (0 dBi keeps jitter_ns)
    gain_scaled: bool = True


@dataclass(frozen=True)
class TrackingSection:
    r_min_m: float = 0.5
    min_beamwidth_deg: float = 5.0
    search_beamwidth_deg: float = 30.0
    scan_rate_deg_s: float = 90.0
    d_average_factor: float = 2.0
    footprint_zone: bool = True
    # reference pairs must subtend at least this angle at the target (all estimators)
    min_ref_angle_deg: float = 30.0
    # tracking beams also cover this many sigmas of the fix's position uncertainty
    uncertainty_sigmas: float = 3.0
    # without a fix for this long, references are re-detected from the neighbourhood
    reacquire_ms: float = 750.0
    # reject fixes that jump farther than the target could have moved
    gate: bool = True


@dataclass(frozen=True)
class BaselineSection:
    rss_shadowing_db: float = 4.0
    path_loss_exponent: float = 3.0
    ref_distance_m: float = 1.0
    ref_loss_db: float = 40.0
    aoa_sigma_deg: float = 2.0


@dataclass(frozen=True)
class FecSection:
    enabled: bool = True


@dataclass(frozen=True)
class BroadcastSection:
    packet_bits: int = 64
    turn_penalty_db: float = 10.0
    trials: int = 200
    max_time_s: float = 10.0
    distance_min_m: float = 20.0
    distance_max_m: float = 60.0


SECTIONS = {
    "antenna": AntennaSection,
    "channel": ChannelSection,
    "mobility": MobilitySection,
    "ranging": RangingSection,
    "tracking": TrackingSection,
    "baseline": BaselineSection,
    "fec": FecSection,
    "broadcast": BroadcastSection,
}

ESTIMATORS = ("dplt", "rss", "aoa")


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 1
    node_count: int = 60
    area_width_m: float = 500.0
    area_height_m: float = 500.0
    estimator: str = "dplt"
    duration_s: float = 60.0
    tick_ms: float = 10.0
    tau_ms: float = 1500.0
    r_c_ms: float = 500.0
    accuracy_threshold_m: float = 1.0
    antenna: AntennaSection = field(default_factory=AntennaSection)
    channel: ChannelSection = field(default_factory=ChannelSection)
    mobility: MobilitySection = field(default_factory=MobilitySection)
    ranging: RangingSection = field(default_factory=RangingSection)
    tracking: TrackingSection = field(default_factory=TrackingSection)
    baseline: BaselineSection = field(default_factory=BaselineSection)
    fec: FecSection = field(default_factory=FecSection)
    broadcast: BroadcastSection = field(default_factory=BroadcastSection)

    @property
    def n_ticks(self) -> int:
        return int(round(self.duration_s * 1000.0 / self.tick_ms))

    def with_values(self, **flat: Any) -> "ScenarioConfig":
        """Copy with flat keys replaced, e.g. ``with_values(**{"mobility.p_turn": 0.2})``."""
        return from_flat({**to_flat(self), **flat})


# ---------------------------------------------------------------------------
# flat key mapping
# ---------------------------------------------------------------------------

def _leaf_fields() -> Iterator[Tuple[str, dataclasses.Field]]:
    for f in fields(ScenarioConfig):
        if f.name in SECTIONS:
            for g in fields(SECTIONS[f.name]):
                yield f"{f.name}.{g.name}", g
        else:
            yield f.name, f


FIELD_TYPES: Dict[str, str] = {k: (f.type if isinstance(f.type, str) else f.type.__name__)
                               for k, f in _leaf_fields()}


def keys() -> List[str]:
    return list(FIELD_TYPES)


def to_flat(cfg: ScenarioConfig) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if f.name in SECTIONS:
            for g in fields(v):
                out[f"{f.name}.{g.name}"] = getattr(v, g.name)
        else:
            out[f.name] = v
    return out


def from_flat(flat: Dict[str, Any]) -> ScenarioConfig:
    top: Dict[str, Any] = {}
    nested: Dict[str, Dict[str, Any]] = {s: {} for s in SECTIONS}
    for k, v in flat.items():
        if k not in FIELD_TYPES:
            raise ConfigError("unknown config key", key=k)
        v = coerce(k, v)
        if "." in k:
            sec, name = k.split(".", 1)
            nested[sec][name] = v
        else:
            top[k] = v
    for sec, cls in SECTIONS.items():
        top[sec] = cls(**nested[sec])
    cfg = ScenarioConfig(**top)
    validate(cfg)
    return cfg


_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def coerce(key: str, value: Any, line: int = None) -> Any:
    """Convert ``value`` (often a string from a file or flag) to the key's type."""
    kind = FIELD_TYPES.get(key)
    if kind is None:
        raise ConfigError("unknown config key", key=key, line=line)
    try:
        if kind == "bool":
            if isinstance(value, bool):
                return value
            s = str(value).strip().lower()
            if s in _TRUE:
                return True
            if s in _FALSE:
                return False
            raise ValueError(value)
        if kind == "int":
            if isinstance(value, bool):
                raise ValueError(value)
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(str(value).strip()) if isinstance(value, str) else int(value)
        if kind == "float":
            v = float(value)
            if math.isnan(v):
                raise ValueError(value)
            return v
        return str(value).strip()
    except (TypeError, ValueError):
        raise ConfigError(f"cannot read {value!r} as {kind}", key=key, line=line) from None


def format_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dumps(cfg: ScenarioConfig) -> str:
    return "".join(f"{k} = {format_value(v)}\n" for k, v in to_flat(cfg).items())


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def _require(ok: bool, key: str, msg: str):
    if not ok:
        raise ConfigError(msg, key=key)


def validate(cfg: ScenarioConfig) -> None:
    _require(0 <= cfg.seed < 2 ** 64, "seed", "seed must be an unsigned 64-bit integer")
    _require(cfg.node_count >= 2, "node_count", "need at least two friendly nodes")
    _require(cfg.area_width_m > 0, "area_width_m", "must be positive")
    _require(cfg.area_height_m > 0, "area_height_m", "must be positive")
    _require(cfg.estimator in ESTIMATORS, "estimator", f"must be one of {ESTIMATORS}")
    _require(cfg.tick_ms > 0, "tick_ms", "tick must be positive")
    _require(cfg.duration_s * 1000.0 >= cfg.tick_ms, "duration_s", "duration shorter than one tick")
    _require(cfg.tau_ms > 0, "tau_ms", "must be positive")
    _require(cfg.r_c_ms > 0, "r_c_ms", "must be positive")
    _require(cfg.accuracy_threshold_m > 0, "accuracy_threshold_m", "must be positive")

    a = cfg.antenna
    _require(0 < a.radiation_efficiency <= 1, "antenna.radiation_efficiency", "must lie in (0, 1]")
    _require(a.max_range_m > 0, "antenna.max_range_m", "must be positive")
    _require(a.reference_range_m > 0, "antenna.reference_range_m", "must be positive")
    _require(a.elements >= 1, "antenna.elements", "must be at least 1")

    c = cfg.channel
    _require(c.carrier_hz > 0, "channel.carrier_hz", "must be positive")
    _require(c.fading in ("awgn", "rayleigh"), "channel.fading", "must be awgn or rayleigh")
    _require(c.doppler_ref_hz >= 0, "channel.doppler_ref_hz", "must be non-negative")
    _require(c.packet_samples >= 1, "channel.packet_samples", "must be at least 1")

    m = cfg.mobility
    _require(m.speed_min > 0, "mobility.speed_min", "must be positive")
    _require(m.speed_max >= m.speed_min, "mobility.speed_max", "must be >= speed_min")
    _require(0 <= m.p_turn <= 1, "mobility.p_turn", "must lie in [0, 1]")
    _require(0 < m.turn_slowdown <= 1, "mobility.turn_slowdown", "must lie in (0, 1]")
    _require(m.relax_time_s > 0, "mobility.relax_time_s", "must be positive")

    r = cfg.ranging
    _require(r.jitter_ns >= 0, "ranging.jitter_ns", "must be non-negative")

    t = cfg.tracking
    _require(t.r_min_m > 0, "tracking.r_min_m", "must be positive")
    _require(0 < t.min_beamwidth_deg <= 180, "tracking.min_beamwidth_deg", "must lie in (0, 180]")
    _require(0 < t.search_beamwidth_deg <= 180, "tracking.search_beamwidth_deg",
             "must lie in (0, 180]")
    _require(t.scan_rate_deg_s >= 0, "tracking.scan_rate_deg_s", "must be non-negative")
    _require(0 <= t.min_ref_angle_deg < 90, "tracking.min_ref_angle_deg", "must lie in [0, 90)")
    _require(t.uncertainty_sigmas >= 0, "tracking.uncertainty_sigmas", "must be non-negative")
    _require(t.reacquire_ms > 0, "tracking.reacquire_ms", "must be positive")
    _require(t.d_average_factor > 0, "tracking.d_average_factor", "must be positive")

    b = cfg.baseline
    _require(b.rss_shadowing_db >= 0, "baseline.rss_shadowing_db", "must be non-negative")
    _require(b.path_loss_exponent > 0, "baseline.path_loss_exponent", "must be positive")
    _require(b.ref_distance_m > 0, "baseline.ref_distance_m", "must be positive")
    _require(b.aoa_sigma_deg >= 0, "baseline.aoa_sigma_deg", "must be non-negative")

    bc = cfg.broadcast
    _require(bc.packet_bits >= 1, "broadcast.packet_bits", "must be at least 1")
    _require(bc.trials >= 1, "broadcast.trials", "must be at least 1")
    _require(bc.max_time_s > 0, "broadcast.max_time_s", "must be positive")
    _require(0 < bc.distance_min_m <= bc.distance_max_m, "broadcast.distance_max_m",
             "need 0 < distance_min_m <= distance_max_m")


def noiseless(cfg: ScenarioConfig) -> ScenarioConfig:
    """Same scenario with every measurement noise source switched off."""
    return replace(
        cfg,
        ranging=replace(cfg.ranging, jitter_ns=0.0, bias_ns=0.0),
        baseline=replace(cfg.baseline, rss_shadowing_db=0.0, aoa_sigma_deg=0.0),
        channel=replace(cfg.channel, corrupt_packets=False),
    )
