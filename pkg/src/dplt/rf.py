"""
Directional antenna and channel models: beamwidth/zone coupling, the
dynamic-range law, beamwidth tradeoff, gain, BER and the 1-of-4 FEC stand-in.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import InvalidBeamwidth, InvalidGeometry

SPEED_OF_LIGHT = 299_792_458.0
TWO_PI = 2.0 * math.pi


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def wrap_angle(a: float) -> float:
    """Normalise to [0, 2*pi)."""
    a = math.fmod(a, TWO_PI)
    if a < 0:
        a += TWO_PI
    # fmod can round a tiny negative up to exactly 2*pi
    return 0.0 if a >= TWO_PI else a


def angle_diff(a: float, b: float) -> float:
    """Smallest absolute difference between two bearings, in [0, pi]."""
    d = abs(math.fmod(a - b, TWO_PI))
    return TWO_PI - d if d > math.pi else d


@dataclass(frozen=True)
class AntennaParams:
    radiation_efficiency: float = 0.82
    tx_power: float = 10.0  # watts (40 dBm)
    elements: int = 5
    aperture: float = 1.0
    max_range: float = 300.0
    # range reached at a beamwidth of pi; None means max_range / 4
    reference_range: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.radiation_efficiency <= 1:
            raise ValueError("radiation_efficiency must lie in (0, 1]")
        if self.tx_power <= 0:
            raise ValueError("tx_power must be positive")
        if self.max_range <= 0:
            raise ValueError("max_range must be positive")
        if self.reference_range is not None and self.reference_range <= 0:
            raise ValueError("reference_range must be positive")

    @property
    def ref_range(self) -> float:
        return self.max_range / 4.0 if self.reference_range is None else self.reference_range


@dataclass(frozen=True)
class BeamConfig:
    beamwidth: float
    steering: float = 0.0
    sidelobe_gain: float = -10.0
    omni: bool = False

    def __post_init__(self):
        if not 0 < self.beamwidth <= math.pi:
            raise InvalidBeamwidth(f"beamwidth {self.beamwidth} outside (0, pi]")
        object.__setattr__(self, "steering", wrap_angle(self.steering))

    @classmethod
    def omnidirectional(cls) -> "BeamConfig":
        return cls(beamwidth=math.pi, omni=True)

    def covers(self, bearing: float) -> bool:
        return self.omni or angle_diff(bearing, self.steering) <= self.beamwidth / 2.0


class Fading(enum.Enum):
    AWGN = "awgn"
    RAYLEIGH = "rayleigh"


@dataclass(frozen=True)
class ChannelParams:
    carrier: float = 2.54e9
    ebn0: float = 10.0
    fading: Fading = Fading.RAYLEIGH
    target_speed: float = 0.0

    def __post_init__(self):
        if self.carrier <= 0:
            raise ValueError("carrier frequency must be positive")


@dataclass(frozen=True)
class FecConfig:
    block: int = 4
    correctable: int = 1
    enabled: bool = True

    def __post_init__(self):
        if self.enabled and (self.block != 4 or self.correctable != 1):
            raise ValueError("the FEC stand-in corrects exactly 1 sample per 4-sample block")


# ---------------------------------------------------------------------------
# beams and range
# ---------------------------------------------------------------------------

def required_beamwidth(zone_radius: float, distance: float) -> float:
    """Full beamwidth that just covers a zone of the given radius at ``distance``."""
    if distance <= 0 or zone_radius <= 0 or zone_radius > distance:
        raise InvalidGeometry(f"zone radius {zone_radius} not in (0, d={distance}]")
    return min(math.pi, 2.0 * math.asin(zone_radius / distance))


def footprint_radius(beamwidth: float, distance: float) -> float:
    """Inverse of :func:`required_beamwidth`."""
    return distance * math.sin(min(beamwidth, math.pi) / 2.0)


def raw_directional_range(eta: float, tx_power: float, beamwidth: float) -> float:
    """sqrt(eta * P_t * theta^(-1/2)); dimensionally a relative quantity."""
    if not 0 < beamwidth <= math.pi:
        raise InvalidBeamwidth(f"beamwidth {beamwidth} outside (0, pi]")
    return math.sqrt(eta * tx_power * beamwidth ** -0.5)


def directional_range(ant: AntennaParams, beamwidth: float) -> float:
    """Range in metres, normalised so a beamwidth of pi reaches ``ant.ref_range``."""
    raw = raw_directional_range(ant.radiation_efficiency, ant.tx_power, beamwidth)
    ref = raw_directional_range(ant.radiation_efficiency, ant.tx_power, math.pi)
    return ant.ref_range * raw / ref


def widest_beam_reaching(ant: AntennaParams, distance: float) -> float:
    """Largest beamwidth in (0, pi] whose directional range still covers ``distance``.

    Range falls as theta^(-1/4), so this is pi * (ref_range / d)^4, capped at pi.
    """
    if distance <= ant.ref_range:
        return math.pi
    return math.pi * (ant.ref_range / distance) ** 4


def tradeoff_map(bw_deg: float) -> Tuple[float, float]:
    """Beamwidth (degrees) -> (zone update time overhead s, estimation error m)."""
    if not bw_deg > 0:
        raise InvalidBeamwidth(f"beamwidth {bw_deg} deg must be positive")
    return 10.0 / bw_deg, 0.025 * bw_deg


def antenna_gain_db(beam: BeamConfig, eta: float, misalignment: float = 0.0) -> float:
    """Uniform main lobe of width theta with a flat sidelobe floor."""
    if beam.omni:
        return 0.0
    if misalignment <= beam.beamwidth / 2.0:
        return 10.0 * math.log10(TWO_PI * eta / beam.beamwidth)
    return beam.sidelobe_gain


def pair_gain(tx: BeamConfig, rx: BeamConfig, bearing_tx_to_rx: float,
              bearing_rx_to_tx: float, eta: float) -> float:
    g_tx = antenna_gain_db(tx, eta, angle_diff(tx.steering, bearing_tx_to_rx))
    g_rx = antenna_gain_db(rx, eta, angle_diff(rx.steering, bearing_rx_to_tx))
    return min(g_tx, g_rx)


# ---------------------------------------------------------------------------
# channel
# ---------------------------------------------------------------------------

def ber(ebn0_db: float, fading: Fading = Fading.RAYLEIGH) -> float:
    """BPSK bit error probability at the given average Eb/N0."""
    gamma = 10.0 ** (ebn0_db / 10.0)
    if math.isinf(gamma):
        return 0.0
    if Fading(fading) is Fading.AWGN:
        return 0.5 * math.erfc(math.sqrt(gamma))
    return 0.5 * (1.0 - math.sqrt(gamma / (1.0 + gamma)))


def doppler_shift(speed: float, carrier: float) -> float:
    if speed < 0:
        raise ValueError("speed must be non-negative")
    return speed * carrier / SPEED_OF_LIGHT


def packet_success(ber_: float, bits: int, rng: np.random.Generator) -> bool:
    if not 0.0 <= ber_ <= 1.0 or bits <= 0:
        raise ValueError("need ber in [0, 1] and bits > 0")
    return bool(rng.random() < (1.0 - ber_) ** bits)


# ---------------------------------------------------------------------------
# FEC stand-in
# ---------------------------------------------------------------------------

def interleave(samples: np.ndarray, depth: int = 4) -> np.ndarray:
    """Stripe full blocks column-wise so a burst spreads over ``depth`` blocks.

    A trailing partial group is left in place.
    """
    samples = np.asarray(samples)
    n = (len(samples) // (depth * depth)) * depth * depth
    head = samples[:n].reshape(-1, depth, depth).transpose(0, 2, 1).reshape(-1)
    return np.concatenate([head, samples[n:]])


def deinterleave(samples: np.ndarray, depth: int = 4) -> np.ndarray:
    # the per-group transpose is its own inverse
    return interleave(samples, depth)


def apply_fec(error_mask, fec: FecConfig = FecConfig()) -> np.ndarray:
    """Clear every block that holds at most ``fec.correctable`` errored samples."""
    mask = np.asarray(error_mask, dtype=bool).copy()
    if not fec.enabled:
        return mask
    n = (len(mask) // fec.block) * fec.block
    blocks = mask[:n].reshape(-1, fec.block)
    fixable = blocks.sum(axis=1) <= fec.correctable
    blocks[fixable] = False
    mask[:n] = blocks.reshape(-1)
    return mask


def residual_ber_model(p: float, block: int = 4, correctable: int = 1) -> Tuple[float, float]:
    """Analytic mean and per-block variance of the post-FEC sample error rate.

    Returns ``(mean, var)`` where ``var`` is the variance of one block's
    residual error fraction; the standard error of an n-block estimate is
    ``sqrt(var / n)``.
    """
    mean = 0.0
    second = 0.0
    for k in range(correctable + 1, block + 1):
        pk = math.comb(block, k) * p ** k * (1.0 - p) ** (block - k)
        frac = k / block
        mean += frac * pk
        second += frac * frac * pk
    return mean, second - mean * mean
