import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from dplt.errors import InvalidBeamwidth, InvalidGeometry
from dplt.rf import (
    SPEED_OF_LIGHT,
    AntennaParams,
    BeamConfig,
    Fading,
    FecConfig,
    angle_diff,
    antenna_gain_db,
    apply_fec,
    ber,
    dbm_to_watts,
    deinterleave,
    directional_range,
    doppler_shift,
    footprint_radius,
    interleave,
    packet_success,
    pair_gain,
    raw_directional_range,
    required_beamwidth,
    residual_ber_model,
    tradeoff_map,
    widest_beam_reaching,
    wrap_angle,
)

beamwidths = st.floats(1e-3, math.pi)


def test_unit_conversions():
    assert dbm_to_watts(40) == 10.0
    assert SPEED_OF_LIGHT == 299_792_458.0


def test_wrap_and_diff():
    assert wrap_angle(-0.5) == pytest.approx(2 * math.pi - 0.5)
    assert wrap_angle(2 * math.pi) == 0.0
    assert 0 <= wrap_angle(-1e-18) < 2 * math.pi
    assert angle_diff(0.1, 2 * math.pi - 0.1) == pytest.approx(0.2)


def test_required_beamwidth_examples():
    assert required_beamwidth(50, 100) == pytest.approx(math.pi / 3, abs=1e-12)
    assert required_beamwidth(100, 100) == pytest.approx(math.pi)
    assert required_beamwidth(1, 100) == pytest.approx(2 * math.asin(0.01), abs=1e-15)
    assert required_beamwidth(1, 100) == pytest.approx(0.0200003, abs=1e-7)
    with pytest.raises(InvalidGeometry):
        required_beamwidth(2, 1)


@given(st.floats(0.01, 100), st.floats(0.01, 1))
def test_footprint_inverts_required_beamwidth(d, frac):
    r = d * frac
    assert footprint_radius(required_beamwidth(r, d), d) == pytest.approx(r, rel=1e-9)


def test_raw_directional_range_examples():
    assert raw_directional_range(1, 1, math.pi) == pytest.approx(math.pi ** -0.25, abs=1e-12)
    assert raw_directional_range(1, 1, math.pi) == pytest.approx(0.7511, abs=1e-4)
    # sqrt(8.2 / sqrt(pi/3)) = 2.83074
    assert raw_directional_range(0.82, 10, math.pi / 3) == pytest.approx(
        math.sqrt(8.2 * (math.pi / 3) ** -0.5), rel=1e-12)
    with pytest.raises(InvalidBeamwidth):
        raw_directional_range(1, 1, 0)


def test_directional_range_normalisation():
    ant = AntennaParams()
    assert directional_range(ant, math.pi) == pytest.approx(75.0)
    assert directional_range(ant, math.pi / 16) == pytest.approx(75.0 * 2.0)


@given(beamwidths, beamwidths)
def test_directional_range_decreasing(t1, t2):
    ant = AntennaParams()
    if t1 < t2:
        assert directional_range(ant, t1) > directional_range(ant, t2)


@given(st.floats(1, 1000))
def test_widest_beam_reaching_is_tight(d):
    ant = AntennaParams()
    bw = widest_beam_reaching(ant, d)
    assert 0 < bw <= math.pi
    if bw < math.pi:
        assert directional_range(ant, bw) == pytest.approx(d, rel=1e-9)
    else:
        assert directional_range(ant, bw) >= d


@given(st.floats(1, 250), st.floats(0.05, 1), st.floats(0.05, 1))
def test_smaller_zone_never_loses_range(d, f1, f2):
    ant = AntennaParams()
    small, big = sorted((f1 * d, f2 * d))
    assert (directional_range(ant, required_beamwidth(small, d))
            >= directional_range(ant, required_beamwidth(big, d)))


@pytest.mark.parametrize("bw,expected", [(10, (1.0, 0.25)), (20, (0.5, 0.5)), (5, (2.0, 0.125))])
def test_tradeoff_map_examples(bw, expected):
    assert tradeoff_map(bw) == expected


@given(st.floats(1e-3, 360))
def test_tradeoff_map_products(bw):
    t, p = tradeoff_map(bw)
    assert bw * t == pytest.approx(10.0, rel=1e-15)
    assert p / bw == pytest.approx(0.025, rel=1e-15)


def test_tradeoff_map_rejects_nonpositive():
    with pytest.raises(InvalidBeamwidth):
        tradeoff_map(0)


def test_beam_config_validation():
    with pytest.raises(InvalidBeamwidth):
        BeamConfig(0.0)
    with pytest.raises(InvalidBeamwidth):
        BeamConfig(4.0)
    assert BeamConfig(1.0, steering=-1.0).steering == pytest.approx(2 * math.pi - 1)
    omni = BeamConfig.omnidirectional()
    assert omni.covers(2.0) and antenna_gain_db(omni, 0.82) == 0.0


def test_pair_gain_examples():
    b = BeamConfig(math.pi / 2)
    g = pair_gain(b, b, 0.0, 0.0, 0.82)
    assert g == pytest.approx(10 * math.log10(2 * math.pi * 0.82 / (math.pi / 2)), abs=1e-12)
    assert g == pytest.approx(5.16, abs=0.005)
    tx = BeamConfig(math.pi / 2, steering=math.pi / 4 + 0.01)
    assert pair_gain(tx, b, 0.0, 0.0, 0.82) == -10.0
    narrow, wide = BeamConfig(0.5), BeamConfig(1.0)
    assert pair_gain(narrow, wide, 0.0, 0.0, 0.82) == antenna_gain_db(wide, 0.82)


def test_ber_examples():
    assert ber(math.inf) == 0.0
    assert ber(-math.inf, Fading.RAYLEIGH) == 0.5
    assert ber(10.0) == pytest.approx(0.5 * (1 - math.sqrt(10 / 11)), abs=1e-15)
    assert ber(10.0) == pytest.approx(0.0232687, abs=1e-7)
    assert ber(7.0, Fading.AWGN) == pytest.approx(0.5 * special.erfc(math.sqrt(10 ** 0.7)), rel=1e-12)


@given(st.floats(-20, 40))
def test_fading_penalty(ebn0):
    assert ber(ebn0, Fading.RAYLEIGH) >= ber(ebn0, Fading.AWGN)


def test_doppler_examples():
    assert doppler_shift(0, 2.54e9) == 0
    assert doppler_shift(10, 2.54e9) == pytest.approx(84.73, abs=0.01)
    assert doppler_shift(40, 2.54e9) == pytest.approx(338.9, abs=0.05)


def test_packet_success_examples():
    rng = np.random.default_rng(0)
    assert all(packet_success(0.0, 100, rng) for _ in range(100))
    assert not any(packet_success(1.0, 1, rng) for _ in range(100))
    rate = np.mean([packet_success(1e-3, 1000, rng) for _ in range(100_000)])
    assert rate == pytest.approx(0.3677, abs=0.01)
    with pytest.raises(ValueError):
        packet_success(1.5, 10, rng)


def test_fec_examples():
    assert apply_fec([0, 1, 0, 0]).tolist() == [False] * 4
    assert apply_fec([1, 1, 0, 0]).tolist() == [True, True, False, False]
    mask = np.array([1, 1, 1, 0, 1, 0, 0, 0], dtype=bool)
    assert (apply_fec(mask, FecConfig(enabled=False)) == mask).all()


@given(st.lists(st.booleans(), max_size=64))
def test_fec_never_adds_errors(bits):
    out = apply_fec(bits)
    assert out.sum() <= sum(bits)
    assert not (out & ~np.asarray(bits, dtype=bool)).any()


@given(st.lists(st.integers(0, 9), max_size=70))
def test_interleave_round_trip(xs):
    a = np.asarray(xs)
    assert (deinterleave(interleave(a)) == a).all()


def test_interleave_spreads_bursts():
    burst = np.zeros(16, dtype=bool)
    burst[4:8] = True
    # after de-striping at the receiver, a 4-sample burst on air lands one per block
    assert (apply_fec(deinterleave(burst)) == False).all()  # noqa: E712


@pytest.mark.parametrize("p", [0.01, 0.05, 0.2])
def test_residual_ber_matches_block_model(p):
    rng = np.random.default_rng(int(p * 1000))
    n_blocks = 200_000
    mask = rng.random(n_blocks * 4) < p
    resid = apply_fec(mask).reshape(-1, 4).mean(axis=1)
    mean, var = residual_ber_model(p)
    expected = 0.25 * sum(k * math.comb(4, k) * p ** k * (1 - p) ** (4 - k) for k in range(2, 5))
    assert mean == pytest.approx(expected, rel=1e-12)
    assert abs(resid.mean() - mean) <= 3 * math.sqrt(var / n_blocks)


@given(st.floats(1e-4, 0.2))
def test_residual_below_raw(p):
    assert residual_ber_model(p)[0] < p
