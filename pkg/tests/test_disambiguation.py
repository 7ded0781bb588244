import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tdm_doppler.config import RadarParams, derive, replace
from tdm_doppler.disambiguation import (compute_phi_det, compute_phi_tv, disambiguate,
                                        disambiguate_snapshot, estimate_n, estimate_phi_r,
                                        estimate_phi_t, hpc_baseline, hpc_baseline_snapshot,
                                        hypotheses, reduce_rotation, resolve_velocity, round_half_away,
                                        same_rotation, wrap_interval, wrap_phase)
from tdm_doppler.harness import Scenario, point_seed, run_pipeline
from tdm_doppler.processing import detect_peaks, range_doppler_process
from tdm_doppler.synth import Target, synthesize_cube

from conftest import LAMBDA, T_C

TABLE1 = RadarParams()
V_MAX = LAMBDA / (4 * 12 * T_C)


def analytic_snapshot(params, v, theta):
    """Virtual-array vector built straight from the array/Doppler phase model."""
    lam = params.wavelength
    phi_r = 2 * math.pi * params.rx_spacing * math.sin(theta) / lam
    phi_t = 2 * math.pi * params.tx_spacing * math.sin(theta) / lam + 4 * math.pi * v * params.chirp_time / lam
    tx = np.arange(params.n_tx)[:, None]
    rx = np.arange(params.n_rx)[None, :]
    return np.exp(1j * (tx * phi_t + rx * phi_r + 0.7)).ravel()


def aliased(v, v_max):
    return (v + v_max) % (2 * v_max) - v_max


def _pipeline_detection(params, v, theta):
    cube = synthesize_cube(params, [Target(10.0, v, theta)], noise=False)
    return detect_peaks(range_doppler_process(cube))[0]


def test_wrap_helpers():
    assert wrap_phase(math.pi) == pytest.approx(math.pi)
    assert wrap_phase(-math.pi) == pytest.approx(math.pi)
    assert wrap_phase(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    assert wrap_interval(5.0, 2.0) == pytest.approx(1.0)
    assert wrap_interval(2.0, 2.0) == 2.0
    assert wrap_interval(-2.0, 2.0) == 2.0


@pytest.mark.parametrize("x, n", [(0.5, 1), (-0.5, -1), (1.49, 1), (2.5, 3), (-2.5, -3), (0.0, 0)])
def test_round_half_away(x, n):
    assert round_half_away(x) == n


@pytest.mark.parametrize("n_tx, n, reduced", [(12, 6, 6), (12, -6, 6), (12, 7, -5), (12, -24, 0),
                                              (12, 15, 3), (3, 2, -1), (3, -1, -1), (1, 4, 0)])
def test_reduce_rotation(n_tx, n, reduced):
    assert reduce_rotation(n, replace(TABLE1, n_tx=n_tx)) == reduced


@pytest.mark.parametrize("theta_deg, expected", [(0, 0.0), (30, math.pi / 2), (5, math.pi * math.sin(math.radians(5)))])
def test_estimate_phi_r(theta_deg, expected):
    snap = analytic_snapshot(TABLE1, 3.0, math.radians(theta_deg))
    assert estimate_phi_r(snap, TABLE1) == pytest.approx(expected, abs=1e-12)


def test_phi_r_fig6_value():
    snap = analytic_snapshot(TABLE1, 10.0, math.radians(5))
    assert estimate_phi_r(snap, TABLE1) == pytest.approx(0.2738, abs=1e-4)


@pytest.mark.parametrize("v, theta_deg", [(0.0, 0), (10.0, 0), (10.0, 5)])
def test_estimate_phi_t(v, theta_deg):
    theta = math.radians(theta_deg)
    snap = analytic_snapshot(TABLE1, v, theta)
    raw = 4 * math.pi * math.sin(theta) + 4 * math.pi * v * T_C / LAMBDA
    assert estimate_phi_t(snap, TABLE1) == pytest.approx(math.atan2(math.sin(raw), math.cos(raw)), abs=1e-12)


def test_phi_t_pure_doppler_term():
    snap = analytic_snapshot(TABLE1, 10.0, 0.0)
    # 1.3749 in the rounded-wavelength chain; exact wavelength gives 1.3772
    assert estimate_phi_t(snap, TABLE1) == pytest.approx(4 * math.pi * 10 * T_C / LAMBDA, abs=1e-12)
    assert estimate_phi_t(snap, TABLE1) == pytest.approx(1.3749, abs=5e-3)


def test_phase_estimators_need_baselines():
    with pytest.raises(ValueError, match="RX"):
        estimate_phi_r(np.ones(12), replace(TABLE1, n_rx=1))
    with pytest.raises(ValueError, match="TX"):
        estimate_phi_t(np.ones(8), replace(TABLE1, n_tx=1))
    with pytest.raises(ValueError, match="shape"):
        estimate_phi_r(np.ones(5), TABLE1)


def test_compute_phi_tv():
    assert compute_phi_tv(2.4701, 0.2738, TABLE1) == pytest.approx(2.4701 - 4 * 0.2738)
    assert compute_phi_tv(2.4701, 0.2738, TABLE1) == pytest.approx(1.3749, abs=1e-4)
    same = replace(TABLE1, tx_spacing=TABLE1.rx_spacing)
    assert compute_phi_tv(0.3, 0.3, same) == 0.0


@pytest.mark.parametrize("theta_deg", [-70, -20, 0, 33, 80])
def test_static_target_phi_tv_cancels(theta_deg):
    snap = analytic_snapshot(TABLE1, 0.0, math.radians(theta_deg))
    phi_tv = compute_phi_tv(estimate_phi_t(snap, TABLE1), estimate_phi_r(snap, TABLE1), TABLE1)
    # the azimuth term may leave a whole number of turns when phi_t wraps
    assert abs(wrap_phase(phi_tv)) < 1e-9


def test_compute_phi_det():
    assert compute_phi_det(0.0, TABLE1) == 0.0
    assert compute_phi_det(V_MAX, TABLE1) == pytest.approx(math.pi, rel=1e-14)
    v_det = -1.4245
    assert compute_phi_det(v_det, TABLE1) == pytest.approx(4 * math.pi * v_det * 12 * T_C / LAMBDA)
    with pytest.raises(ValueError):
        compute_phi_det(1.01 * V_MAX, TABLE1)


def test_estimate_n_chain():
    assert estimate_n(0.0, 0.0, TABLE1) == 0.0
    # straight-line re-derivation of the v = 10 m/s chain
    v = 10.0
    phi_tv = 4 * math.pi * v * T_C / LAMBDA
    v_det = v - 3 * 2 * V_MAX
    phi_det = 4 * math.pi * v_det * 12 * T_C / LAMBDA
    assert estimate_n(phi_tv, phi_det, TABLE1) == pytest.approx(3.0, abs=1e-9)
    assert estimate_n(1.3749, -2.3503, TABLE1) == pytest.approx(3.000, abs=1e-3)
    assert estimate_n(-phi_tv, -phi_det, TABLE1) == pytest.approx(-3.0, abs=1e-9)


def test_disambiguate_v10_pipeline():
    det = _pipeline_detection(TABLE1, 10.0, 0.0)
    result = disambiguate(det, TABLE1)
    d = derive(TABLE1)
    assert result.n == 3
    assert abs(result.v_hat - 10.0) <= d.doppler_resolution / 2
    assert result.v_det == det.v_det
    assert abs(result.v_hat - result.v_det - 2 * result.n * d.v_max) < 1e-12
    assert result.estimates.phi_true == pytest.approx(12 * result.estimates.phi_t_v)
    assert result.coherence == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("v", [-1.5, -0.3, 0.0, 0.8, 1.8])
def test_no_ambiguity_case(v):
    det = _pipeline_detection(TABLE1, v, math.radians(20))
    result = disambiguate(det, TABLE1)
    assert result.n == 0
    assert result.v_hat == pytest.approx(result.v_det)


def test_aoa_invalid_flag():
    # rx phase near pi with d_r below lambda/2 maps to |sin| > 1
    tight = replace(TABLE1, rx_spacing=TABLE1.rx_spacing * 0.9, tx_spacing=TABLE1.rx_spacing * 0.9 * 4)
    rx = np.arange(8)[None, :]
    snap = np.exp(1j * 3.1 * rx).repeat(12, axis=0).ravel()
    result = disambiguate_snapshot(snap, 0.0, tight)
    assert not result.aoa_valid
    assert math.isnan(result.aoa_deg)
    assert math.isfinite(result.v_hat)


def test_coherence_flags_mixed_cell():
    a = analytic_snapshot(TABLE1, 10.0, math.radians(20))
    b = analytic_snapshot(TABLE1, -6.0, math.radians(-35))
    assert disambiguate_snapshot(a + 0.9 * b, 0.0, TABLE1).coherence < 0.9


# -- invariants ---------------------------------------------------------------

@pytest.mark.parametrize("theta_deg", range(-60, 61, 10))
def test_noise_free_exactness(theta_deg):
    d = derive(TABLE1)
    theta = math.radians(theta_deg)
    for v in np.linspace(-d.extended_v_max, d.extended_v_max, 97)[1:]:
        v_det = aliased(v, d.v_max)
        result = disambiguate_snapshot(analytic_snapshot(TABLE1, v, theta), v_det, TABLE1)
        assert abs(result.n_raw - round(result.n_raw)) < 1e-6
        assert wrap_interval(result.v_hat - v, d.extended_v_max) == pytest.approx(0, abs=1e-9)


@settings(max_examples=200)
@given(frac=st.floats(-0.999, 0.999), theta_deg=st.floats(-80, 80), turns=st.integers(-3, 3))
def test_wrap_invariance(frac, theta_deg, turns):
    d = derive(TABLE1)
    v = frac * d.extended_v_max
    snap = analytic_snapshot(TABLE1, v, math.radians(theta_deg))
    phi_r, phi_t = estimate_phi_r(snap, TABLE1), estimate_phi_t(snap, TABLE1)
    v_det = aliased(v, d.v_max)
    _, n_raw, n, v_hat = resolve_velocity(phi_r, phi_t, v_det, TABLE1)
    _, n_raw2, n2, v_hat2 = resolve_velocity(phi_r, phi_t + 2 * math.pi * turns, v_det, TABLE1)
    assert n_raw2 - n_raw == pytest.approx(12 * turns, abs=1e-9)
    assert n2 == n
    assert v_hat2 == pytest.approx(v_hat, abs=1e-9)


@pytest.mark.parametrize("theta_deg", [-75, -30, 0, 12, 60])
def test_zero_velocity_any_angle(theta_deg):
    det = _pipeline_detection(TABLE1, 0.0, math.radians(theta_deg))
    result = disambiguate(det, TABLE1)
    assert result.n == 0
    assert result.v_hat == result.v_det == 0.0


@pytest.mark.parametrize("theta_deg", [-60, -41.3, -5, 0, 17.5, 44, 60])
def test_aoa_round_trip(theta_deg):
    det = _pipeline_detection(TABLE1, 7.3, math.radians(theta_deg))
    assert abs(disambiguate(det, TABLE1).aoa_deg - theta_deg) < 0.5


# -- HPC baseline -------------------------------------------------------------

def test_hypothesis_set():
    assert hypotheses(TABLE1) == [0, -1, 1, -2, 2, -3, 3, -4, 4, -5, 5, -6, 6]


def test_hpc_v10():
    det = _pipeline_detection(TABLE1, 10.0, 0.0)
    hpc = hpc_baseline(det, TABLE1)
    # brute force over hypotheses: the table maximum is at n = 3
    assert max(hpc.peaks, key=hpc.peaks.get) == 3
    assert hpc.n == 3 == disambiguate(det, TABLE1).n
    assert abs(hpc.v - 10.0) < 0.1


@pytest.mark.parametrize("v", [-1.2, 0.0, 1.5])
def test_hpc_no_ambiguity(v):
    det = _pipeline_detection(TABLE1, v, math.radians(-15))
    assert hpc_baseline(det, TABLE1).n == 0


def test_hpc_edge_hypotheses_tie_to_same_velocity():
    d = derive(TABLE1)
    v = 0.99 * d.extended_v_max
    hpc = hpc_baseline_snapshot(analytic_snapshot(TABLE1, v, 0.2), aliased(v, d.v_max), TABLE1)
    assert hpc.peaks[6] == pytest.approx(hpc.peaks[-6], rel=1e-9)
    assert wrap_interval(hpc.v - v, d.extended_v_max) == pytest.approx(0, abs=1e-6)


def test_same_rotation():
    assert same_rotation(6, -6, TABLE1)
    assert same_rotation(3, 3, TABLE1)
    assert not same_rotation(3, 4, TABLE1)


def test_oracle_equivalence_analytic():
    rng = np.random.default_rng(2024)
    d = derive(TABLE1)
    for _ in range(500):
        v = rng.uniform(-0.95, 0.95) * d.extended_v_max
        theta = math.radians(rng.uniform(-60, 60))
        snap = analytic_snapshot(TABLE1, v, theta)
        v_det = aliased(v, d.v_max)
        assert same_rotation(disambiguate_snapshot(snap, v_det, TABLE1).n,
                             hpc_baseline_snapshot(snap, v_det, TABLE1).n, TABLE1)


def test_n_raw_clusters_at_20db():
    """200 seed-pinned 20 dB trials at a fixed velocity: |n_raw - n| < 0.5 in >= 99%."""
    v = 10.0
    base = Scenario(params=TABLE1, snr_db=20.0)
    hits = 0
    deviations = []
    for i in range(200):
        scenario = base.with_targets(Target(10.0, v, 0.0), seed=point_seed(77, i))
        _, result = run_pipeline(scenario)[0]
        deviations.append(result.n_raw - 3)
        hits += abs(result.n_raw - 3) < 0.5
    print(f"n_raw deviation: mean {np.mean(deviations):+.4f}, max |.| {np.max(np.abs(deviations)):.4f}")
    assert hits >= 198
