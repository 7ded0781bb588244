"""Phase-difference Doppler disambiguation for TDM-MIMO snapshots.

The RX baseline measures the azimuth phase alone; the TX baseline measures
azimuth plus the Doppler advance over one chirp slot. Removing the scaled RX
phase from the TX phase leaves the per-slot Doppler phase, which spans the
full single-TX velocity interval and fixes how many times the Doppler-FFT
phase has wrapped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import RadarParams, derive
from .processing import Detection

TWO_PI = 2 * math.pi


def wrap_phase(x: float) -> float:
    """Wrap into (-pi, pi]."""
    return wrap_interval(x, math.pi)


def wrap_interval(x: float, half_span: float) -> float:
    """Wrap into (-half_span, half_span]; round-off just past +half_span stays at the closed end."""
    return x - 2 * half_span * math.ceil((x - half_span) / (2 * half_span) - 1e-12)


def round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def reduce_rotation(n: int, params: RadarParams) -> int:
    """Map a rotation count into (-n_tx/2, n_tx/2].

    Counts differing by ``n_tx`` give velocities one extended span apart, which
    the final velocity wrap identifies; a TX phase slip of 2*pi produces
    exactly such an offset.
    """
    n_tx = params.n_tx
    half = n_tx // 2
    return (n + n_tx - half - 1) % n_tx - (n_tx - half - 1)


@dataclass(frozen=True)
class PhaseEstimates:
    phi_r: float
    phi_t: float
    phi_t_azi: float
    phi_t_v: float
    phi_det: float
    phi_true: float


@dataclass(frozen=True)
class DisambiguationResult:
    estimates: PhaseEstimates
    n_raw: float
    n: int
    v_det: float
    v_hat: float
    aoa_deg: float
    aoa_valid: bool = True
    coherence: float = 1.0


def _blocks(snapshot: np.ndarray, params: RadarParams) -> np.ndarray:
    snapshot = np.asarray(snapshot)
    if snapshot.shape != (params.n_tx * params.n_rx,):
        raise ValueError(f"snapshot has shape {snapshot.shape}, "
                         f"expected ({params.n_tx * params.n_rx},)")
    return snapshot.reshape(params.n_tx, params.n_rx)


def _rx_products(snapshot, params) -> np.ndarray:
    x = _blocks(snapshot, params)
    if params.n_rx < 2:
        raise ValueError("phi_r needs at least two RX antennas")
    return x[:, 1:] * np.conj(x[:, :-1])


def _tx_products(snapshot, params) -> np.ndarray:
    x = _blocks(snapshot, params)
    if params.n_tx < 2:
        raise ValueError("phi_t needs at least two TX antennas")
    return x[1:, :] * np.conj(x[:-1, :])


def estimate_phi_r(snapshot, params: RadarParams) -> float:
    """Adjacent-RX phase difference, averaged as a sum of conjugate products over all TX blocks."""
    return float(np.angle(np.sum(_rx_products(snapshot, params))))


def estimate_phi_t(snapshot, params: RadarParams) -> float:
    """Adjacent-TX phase difference (azimuth plus Doppler), pooled over all RX."""
    return float(np.angle(np.sum(_tx_products(snapshot, params))))


def compute_phi_tv(phi_t: float, phi_r: float, params: RadarParams) -> float:
    # deliberately not re-wrapped: a 2*pi slip here moves v_hat by a whole
    # extended span, which the final velocity wrap removes
    return phi_t - params.spacing_ratio * phi_r


def compute_phi_det(v_det: float, params: RadarParams) -> float:
    d = derive(params)
    if abs(v_det) > d.v_max * (1 + 1e-12):
        raise ValueError(f"|v_det|={abs(v_det):.6g} exceeds v_max={d.v_max:.6g}")
    return 4 * math.pi * v_det * params.n_tx * params.chirp_time / d.wavelength


def estimate_n(phi_t_v: float, phi_det: float, params: RadarParams) -> float:
    return (params.n_tx * phi_t_v - phi_det) / TWO_PI


def _coherence(products: np.ndarray) -> float:
    total = np.sum(np.abs(products))
    return float(np.abs(np.sum(products)) / total) if total > 0 else 0.0


def resolve_velocity(phi_r: float, phi_t: float, v_det: float,
                     params: RadarParams) -> tuple[PhaseEstimates, float, int, float]:
    """Measured phases and Doppler-grid velocity -> (estimates, n_raw, n, v_hat)."""
    d = derive(params)
    phi_t_v = compute_phi_tv(phi_t, phi_r, params)
    phi_det = compute_phi_det(v_det, params)
    n_raw = estimate_n(phi_t_v, phi_det, params)
    n = reduce_rotation(round_half_away(n_raw), params)
    v_hat = wrap_interval(v_det + 2 * n * d.v_max, d.extended_v_max)
    estimates = PhaseEstimates(
        phi_r=phi_r,
        phi_t=phi_t,
        phi_t_azi=params.spacing_ratio * phi_r,
        phi_t_v=phi_t_v,
        phi_det=phi_det,
        phi_true=params.n_tx * phi_t_v,
    )
    return estimates, n_raw, n, v_hat


def disambiguate_snapshot(snapshot, v_det: float, params: RadarParams) -> DisambiguationResult:
    phi_r = estimate_phi_r(snapshot, params)
    phi_t = estimate_phi_t(snapshot, params)
    estimates, n_raw, n, v_hat = resolve_velocity(phi_r, phi_t, v_det, params)

    sin_theta = params.wavelength * phi_r / (TWO_PI * params.rx_spacing)
    aoa_valid = abs(sin_theta) <= 1
    aoa_deg = math.degrees(math.asin(sin_theta)) if aoa_valid else math.nan
    # a low value flags mixed targets or noise in this cell
    coherence = min(_coherence(_rx_products(snapshot, params)),
                    _coherence(_tx_products(snapshot, params)))
    return DisambiguationResult(estimates=estimates, n_raw=n_raw, n=n, v_det=v_det, v_hat=v_hat,
                                aoa_deg=aoa_deg, aoa_valid=aoa_valid, coherence=coherence)


def disambiguate(detection: Detection, params: RadarParams) -> DisambiguationResult:
    return disambiguate_snapshot(detection.snapshot, detection.v_det, params)


def hypotheses(params: RadarParams) -> list[int]:
    """Rotation counts covering the extended span, smallest |n| first."""
    half = params.n_tx // 2
    return sorted(range(-half, half + 1), key=lambda n: (abs(n), n))


def angle_spectrum_peak(snapshot, params: RadarParams, pad_factor: int = 16) -> float:
    """Peak of the zero-padded angle FFT over the physical virtual-array positions.

    Elements are placed at ``tx * d_t/d_r + rx`` in units of d_r; coincident
    elements are summed.
    """
    x = _blocks(snapshot, params)
    ratio = params.spacing_ratio
    length = (params.n_tx - 1) * ratio + params.n_rx
    positions = (np.arange(params.n_tx)[:, None] * ratio + np.arange(params.n_rx)[None, :]).ravel()
    aperture = np.zeros(length, dtype=complex)
    np.add.at(aperture, positions, x.ravel())
    nfft = 1 << int(math.ceil(math.log2(pad_factor * length)))
    return float(np.max(np.abs(np.fft.fft(aperture, nfft))))


@dataclass(frozen=True)
class HPCResult:
    n: int
    v: float
    peaks: dict[int, float]


def hpc_baseline_snapshot(snapshot, v_det: float, params: RadarParams,
                          pad_factor: int = 16) -> HPCResult:
    """Hypothetical phase compensation: try every rotation count, keep the sharpest angle peak."""
    d = derive(params)
    phi_det = compute_phi_det(v_det, params)
    x = _blocks(snapshot, params)
    tx = np.arange(params.n_tx)[:, None]
    peaks = {}
    for n in hypotheses(params):
        comp = x * np.exp(-1j * tx * (phi_det + TWO_PI * n) / params.n_tx)
        peaks[n] = angle_spectrum_peak(comp.ravel(), params, pad_factor)
    best = max(peaks.values())
    # hypotheses are ordered by |n|; the first one within round-off of the max wins
    n_star = next(n for n in peaks if peaks[n] >= best * (1 - 1e-9))
    v_star = wrap_interval(v_det + 2 * n_star * d.v_max, d.extended_v_max)
    return HPCResult(n=n_star, v=v_star, peaks=peaks)


def hpc_baseline(detection: Detection, params: RadarParams, pad_factor: int = 16) -> HPCResult:
    return hpc_baseline_snapshot(detection.snapshot, detection.v_det, params, pad_factor)


def same_rotation(n_a: int, n_b: int, params: RadarParams) -> bool:
    """True when two rotation counts give the same velocity after the extended-span wrap."""
    return (n_a - n_b) % params.n_tx == 0
