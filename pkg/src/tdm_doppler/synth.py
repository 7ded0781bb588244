"""Synthetic TDM-MIMO FMCW baseband data cubes for point targets.

The signal model is stop-and-hop: a target is frozen during each chirp and its
phase advances only with the chirp start time of the TDM schedule. Range
migration across a frame is ignored, which is valid while
``|v| * frame_time`` stays well below the range resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import InvalidParamsError, RadarParams, derive, validate


class InvalidTargetError(ValueError):
    def __init__(self, index: int, reason: str):
        self.index = index
        super().__init__(f"target {index}: {reason}")


@dataclass(frozen=True)
class Target:
    range: float
    velocity: float = 0.0
    azimuth: float = 0.0
    snr_db: float = math.inf

    @property
    def amplitude(self) -> float:
        return 1.0 if math.isinf(self.snr_db) else 10 ** (self.snr_db / 20)


@dataclass
class DataCube:
    """Complex baseband samples indexed ``[tx, chirp, rx, sample]``."""

    samples: np.ndarray
    params: RadarParams
    seed: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        p = self.params
        return (p.n_tx, p.n_chirps, p.n_rx, p.n_samples)


def tdm_chirp_start(tx: int, chirp: int, params: RadarParams) -> float:
    if not 0 <= tx < params.n_tx:
        raise IndexError(f"tx {tx} outside [0, {params.n_tx})")
    if not 0 <= chirp < params.n_chirps:
        raise IndexError(f"chirp {chirp} outside [0, {params.n_chirps})")
    return (chirp * params.n_tx + tx) * params.chirp_time


def check_target(target: Target, params: RadarParams, index: int = 0) -> None:
    d = derive(params)
    f_beat = 2 * target.range * d.chirp_slope / params.speed_of_light
    if not target.range > 0:
        raise InvalidTargetError(index, f"range must be positive (got {target.range})")
    if f_beat >= d.sample_rate / 2:
        raise InvalidTargetError(
            index, f"beat frequency {f_beat:.6g} Hz at or above Nyquist {d.sample_rate / 2:.6g} Hz")
    if abs(target.velocity) > d.extended_v_max:
        raise InvalidTargetError(
            index, f"|velocity| {abs(target.velocity):.6g} exceeds extended_v_max {d.extended_v_max:.6g}")
    if not abs(target.azimuth) < math.pi / 2:
        raise InvalidTargetError(index, f"|azimuth| must be below pi/2 (got {target.azimuth})")
    if math.isnan(target.snr_db) or target.snr_db == -math.inf:
        raise InvalidTargetError(index, f"snr_db must be finite or +inf (got {target.snr_db})")


def target_phases(target: Target, params: RadarParams):
    """Per-axis phase ramps of one target: (tx, chirp, rx, sample, constant)."""
    d = derive(params)
    lam = d.wavelength
    f_beat = 2 * target.range * d.chirp_slope / params.speed_of_light
    doppler = 4 * math.pi * target.velocity / lam
    sin_t = math.sin(target.azimuth)
    phi_r = 2 * math.pi * params.rx_spacing * sin_t / lam
    phi_t_azi = 2 * math.pi * params.tx_spacing * sin_t / lam

    tx = np.arange(params.n_tx)
    chirp = np.arange(params.n_chirps)
    # chirp start = (chirp * n_tx + tx) * T_c splits into a tx term and a chirp term
    tx_phase = tx * (doppler * params.chirp_time + phi_t_azi)
    chirp_phase = chirp * (doppler * params.n_tx * params.chirp_time)
    rx_phase = np.arange(params.n_rx) * phi_r
    sample_phase = 2 * math.pi * f_beat * np.arange(params.n_samples) / d.sample_rate
    constant = 4 * math.pi * target.range / lam
    return tx_phase, chirp_phase, rx_phase, sample_phase, constant


def synthesize_cube(params: RadarParams, targets: list[Target], seed: int = 0,
                    noise: bool = True) -> DataCube:
    """Simulate one TDM frame.

    Each target contributes ``amplitude * exp(j * phase)`` where the phase sums
    the beat-frequency ramp over fast time, the Doppler phase at the chirp's
    TDM start time, and the RX/TX array phases of its azimuth. With ``noise``,
    unit-variance circular complex Gaussian noise is added and target
    amplitude follows ``snr_db``; targets with ``snr_db = inf`` have unit
    amplitude.
    """
    report = validate(params)
    if report:
        raise InvalidParamsError(report)
    for i, t in enumerate(targets):
        check_target(t, params, i)
    if seed < 0:
        raise ValueError(f"seed must be non-negative (got {seed})")

    shape = (params.n_tx, params.n_chirps, params.n_rx, params.n_samples)
    if noise:
        # one counter-based stream per cube, drawn in fixed index order
        rng = np.random.Generator(np.random.Philox(seed))
        samples = rng.standard_normal(2 * math.prod(shape)).view(np.complex128).reshape(shape)
        samples *= math.sqrt(0.5)
    else:
        samples = np.zeros(shape, dtype=np.complex128)
    for t in targets:
        tx_p, chirp_p, rx_p, samp_p, const = target_phases(t, params)
        # separable phase: slow-time phasors times fast-time phasors
        slow = np.multiply.outer(t.amplitude * np.exp(1j * (tx_p + const)), np.exp(1j * chirp_p))
        fast = np.multiply.outer(np.exp(1j * rx_p), np.exp(1j * samp_p))
        samples += np.multiply.outer(slow, fast)
    return DataCube(samples=samples, params=params, seed=seed, meta={"noise": noise})

