"""Range-Doppler processing, peak detection and virtual-array snapshots."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft, ndimage, signal

from .config import DerivedParams, derive, doppler_bin_to_velocity
from .synth import DataCube


@dataclass(frozen=True)
class Window:
    range: str = "hann"
    doppler: str = "hann"


DEFAULT_WINDOW = Window()


def _window(name: str, n: int) -> np.ndarray:
    if name in ("rect", "boxcar", "none"):
        return np.ones(n)
    return signal.get_window(name, n, fftbins=True)


@dataclass
class RangeDopplerMaps:
    """Complex maps indexed ``[tx, rx, doppler_bin, range_bin]``, Doppler FFT-shifted."""

    maps: np.ndarray
    derived: DerivedParams
    window: Window = DEFAULT_WINDOW

    def integrated(self) -> np.ndarray:
        """Noncoherent sum of ``|map|**2`` over every virtual channel."""
        return np.sum(np.abs(self.maps) ** 2, axis=(0, 1))


@dataclass
class Detection:
    range_bin: int
    doppler_bin: int
    range_m: float
    v_det: float
    magnitude: float
    snapshot: np.ndarray


def range_doppler_process(cube: DataCube, window: Window = DEFAULT_WINDOW) -> RangeDopplerMaps:
    """Range FFT over samples, then Doppler FFT over the chirps of each TX.

    No cross-TX Doppler compensation is applied: the raw TX phase progression
    is what the disambiguation step measures.
    """
    p = cube.params
    if cube.samples.shape != cube.shape:
        raise ValueError(f"cube samples have shape {cube.samples.shape}, params imply {cube.shape}")
    derived = derive(p)
    x = fft.fft(cube.samples * _window(window.range, p.n_samples), axis=3, overwrite_x=True)
    doppler_taper = _window(window.doppler, p.n_chirps)
    even = p.n_chirps % 2 == 0
    if even:
        # (-1)**chirp modulation is an exact fftshift of the Doppler axis
        doppler_taper = doppler_taper * (-1.0) ** np.arange(p.n_chirps)
    x *= doppler_taper[None, :, None, None]
    x = fft.fft(x, axis=1, overwrite_x=True)
    if not even:
        x = fft.fftshift(x, axes=1)
    # [tx, doppler, rx, range] -> [tx, rx, doppler, range], as a view
    maps = x.transpose(0, 2, 1, 3)
    return RangeDopplerMaps(maps=maps, derived=derived, window=window)


def extract_snapshot(maps: RangeDopplerMaps, range_bin: int, doppler_bin: int) -> np.ndarray:
    """Virtual-array vector at one cell, ordered ``tx * n_rx + rx``."""
    n_tx, n_rx, n_dop, n_rng = maps.maps.shape
    if not 0 <= range_bin < n_rng:
        raise IndexError(f"range bin {range_bin} outside [0, {n_rng})")
    if not 0 <= doppler_bin < n_dop:
        raise IndexError(f"doppler bin {doppler_bin} outside [0, {n_dop})")
    return maps.maps[:, :, doppler_bin, range_bin].reshape(n_tx * n_rx).copy()


@dataclass(frozen=True)
class StrongestK:
    k: int = 1


@dataclass(frozen=True)
class CACFAR:
    guard: int = 4
    train: int = 8
    threshold: float = 10.0


def _local_maxima(power: np.ndarray) -> np.ndarray:
    # Doppler wraps around, range does not
    peak = ndimage.maximum_filter(power, size=3, mode=("wrap", "nearest"))
    return (power == peak) & (power > 0)


def _ca_cfar_mask(power: np.ndarray, guard: int, train: int, threshold: float) -> np.ndarray:
    outer = 2 * (guard + train) + 1
    inner = 2 * guard + 1
    kernel = np.ones((outer, outer))
    lo = train
    kernel[lo:lo + inner, lo:lo + inner] = 0
    kernel /= kernel.sum()
    noise = ndimage.convolve(power, kernel, mode="wrap")
    return power > threshold * noise


def detect_peaks(maps: RangeDopplerMaps, method: StrongestK | CACFAR = StrongestK()) -> list[Detection]:
    """Detections on the integrated map, strongest first.

    ``StrongestK`` keeps the ``k`` largest local maxima (3x3 neighbourhood).
    ``CACFAR`` keeps every cell exceeding ``threshold`` times the mean of its
    training ring.
    """
    power = maps.integrated()
    n_dop, n_rng = power.shape
    if isinstance(method, StrongestK):
        if method.k < 1:
            raise ValueError(f"strongest-k needs k >= 1 (got {method.k})")
        mask = _local_maxima(power)
    elif isinstance(method, CACFAR):
        span = 2 * (method.guard + method.train) + 1
        if method.guard < 0 or method.train < 1 or span > min(n_dop, n_rng):
            raise ValueError(f"CFAR window {span} cells (guard={method.guard}, train={method.train}) "
                             f"does not fit a {n_dop}x{n_rng} map")
        mask = _ca_cfar_mask(power, method.guard, method.train, method.threshold)
    else:
        raise TypeError(f"unknown detection method {method!r}")
    if not np.any(power > 0):
        return []

    dop_idx, rng_idx = np.nonzero(mask)
    order = np.argsort(-power[dop_idx, rng_idx], kind="stable")
    if isinstance(method, StrongestK):
        order = order[:method.k]
    d = maps.derived
    return [
        Detection(
            range_bin=int(rng_idx[i]),
            doppler_bin=int(dop_idx[i]),
            range_m=float(rng_idx[i] * d.range_resolution),
            v_det=doppler_bin_to_velocity(int(dop_idx[i]), d),
            magnitude=float(power[dop_idx[i], rng_idx[i]]),
            snapshot=extract_snapshot(maps, int(rng_idx[i]), int(dop_idx[i])),
        )
        for i in order
    ]
