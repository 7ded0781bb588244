"""Radar waveform and array parameters plus the quantities derived from them."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

import yaml

SPEED_OF_LIGHT = 299_792_458.0


class InvalidParamsError(ValueError):
    """Raised when parameters violate one or more invariants."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


@dataclass(frozen=True)
class RadarParams:
    carrier_frequency: float = 77e9
    bandwidth: float = 750e6
    chirp_time: float = 42.67e-6
    n_samples: int = 256
    n_chirps: int = 64
    n_tx: int = 12
    n_rx: int = 8
    rx_spacing: float = SPEED_OF_LIGHT / 77e9 / 2
    tx_spacing: float = SPEED_OF_LIGHT / 77e9 * 2
    speed_of_light: float = SPEED_OF_LIGHT

    @property
    def wavelength(self) -> float:
        return self.speed_of_light / self.carrier_frequency

    @property
    def spacing_ratio(self) -> int:
        """Integer d_t/d_r (assumes validated params)."""
        return int(round(self.tx_spacing / self.rx_spacing))

    @classmethod
    def from_lambda_spacings(cls, d_r_over_lambda: float = 0.5,
                             d_t_over_lambda: float = 2.0, **kwargs) -> "RadarParams":
        carrier = kwargs.get("carrier_frequency", cls.carrier_frequency)
        c = kwargs.get("speed_of_light", SPEED_OF_LIGHT)
        lam = c / carrier
        return cls(rx_spacing=d_r_over_lambda * lam, tx_spacing=d_t_over_lambda * lam, **kwargs)


@dataclass(frozen=True)
class DerivedParams:
    wavelength: float
    v_max: float
    extended_v_max: float
    range_resolution: float
    doppler_resolution: float
    sample_rate: float
    chirp_slope: float
    params: RadarParams

    @property
    def n_chirps(self) -> int:
        return self.params.n_chirps


_COUNT_FIELDS = ("n_samples", "n_chirps", "n_tx", "n_rx")
_SCALAR_FIELDS = ("carrier_frequency", "bandwidth", "chirp_time", "rx_spacing",
                  "tx_spacing", "speed_of_light")

# relative slack on the spacing checks, so d_r computed as lambda/2 passes
_SPACING_RTOL = 1e-9


def validate(params: RadarParams) -> list[str]:
    """Return every violated invariant; an empty list means the params are usable."""
    report = []
    for name in _COUNT_FIELDS:
        value = getattr(params, name)
        if not isinstance(value, (int,)) or isinstance(value, bool) or value < 1:
            report.append(f"{name}: count must be an integer >= 1 (got {value!r})")
    for name in _SCALAR_FIELDS:
        value = getattr(params, name)
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            report.append(f"{name}: must be a finite positive number (got {value!r})")
    if report:
        return report

    lam = params.wavelength
    if params.rx_spacing > lam / 2 * (1 + _SPACING_RTOL):
        report.append(f"rx_spacing: d_r <= lambda/2 violated "
                      f"(d_r={params.rx_spacing:.6g} m, lambda/2={lam / 2:.6g} m)")
    ratio = params.tx_spacing / params.rx_spacing
    if abs(ratio - round(ratio)) > _SPACING_RTOL * max(1.0, ratio) or round(ratio) < 1:
        report.append(f"tx_spacing: d_t/d_r integer violated (d_t/d_r={ratio:.6g})")
    return report


def derive(params: RadarParams) -> DerivedParams:
    report = validate(params)
    if report:
        raise InvalidParamsError(report)
    lam = params.wavelength
    v_max = lam / (4 * params.n_tx * params.chirp_time)
    return DerivedParams(
        wavelength=lam,
        v_max=v_max,
        extended_v_max=lam / (4 * params.chirp_time),
        range_resolution=params.speed_of_light / (2 * params.bandwidth),
        doppler_resolution=2 * v_max / params.n_chirps,
        sample_rate=params.n_samples / params.chirp_time,
        chirp_slope=params.bandwidth / params.chirp_time,
        params=params,
    )


def doppler_bin_to_velocity(bin: int, derived: DerivedParams) -> float:
    """Velocity of a bin on the FFT-shifted Doppler axis (zero at ``n_chirps // 2``)."""
    n = derived.n_chirps
    if not 0 <= bin < n:
        raise IndexError(f"doppler bin {bin} outside [0, {n})")
    return (bin - n // 2) * derived.doppler_resolution


CONFIG_KEYS = ("carrier_frequency_hz", "bandwidth_hz", "chirp_time_s", "n_samples",
               "n_chirps", "n_tx", "n_rx", "d_r_over_lambda", "d_t_over_lambda")


class ConfigError(ValueError):
    pass


def params_from_mapping(mapping: dict) -> RadarParams:
    """Build params from the flat config keys; unknown keys are rejected."""
    if not isinstance(mapping, dict):
        raise ConfigError("config must be a flat key-value mapping")
    unknown = sorted(set(mapping) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    kwargs = {}
    renames = {"carrier_frequency_hz": "carrier_frequency", "bandwidth_hz": "bandwidth",
               "chirp_time_s": "chirp_time"}
    for key, value in mapping.items():
        if isinstance(value, (dict, list)):
            raise ConfigError(f"{key}: nested values are not allowed")
        if key in ("d_r_over_lambda", "d_t_over_lambda"):
            continue
        if key in _COUNT_FIELDS:
            if isinstance(value, float) and value.is_integer():
                value = int(value)
            kwargs[key] = value
        else:
            kwargs[renames[key]] = float(value)
    return RadarParams.from_lambda_spacings(
        d_r_over_lambda=float(mapping.get("d_r_over_lambda", 0.5)),
        d_t_over_lambda=float(mapping.get("d_t_over_lambda", 2.0)),
        **kwargs,
    )


def params_to_mapping(params: RadarParams) -> dict:
    lam = params.wavelength
    return {
        "carrier_frequency_hz": params.carrier_frequency,
        "bandwidth_hz": params.bandwidth,
        "chirp_time_s": params.chirp_time,
        "n_samples": params.n_samples,
        "n_chirps": params.n_chirps,
        "n_tx": params.n_tx,
        "n_rx": params.n_rx,
        "d_r_over_lambda": params.rx_spacing / lam,
        "d_t_over_lambda": params.tx_spacing / lam,
    }


def load_config(path: str | Path) -> RadarParams:
    """Read a YAML (or JSON) flat config file."""
    text = Path(path).read_text()
    try:
        mapping = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not parseable: {exc}") from None
    return params_from_mapping(mapping)


def replace(params: RadarParams, **changes) -> RadarParams:
    return dataclasses.replace(params, **changes)
