"""Scenario pipeline and the velocity / angle / oracle sweep experiments."""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import RadarParams, derive
from .disambiguation import (DisambiguationResult, disambiguate, hpc_baseline,
                             same_rotation, wrap_interval)
from .processing import CACFAR, Detection, StrongestK, detect_peaks, range_doppler_process
from .synth import Target, synthesize_cube

NOISE_FREE = math.inf


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")


@dataclass(frozen=True)
class Scenario:
    params: RadarParams = field(default_factory=RadarParams)
    targets: tuple[Target, ...] = ()
    seed: int = 0
    snr_db: float = 20.0
    detector: StrongestK | CACFAR | None = None

    @property
    def noise_free(self) -> bool:
        return math.isinf(self.snr_db)

    def with_targets(self, *targets: Target, seed: int | None = None) -> "Scenario":
        return dataclasses.replace(self, targets=tuple(targets),
                                   seed=self.seed if seed is None else seed)


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, exc) from exc


def run_pipeline(scenario: Scenario) -> list[tuple[Detection, DisambiguationResult]]:
    """Synthesize, process, detect and disambiguate; strongest detection first."""
    targets = [dataclasses.replace(t, snr_db=scenario.snr_db) for t in scenario.targets]
    cube = _stage("synth", synthesize_cube, scenario.params, targets, scenario.seed,
                  noise=not scenario.noise_free)
    maps = _stage("process", range_doppler_process, cube)
    method = scenario.detector or StrongestK(max(1, len(targets)))
    detections = _stage("detect", detect_peaks, maps, method)
    return [(det, _stage("disambiguate", disambiguate, det, scenario.params)) for det in detections]


def run_scenario(scenario: Scenario) -> list[DisambiguationResult]:
    return [result for _, result in run_pipeline(scenario)]


def point_seed(base_seed: int, index: int) -> int:
    """Seed for one sweep point; independent of worker count and execution order."""
    return int(np.random.SeedSequence([base_seed, index]).generate_state(1, np.uint64)[0])


def success_tolerance(params: RadarParams) -> float:
    return max(0.1, derive(params).doppler_resolution / 2 + 1e-6)


def expected_rotation(v: float, params: RadarParams) -> int:
    """Rotation count implied by the Doppler bin a velocity lands in."""
    d = derive(params)
    raw_bin = round(v / d.doppler_resolution)
    return (raw_bin + params.n_chirps // 2) // params.n_chirps


@dataclass
class SweepRow:
    x: float
    truth_v: float
    v_det: float = math.nan
    n_raw: float = math.nan
    n: int | None = None
    v_hat: float = math.nan
    aoa_deg: float = math.nan
    abs_err: float = math.nan
    status: str = "out_of_span"
    n_true: int | None = None


@dataclass
class SweepResult:
    kind: str
    rows: list[SweepRow]
    params: RadarParams
    x_label: str = "truth_v"

    @property
    def in_span(self) -> list[SweepRow]:
        return [r for r in self.rows if r.status != "out_of_span"]

    @property
    def success_count(self) -> int:
        return sum(r.status == "ok" for r in self.rows)

    @property
    def max_abs_error(self) -> float:
        errors = [r.abs_err for r in self.in_span if math.isfinite(r.abs_err)]
        return max(errors) if errors else math.nan

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "points": len(self.rows),
            "in_span": len(self.in_span),
            "success": self.success_count,
            "out_of_span": len(self.rows) - len(self.in_span),
            "max_abs_error": self.max_abs_error,
        }


def sweep_points(start: float, stop: float, step: float) -> list[float]:
    if not step > 0:
        raise ValueError(f"step must be positive (got {step})")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(max(count, 0))]


def _sweep_point(args) -> SweepRow:
    scenario, x, velocity, azimuth, index = args
    d = derive(scenario.params)
    row = SweepRow(x=x, truth_v=velocity)
    if abs(velocity) > d.extended_v_max:
        return row
    base = scenario.targets[0] if scenario.targets else Target(range=10.0)
    target = dataclasses.replace(base, velocity=velocity, azimuth=azimuth)
    point = dataclasses.replace(scenario, targets=(target,),
                                seed=point_seed(scenario.seed, index),
                                detector=scenario.detector or StrongestK(1))
    results = run_scenario(point)
    row.n_true = expected_rotation(velocity, scenario.params)
    if not results:
        row.status = "fail"
        return row
    r = results[0]
    row.v_det, row.n_raw, row.n, row.v_hat, row.aoa_deg = r.v_det, r.n_raw, r.n, r.v_hat, r.aoa_deg
    # +-extended_v_max are one velocity modulo the recoverable span
    row.abs_err = abs(wrap_interval(r.v_hat - velocity, d.extended_v_max))
    row.status = "ok" if row.abs_err <= success_tolerance(scenario.params) else "fail"
    return row


def _map(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def run_velocity_sweep(base: Scenario, v_from: float = -22.0, v_to: float = 22.0,
                       step: float = 0.2, azimuth: float = 0.0, jobs: int = 1) -> SweepResult:
    """One pipeline run per velocity at a fixed azimuth (radians)."""
    velocities = sweep_points(v_from, v_to, step)
    tasks = [(base, v, v, azimuth, i) for i, v in enumerate(velocities)]
    return SweepResult("velocity", _map(_sweep_point, tasks, jobs), base.params)


def run_angle_sweep(base: Scenario, theta_from_deg: float = -80.0, theta_to_deg: float = 80.0,
                    step_deg: float = 1.0, ground_speed: float = 10.0, jobs: int = 1) -> SweepResult:
    """Sweep azimuth with radial velocity ``ground_speed * cos(theta)``."""
    angles = sweep_points(theta_from_deg, theta_to_deg, step_deg)
    for a in angles:
        if not abs(a) < 90:
            raise ValueError(f"angle {a} deg outside (-90, 90)")
    tasks = [(base, a, ground_speed * math.cos(math.radians(a)), math.radians(a), i)
             for i, a in enumerate(angles)]
    return SweepResult("angle", _map(_sweep_point, tasks, jobs), base.params, x_label="theta_deg")


@dataclass
class OracleTrial:
    velocity: float
    azimuth_deg: float
    noise_free: tuple[int, int]
    noisy: tuple[int, int] | None = None


@dataclass
class OracleReport:
    trials: list[OracleTrial]
    snr_db: float
    noise_free_agreement: float
    snr_agreement: float | None

    def summary(self) -> dict:
        return {"trials": len(self.trials), "noise_free_agreement": self.noise_free_agreement,
                "snr_db": None if math.isinf(self.snr_db) else self.snr_db, "snr_agreement": self.snr_agreement}


def _oracle_point(scenario: Scenario) -> tuple[int, int] | None:
    pairs = run_pipeline(scenario)
    if not pairs:
        return None
    det, result = pairs[0]
    return result.n, hpc_baseline(det, scenario.params).n


def _oracle_trial(args) -> OracleTrial:
    base, v, theta_deg, index = args
    target = dataclasses.replace(base.targets[0] if base.targets else Target(range=10.0),
                                 velocity=v, azimuth=math.radians(theta_deg))
    scenario = dataclasses.replace(base, targets=(target,), seed=point_seed(base.seed, index),
                                   detector=base.detector or StrongestK(1))
    trial = OracleTrial(v, theta_deg, _oracle_point(dataclasses.replace(scenario, snr_db=NOISE_FREE)))
    if not base.noise_free:
        trial.noisy = _oracle_point(scenario)
    return trial


def compare_oracle(base: Scenario, trials: int = 500, seed: int = 0,
                   points: list[tuple[float, float]] | None = None, jobs: int = 1) -> OracleReport:
    """Agreement on the rotation count between ``disambiguate`` and ``hpc_baseline``.

    Random scenarios draw ``|v| <= 0.95 * extended_v_max`` and ``|theta| <= 60 deg``
    unless explicit ``(velocity, theta_deg)`` points are given. Each trial runs
    noise-free and, if the base scenario has a finite SNR, at that SNR too.
    """
    if points is None:
        if trials < 1:
            raise ValueError(f"trial count must be >= 1 (got {trials})")
        span = 0.95 * derive(base.params).extended_v_max
        rng = np.random.default_rng(seed)
        points = [(float(rng.uniform(-span, span)), float(rng.uniform(-60, 60)))
                  for _ in range(trials)]
    tasks = [(base, v, theta, i) for i, (v, theta) in enumerate(points)]
    results = _map(_oracle_trial, tasks, jobs)

    def agreement(pairs):
        hits = [p is not None and same_rotation(p[0], p[1], base.params) for p in pairs]
        return sum(hits) / len(hits)

    return OracleReport(
        trials=results,
        snr_db=base.snr_db,
        noise_free_agreement=agreement([t.noise_free for t in results]),
        snr_agreement=None if base.noise_free else agreement([t.noisy for t in results]),
    )
