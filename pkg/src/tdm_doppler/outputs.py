"""CSV, summary and SVG chart emission for sweep results."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .config import derive  # noqa: E402
from .harness import OracleReport, SweepResult  # noqa: E402

SWEEP_HEADER = ["truth_v", "v_det", "n_raw", "n", "v_hat", "aoa_deg", "abs_err", "status"]

plt.rcParams["svg.hashsalt"] = "tdm-doppler"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(round(value, 9))
    return str(value)


def _out_dir(out_dir) -> Path:
    out = Path(out_dir)
    if not out.is_dir():
        raise FileNotFoundError(f"output directory {out} does not exist")
    return out


def write_sweep_csv(result: SweepResult, path: Path) -> None:
    """Rows follow SWEEP_HEADER; angle sweeps get a leading theta_deg column."""
    header = SWEEP_HEADER if result.kind == "velocity" else ["theta_deg"] + SWEEP_HEADER
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for r in result.rows:
                values = [r.truth_v, r.v_det, r.n_raw, r.n, r.v_hat, r.aoa_deg, r.abs_err, r.status]
                if result.kind != "velocity":
                    values.insert(0, r.x)
                writer.writerow([_fmt(v) for v in values])
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc


def _save(fig, path: Path) -> None:
    try:
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc
    finally:
        plt.close(fig)


def _reference_lines(ax, result: SweepResult) -> None:
    d = derive(result.params)
    for level in (d.v_max, -d.v_max):
        ax.axhline(level, color="tab:orange", lw=0.8, ls="--")
    for level in (d.extended_v_max, -d.extended_v_max):
        ax.axhline(level, color="tab:green", lw=1.0)


def plot_velocity(result: SweepResult, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    rows = result.in_span
    ax.plot([r.x for r in result.rows], [r.truth_v for r in result.rows], color="0.7", lw=1, label="truth")
    ax.plot([r.x for r in rows], [r.v_hat for r in rows], ".", ms=3, label="estimated")
    ax.plot([r.x for r in rows], [r.v_det for r in rows], ".", ms=2, color="tab:red", label="Doppler FFT")
    _reference_lines(ax, result)
    ax.set_xlabel("true velocity (m/s)" if result.kind == "velocity" else "azimuth (deg)")
    ax.set_ylabel("velocity (m/s)")
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_n_estimate(result: SweepResult, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    rows = result.in_span
    ax.scatter([r.x for r in rows], [r.n_raw for r in rows], s=4)
    ax.set_xlabel("true velocity (m/s)")
    ax.set_ylabel("estimated rotation count")
    ax.grid(True, lw=0.3)
    fig.tight_layout()
    _save(fig, path)


def _summary_text(summary: dict) -> str:
    return "".join(f"{k}: {v}\n" for k, v in summary.items())


def emit_outputs(result: SweepResult, out_dir) -> list[Path]:
    """Write the CSV, summary and charts for a sweep; returns the written paths."""
    out = _out_dir(out_dir)
    stem = "velocity_sweep" if result.kind == "velocity" else "angle_sweep"
    paths = [out / f"{stem}.csv", out / f"{stem}_summary.txt", out / f"{stem}.svg"]
    write_sweep_csv(result, paths[0])
    paths[1].write_text(_summary_text(result.summary()))
    plot_velocity(result, paths[2])
    if result.kind == "velocity":
        paths.append(out / "n_estimate.svg")
        plot_n_estimate(result, paths[-1])
    return paths


def emit_oracle(report: OracleReport, out_dir) -> list[Path]:
    out = _out_dir(out_dir)
    csv_path = out / "oracle_compare.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["velocity", "theta_deg", "n_phase", "n_hpc", "n_phase_snr", "n_hpc_snr"])
        for t in report.trials:
            nf = t.noise_free or (None, None)
            noisy = t.noisy or (None, None)
            writer.writerow([_fmt(t.velocity), _fmt(t.azimuth_deg), *map(_fmt, nf), *map(_fmt, noisy)])
    summary_path = out / "oracle_summary.json"
    summary_path.write_text(json.dumps(report.summary(), indent=2, sort_keys=True) + "\n")
    return [csv_path, summary_path]
