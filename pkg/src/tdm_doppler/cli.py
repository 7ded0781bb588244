"""Command-line entry point: ``tdm-doppler <subcommand> [options]``."""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

from . import cubeio, outputs
from .config import RadarParams, load_config
from .harness import (NOISE_FREE, PipelineError, Scenario, compare_oracle, run_angle_sweep,
                      run_velocity_sweep)
from .processing import CACFAR, StrongestK, detect_peaks, range_doppler_process
from .disambiguation import disambiguate
from .synth import Target, synthesize_cube


class CLIError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError(f"usage: {message}")


def _target(text: str) -> Target:
    try:
        parts = [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad target {text!r}") from None
    if not 1 <= len(parts) <= 3:
        raise argparse.ArgumentTypeError(f"target must be RANGE[,VELOCITY[,AZIMUTH_DEG]], got {text!r}")
    r, v, az = (parts + [0.0, 0.0])[:3]
    return Target(range=r, velocity=v, azimuth=math.radians(az))


def _common() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="flat YAML/JSON radar config")
    common.add_argument("--seed", type=int, default=0)
    noise = common.add_mutually_exclusive_group()
    noise.add_argument("--snr-db", type=float, default=20.0)
    noise.add_argument("--noise-free", action="store_true")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--detector", choices=["strongest-k", "ca-cfar"], default="strongest-k")
    common.add_argument("--k", type=int, default=None, help="peaks kept by strongest-k")
    common.add_argument("--cfar-guard", type=int, default=4)
    common.add_argument("--cfar-train", type=int, default=8)
    common.add_argument("--cfar-threshold", type=float, default=10.0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--range", type=float, default=10.0, dest="target_range",
                        help="target range for sweeps (m)")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tdm-doppler", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()

    p = sub.add_parser("synth", parents=[common], help="simulate a cube file")
    p.add_argument("--target", type=_target, action="append", default=[],
                   help="RANGE,VELOCITY,AZIMUTH_DEG (repeatable)")
    p.add_argument("--name", default="cube.rdc")

    p = sub.add_parser("process", parents=[common], help="cube file -> detections CSV")
    p.add_argument("cube", type=Path)
    p.add_argument("--dump-maps", action="store_true", help="also write maps.rdm")

    p = sub.add_parser("sweep-velocity", parents=[common])
    p.add_argument("--v-from", type=float, default=-22.0)
    p.add_argument("--v-to", type=float, default=22.0)
    p.add_argument("--step", type=float, default=0.2)
    p.add_argument("--theta-deg", type=float, default=0.0)

    p = sub.add_parser("sweep-angle", parents=[common])
    p.add_argument("--theta-from", type=float, default=-80.0)
    p.add_argument("--theta-to", type=float, default=80.0)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--speed", type=float, default=10.0)

    p = sub.add_parser("compare-oracle", parents=[common])
    p.add_argument("--trials", type=int, default=500)
    return parser


def _detector(args):
    if args.detector == "ca-cfar":
        return CACFAR(args.cfar_guard, args.cfar_train, args.cfar_threshold)
    return StrongestK(args.k) if args.k else None


def _scenario(args) -> Scenario:
    params = load_config(args.config) if args.config else RadarParams()
    return Scenario(params=params, targets=(Target(range=args.target_range),), seed=args.seed,
                    snr_db=NOISE_FREE if args.noise_free else args.snr_db, detector=_detector(args))


def _cmd_synth(args) -> None:
    scenario = _scenario(args)
    targets = [Target(t.range, t.velocity, t.azimuth, scenario.snr_db) for t in args.target]
    cube = synthesize_cube(scenario.params, targets, args.seed, noise=not scenario.noise_free)
    path = args.out / args.name
    cubeio.write_cube(cube, path)
    print(path)


def _cmd_process(args) -> None:
    cube = cubeio.read_cube(args.cube)
    maps = range_doppler_process(cube)
    detections = detect_peaks(maps, _detector(args) or StrongestK(1))
    path = args.out / "detections.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["range_bin", "doppler_bin", "range_m", "v_det", "magnitude",
                         "n_raw", "n", "v_hat", "aoa_deg", "coherence"])
        for det in detections:
            r = disambiguate(det, cube.params)
            writer.writerow([det.range_bin, det.doppler_bin, *map(outputs._fmt, (
                det.range_m, det.v_det, det.magnitude, r.n_raw)), r.n,
                *map(outputs._fmt, (r.v_hat, r.aoa_deg, r.coherence))])
    if args.dump_maps:
        cubeio.write_maps(maps, args.out / "maps.rdm", seed=cube.seed)
    print(path)


def _print_summary(summary: dict) -> None:
    print(" ".join(f"{k}={v}" for k, v in summary.items()))


def _cmd_sweep_velocity(args) -> None:
    result = run_velocity_sweep(_scenario(args), args.v_from, args.v_to, args.step,
                                math.radians(args.theta_deg), jobs=args.jobs)
    outputs.emit_outputs(result, args.out)
    _print_summary(result.summary())


def _cmd_sweep_angle(args) -> None:
    result = run_angle_sweep(_scenario(args), args.theta_from, args.theta_to, args.step,
                             args.speed, jobs=args.jobs)
    outputs.emit_outputs(result, args.out)
    _print_summary(result.summary())


def _cmd_compare_oracle(args) -> None:
    report = compare_oracle(_scenario(args), args.trials, args.seed, jobs=args.jobs)
    outputs.emit_oracle(report, args.out)
    _print_summary(report.summary())


COMMANDS = {
    "synth": _cmd_synth,
    "process": _cmd_process,
    "sweep-velocity": _cmd_sweep_velocity,
    "sweep-angle": _cmd_sweep_angle,
    "compare-oracle": _cmd_compare_oracle,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not args.out.is_dir():
            raise CLIError(f"output directory {args.out} does not exist")
        COMMANDS[args.command](args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PipelineError as exc:
        print(f"error: {exc.stage}: {' '.join(str(exc.cause).split())}", file=sys.stderr)
        return 1
    except (OSError, ValueError, IndexError) as exc:
        print(f"error: {type(exc).__name__}: {' '.join(str(exc).split())}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
