"""Command-line interface.

Exit codes: 0 success, 2 usage or validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import logging
import os
import sys

import numpy as np

from . import io
from .channels import PRESETS, coherence_population_ratio, get_preset
from .core import params_to_generator
from .reconstruction import (
    BenchmarkSettings,
    CostConfig,
    OptimizerConfig,
    benchmark_samples,
    loglog_slope,
    reconstruct,
    stopping_threshold,
    summarize,
)
from .svg import frame_svg
from .synthetic import ExperimentDesign, generate_dataset

log = logging.getLogger("lindrecon")


class CLIError(Exception):
    def __init__(self, message, code=2):
        super().__init__(message)
        self.code = code


def parse_grid(text):
    """``start:stop:count`` uniform grid, or a comma-separated list of times."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            count = int(count)
            if count < 1:
                raise ValueError
            times = np.linspace(float(start), float(stop), count).tolist()
        else:
            times = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise CLIError(f"bad time grid {text!r}; use start:stop:count or t1,t2,...") from None
    if not times or not all(np.isfinite(times)):
        raise CLIError(f"bad time grid {text!r}")
    if min(times) < 0:
        raise CLIError("times must be non-negative")
    return times


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise CLIError(f"cannot write {path}: {exc}", code=3) from None


def _read_doc(path):
    try:
        return io.read_json(path)
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc}", code=3) from None
    except ValueError as exc:
        raise CLIError(f"{path} is not valid JSON: {exc}") from None


def _echo(args, text):
    if not args.quiet:
        print(text)


def _preset_kwargs(args):
    out = {}
    for key in ("gamma", "rabi", "stark"):
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    return out


def _generator_source(args):
    """Return ``(params, preset_or_None)`` for a preset name or a result file."""
    if args.source in PRESETS:
        try:
            preset = get_preset(args.source, **_preset_kwargs(args))
        except (TypeError, ValueError) as exc:
            raise CLIError(str(exc)) from None
        return preset.params, preset
    if not os.path.exists(args.source):
        raise CLIError(f"unknown preset {args.source!r} (choose from {', '.join(PRESETS)}) and no such file")
    try:
        return io.params_from_dict(_read_doc(args.source)), None
    except io.SchemaError as exc:
        raise CLIError(f"{args.source}: {exc}") from None


def cmd_simulate(args):
    params, preset = _generator_source(args)
    if args.times is not None:
        times = parse_grid(args.times)
    elif preset is not None:
        times = np.linspace(0.0, preset.time_span, 30).tolist()
    else:
        raise CLIError("--times is required when simulating from a params file")
    shots = args.shots if args.shots is not None else (preset.shots if preset else None)
    if shots is None:
        raise CLIError("--shots is required when simulating from a params file")
    try:
        design = ExperimentDesign(tuple(times), shots)
    except ValueError as exc:
        raise CLIError(str(exc)) from None
    data = generate_dataset(params, design, args.seed)
    _write(args.out, io.dumps(io.dataset_to_dict(data)))
    log.info("wrote %d records", design.n_cells)


def cmd_reconstruct(args):
    try:
        data = io.dataset_from_dict(_read_doc(args.dataset))
    except io.SchemaError as exc:
        raise CLIError(f"{args.dataset}: {exc}") from None
    try:
        cfg = CostConfig.for_dataset(data, penalty_weight=args.penalty_weight)
        opt = OptimizerConfig(
            restarts=args.restarts,
            max_iters=args.max_iters,
            seed=args.seed,
            stop_threshold=args.stop_threshold,
        )
    except ValueError as exc:
        raise CLIError(str(exc)) from None
    result = reconstruct(data, cfg, opt)
    config = {
        "restarts": opt.restarts,
        "max_iters": opt.max_iters,
        "tolerance": opt.tolerance,
        "xatol": opt.xatol,
        "penalty_weight": cfg.penalty_weight,
        "nyquist_rate": cfg.nyquist_rate,
        "stop_threshold": opt.stop_threshold,
        "metric": "kl",
    }
    doc = io.result_to_dict(result, io.provenance(args.seed, config))
    _write(args.out, io.dumps(doc))
    threshold = opt.stop_threshold if opt.stop_threshold is not None else stopping_threshold(data.design.shots)
    G = result.generator
    _echo(args, f"infidelity {result.infidelity:.6g} (threshold {threshold:.6g})")
    _echo(args, f"converged {str(result.converged).lower()}")
    _echo(args, f"coherence/population decay ratio {coherence_population_ratio(G):.4g}")
    _echo(args, f"generator Frobenius norm {np.linalg.norm(G):.6g}")


def benchmark_csv(rows):
    buf = _stdio.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["M", "mean_err", "p16", "p84", "mean_infidelity", "bound_half_sqrtM"])
    for r in rows:
        writer.writerow([r.shots] + [repr(float(x)) for x in (r.mean_error, r.p16, r.p84, r.mean_infidelity, r.bound)])
    return buf.getvalue()


def cmd_benchmark(args):
    try:
        shots = [int(s) for s in args.shots.split(",")]
    except ValueError:
        raise CLIError(f"bad shot list {args.shots!r}") from None
    if any(s < 1 for s in shots):
        raise CLIError("shot counts must be positive")
    if args.n < 10:
        raise CLIError("-n must be at least 10")
    if args.workers < 1:
        raise CLIError("--workers must be positive")
    settings = BenchmarkSettings(
        start=args.start, stop=args.stop, count=args.count,
        rate_scale=args.rate_scale, rotation_scale=args.rotation_scale,
    )
    opt = OptimizerConfig(restarts=args.restarts, max_iters=args.max_iters)
    samples = benchmark_samples(shots, args.n, args.seed, settings, opt, workers=args.workers)
    rows = summarize(shots, samples)
    _write(args.out, benchmark_csv(rows))
    for r in rows:
        _echo(args, f"M={r.shots:6d}  mean_err={r.mean_error:.4g}  band=[{r.p16:.4g}, {r.p84:.4g}]  "
                    f"mean_infidelity={r.mean_infidelity:.4g}  bound={r.bound:.4g}")
    if len(rows) > 1:
        _echo(args, f"log-log slope of mean_err: {loglog_slope(shots, [r.mean_error for r in rows]):.3f}")
        _echo(args, f"log-log slope of mean_infidelity: "
                    f"{loglog_slope(shots, [r.mean_infidelity for r in rows]):.3f}")


def cmd_bloch_movie(args):
    params, preset = _generator_source(args)
    if args.times is not None:
        times = parse_grid(args.times)
    elif preset is not None:
        times = list(preset.snapshot_times)
    else:
        raise CLIError("--times is required for a params/result file")
    if args.svg and (args.out is None or args.out == "-"):
        raise CLIError("--svg needs --out to name the frame files")
    G = params_to_generator(params)
    frames = [io.bloch_frame(G, t) for t in sorted(times)]
    _write(args.out, io.dumps(io.frames_to_dict(frames, args.source)))
    if args.svg:
        stem = os.path.splitext(args.out)[0]
        for n, frame in enumerate(frames):
            _write(f"{stem}_frame{n:03d}.svg", frame_svg(frame))


def cmd_validate(args):
    doc = _read_doc(args.path)
    try:
        kind = io.detect_kind(doc)
        if kind == "dataset":
            data = io.dataset_from_dict(doc)
            detail = f"{data.design.n_cells} records"
        elif kind == "result":
            loaded = io.result_from_dict(doc)
            detail = f"infidelity {loaded.infidelity:.6g}"
        elif kind == "params":
            io.params_from_dict(doc)
            detail = "12 parameters"
        else:
            detail = f"{len(io.frames_from_dict(doc)['frames'])} frames"
    except io.SchemaError as exc:
        raise CLIError(f"{args.path}: invalid: {exc}") from None
    _echo(args, f"{args.path}: valid {kind} ({detail})")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--out", default=None, help="output path (default: standard output)")
    common.add_argument("--quiet", action="store_true", help="suppress the summary on standard output")

    parser = argparse.ArgumentParser(prog="lindrecon", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def preset_flags(p):
        p.add_argument("--gamma", type=float, help="preset rate override (1/us)")
        p.add_argument("--rabi", type=float, help="depol-rabi drive override (rad/us)")
        p.add_argument("--stark", type=float, help="depol Stark rotation override (rad/us)")

    p = sub.add_parser("simulate", parents=[common], help="simulate a measurement dataset")
    p.add_argument("source", help=f"preset ({', '.join(PRESETS)}) or params/result file")
    p.add_argument("--times", help="start:stop:count or comma-separated times (us)")
    p.add_argument("--shots", type=int, help="repetitions per observable")
    preset_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", parents=[common], help="fit a Lindbladian to a dataset")
    p.add_argument("dataset")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--max-iters", type=int, default=4000)
    p.add_argument("--lambda", dest="penalty_weight", type=float, default=10.0)
    p.add_argument("--stop-threshold", type=float, default=None, help="default 0.5/sqrt(M)")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("benchmark", parents=[common], help="Monte-Carlo benchmark over random processes")
    p.add_argument("--shots", default="64,256,1024,4096")
    p.add_argument("-n", type=int, default=100, help="processes per shot count")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--stop", type=float, default=10.0)
    p.add_argument("--count", type=int, default=30)
    p.add_argument("--rate-scale", type=float, default=0.1)
    p.add_argument("--rotation-scale", type=float, default=1.0)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--max-iters", type=int, default=4000)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("bloch-movie", parents=[common], help="export Bloch ellipsoid frames")
    p.add_argument("source", help=f"preset ({', '.join(PRESETS)}) or params/result file")
    p.add_argument("--times", help="start:stop:count or comma-separated times (us)")
    p.add_argument("--svg", action="store_true", help="also write one SVG per frame next to --out")
    preset_flags(p)
    p.set_defaults(func=cmd_bloch_movie)

    p = sub.add_parser("validate", parents=[common], help="check a file against its schema")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        args.func(args)
    except CLIError as exc:
        print(f"lindrecon: error: {exc}", file=sys.stderr)
        return exc.code
    return 0


if __name__ == "__main__":
    sys.exit(main())
