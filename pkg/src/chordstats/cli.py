"""Command-line surface: simulate, pdf, cdf, compare, recover, mean.

Everything is batch-oriented and deterministic: simulation seeds are
required flags, outputs are self-describing CSV/JSON, and identical
(seed, config, version) always produces bit-identical files.

Exit codes: 0 success, 1 usage errors, 2 computation failures (including a
failed comparison threshold and insufficient recovery evidence), 3 I/O.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import analytic, billiard, fileio, lines, stats
from .core import Box, FixedStart, UniformStart

# raw sample files larger than this default to histogram emission
RAW_EMIT_LIMIT = 10_000_000
DEFAULT_BINS = 200
DEFAULT_KS_THRESHOLD = 0.01


class UsageError(Exception):
    exit_code = 1


class ComputeError(Exception):
    exit_code = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we use 1
        raise UsageError(message)


def _parse_box(text: str) -> Box:
    try:
        return Box.parse(text)
    except ValueError as exc:
        raise UsageError(f"bad --box value {text!r}: {exc}") from exc


def _parse_start(text: str, box: Box):
    if text == "origin":
        return FixedStart.origin(box.dimension)
    if text == "uniform":
        return UniformStart()
    try:
        point = tuple(float(tok) for tok in text.split(","))
        return FixedStart(point)
    except ValueError as exc:
        raise UsageError(f"bad --start value {text!r}") from exc


def _parse_grid(text: str) -> np.ndarray:
    try:
        lo, hi, step = (float(tok) for tok in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"bad --grid value {text!r}, expected lo:hi:step") from exc
    if step <= 0 or hi < lo:
        raise UsageError("grid needs step > 0 and hi >= lo")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def _apply_config_file(argv: list[str]) -> list[str]:
    """Expand `--config file` into key=value derived flags (flags win)."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config needs a file argument")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2:]
    injected: list[str] = []
    try:
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise UsageError(f"config line {line!r} is not key=value")
                key, value = line.split("=", 1)
                injected += [f"--{key.strip().replace('_', '-')}", value.strip()]
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    # injected flags go right after the subcommand so explicit flags override
    return rest[:1] + injected + rest[1:]


# --- analytic model registry -------------------------------------------------

def _model_density(model: str, box: Box):
    if model == "X2d":
        if box.dimension != 2:
            raise UsageError("model X2d needs a 2D box")
        return analytic.spreading_density_2d(box)
    if model == "X3d":
        if box.dimension != 3:
            raise UsageError("model X3d needs a 3D box")
        return analytic.spreading_density_3d(box)
    if model == "Y2d":
        if box.dimension != 2:
            raise UsageError(
                "the bounce-count limit density is only available for 2D boxes"
            )
        return analytic.absorption_density_2d(box)
    raise UsageError(f"unknown analytic model {model!r}")


def _model_cdf(model: str, box: Box, mc_samples: int, seed: int):
    if model == "X2d":
        if box.dimension != 2:
            raise UsageError("model X2d needs a 2D box")
        return lambda t: analytic.cdf_spreading_2d(box, t)
    if model == "general-n":
        return lambda t: analytic.cdf_spreading_general(
            box, t, samples=mc_samples, seed=seed
        )
    return _model_density(model, box).cdf_callable()


def _breakpoint_meta(density) -> list[dict]:
    return [
        {"location": bp.location, "kind": bp.kind.value}
        for bp in density.breakpoints
    ]


# --- subcommands --------------------------------------------------------------

def _cmd_simulate(args) -> int:
    box = _parse_box(args.box)
    fmt = args.format
    meta = {"model": args.model, "box": list(box.sides), "seed": args.seed}

    if args.model == "chords":
        if args.count is None:
            raise UsageError("chords model needs --count")
        sample = lines.sample_chords(box, args.count, args.seed)
        expected = args.count
        gap_iter = None
    elif args.model == "spreading":
        if args.particles is None or args.distance is None:
            raise UsageError("spreading model needs --particles and --distance")
        start = _parse_start(args.start, box)
        meta.update(particles=args.particles, distance=args.distance, start=args.start)
        expected = int(args.particles * args.distance / analytic.mean_free_path(box))
        gap_iter = lambda: billiard.iter_spreading_gaps(
            box, args.particles, args.distance, start, args.seed
        )
        sample = None
    elif args.model == "absorption":
        if args.particles is None or args.bounces is None:
            raise UsageError("absorption model needs --particles and --bounces")
        start = _parse_start(args.start, box)
        meta.update(particles=args.particles, bounces=args.bounces, start=args.start)
        expected = args.particles * args.bounces
        gap_iter = lambda: billiard.iter_absorption_gaps(
            box, args.particles, args.bounces, start, args.seed
        )
        sample = None
    else:
        raise UsageError(f"unknown simulation model {args.model!r}")

    emit = args.emit
    if emit == "auto":
        emit = "histogram" if expected > RAW_EMIT_LIMIT else "raw"

    if emit == "histogram":
        hist = stats.Histogram.uniform(box.diag(), args.bins)
        if gap_iter is None:
            hist.add(sample.lengths)
        else:
            for chunk in gap_iter():
                hist.add(chunk)
        fileio.write_histogram(args.output, hist, meta, fmt)
    else:
        if sample is None:
            lengths = np.concatenate(list(gap_iter()))
        else:
            lengths = sample.lengths
        fileio.write_samples(args.output, lengths, meta, fmt)
    return 0


def _cmd_table(args, which: str) -> int:
    box = _parse_box(args.box)
    grid = _parse_grid(args.grid)
    d = box.diag()
    meta = {"box": list(box.sides), "model": args.model}

    if which == "pdf":
        if args.model == "general-n":
            raise UsageError(
                "no closed-form density is available in general dimension; "
                "use `cdf --model general-n` instead"
            )
        density = _model_density(args.model, box)
        grid = grid[(grid > 0.0) & (grid <= d)]  # clip to the support
        if grid.size == 0:
            raise UsageError("grid does not intersect the support (0, diag]")
        values = density.pdf(grid)
        meta["breakpoints"] = _breakpoint_meta(density)
        fileio.write_table(args.output, {"t": grid, "pdf": values}, meta, args.format)
        return 0

    cdf = _model_cdf(args.model, box, args.mc_samples, args.seed)
    if args.model != "general-n":
        meta["breakpoints"] = _breakpoint_meta(_model_density(args.model, box))
    values = np.asarray(cdf(grid))
    fileio.write_table(args.output, {"t": grid, "cdf": values}, meta, args.format)
    return 0


def _load_sample(path) -> fileio.SampleFile:
    try:
        return fileio.read_sample_file(path)
    except OSError as exc:
        exc2 = ComputeError(str(exc))
        exc2.exit_code = 3
        raise exc2 from exc
    except ValueError as exc:
        raise ComputeError(f"cannot parse {path}: {exc}") from exc


def _cmd_compare(args) -> int:
    sf = _load_sample(args.sample)
    if sf.count == 0:
        raise ComputeError(f"{args.sample}: no samples")
    meta_box = sf.meta.get("box")
    if args.box is not None:
        box = _parse_box(args.box)
        if meta_box is not None and list(box.sides) != list(meta_box):
            raise UsageError(
                f"--box {args.box} disagrees with the file metadata box {meta_box}"
            )
    elif meta_box is not None:
        box = Box(meta_box)
    else:
        raise UsageError("sample file has no box metadata; pass --box")

    cdf = _model_cdf(args.model, box, args.mc_samples, args.seed)
    if sf.is_histogram:
        hist = sf.histogram
        ks = stats.ks_distance_binned(hist.edges, hist.counts, cdf)
        sample_mean = float(np.sum(hist.centers() * hist.counts) / hist.total)
    else:
        ks = stats.ks_distance(np.sort(sf.lengths), cdf)
        sample_mean = float(sf.lengths.mean())
        hist = stats.Histogram.from_values(
            sf.lengths, max(box.diag(), float(sf.lengths.max())), args.bins
        )

    if args.model in ("X2d", "X3d", "general-n"):
        model_mean = analytic.mean_free_path(box)
    else:
        dens = analytic.absorption_density_2d(box)
        model_mean = analytic.PiecewiseDensity(
            dens.support_end, dens.breakpoints, lambda t: dens.pdf(t) * t
        ).integral()

    residuals = None
    if args.model != "general-n":
        density = _model_density(args.model, box)
        centers = hist.centers()
        inside = (centers > 0) & (centers < density.support_end)
        resid = np.zeros(centers.size)
        resid[inside] = hist.density()[inside] - density.pdf(centers[inside])
        residuals = resid.tolist()

    report = {
        "sample": str(args.sample),
        "model": args.model,
        "box": list(box.sides),
        "count": sf.count,
        "ks_distance": ks,
        "threshold": args.threshold,
        "passed": bool(ks < args.threshold),
        "sample_mean": sample_mean,
        "model_mean": model_mean,
        "mean_error": abs(sample_mean - model_mean),
        "per_bin_residuals": residuals,
    }
    text = json.dumps(report, indent=2)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    print(f"ks={ks:.6g} threshold={args.threshold:g} "
          f"{'PASS' if report['passed'] else 'FAIL'}")
    if not args.output:
        print(text)
    if not report["passed"]:
        raise ComputeError(
            f"KS distance {ks:.6g} is not below the threshold {args.threshold:g}"
        )
    return 0


def _cmd_recover(args) -> int:
    sf = _load_sample(args.sample)
    if sf.is_histogram:
        raise UsageError("recovery needs raw sample files, not histograms")
    if sf.count < 10_000:
        raise ComputeError(f"recovery wants >= 10000 samples, file has {sf.count}")
    meta_box = sf.meta.get("box")
    dims = args.dims or (len(meta_box) if meta_box else None)
    if dims not in (2, 3):
        raise UsageError("pass --dims 2 or --dims 3 (no box metadata in the file)")
    recover = stats.recover_sides_2d if dims == 2 else stats.recover_sides_3d
    report = recover(sf.lengths)
    payload = {
        "sample": str(args.sample),
        "dimension": dims,
        "sufficient": report.sufficient,
        "sides": list(report.sides) if report.sides else None,
        "multiplicities": list(report.multiplicities) if report.multiplicities else None,
        "breakpoints": [
            {"location": loc, "score": score} for loc, score in report.breakpoints
        ],
        "diagnostics": report.diagnostics,
    }
    text = json.dumps(payload, indent=2)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if report.sufficient:
        sides = ", ".join(f"{s:.6g}" for s in report.sides)
        print(f"recovered sides: {sides}")
        return 0
    print(f"insufficient evidence: {report.diagnostics.get('reason', 'unknown')}")
    raise ComputeError("side recovery found insufficient evidence")


def _cmd_mean(args) -> int:
    box = _parse_box(args.box)
    value = analytic.mean_free_path(box)
    if args.format == "json":
        print(json.dumps({"box": list(box.sides), "mean_free_path": value}))
    else:
        print(f"{value!r}")
    return 0


# --- argument wiring ----------------------------------------------------------

def _build_parser() -> _Parser:
    p = _Parser(prog="chordstats", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a sampling model and write lengths")
    sim.add_argument("--box", required=True)
    sim.add_argument("--model", required=True, choices=["spreading", "absorption", "chords"])
    sim.add_argument("--particles", type=int)
    sim.add_argument("--distance", type=float)
    sim.add_argument("--bounces", type=int)
    sim.add_argument("--count", type=int)
    sim.add_argument("--start", default="origin", help="origin | uniform | x,y[,z]")
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--emit", choices=["auto", "raw", "histogram"], default="auto")
    sim.add_argument("--bins", type=int, default=DEFAULT_BINS)
    sim.add_argument("--format", choices=["csv", "json"], default="csv")
    sim.add_argument("-o", "--output", default="-")
    sim.set_defaults(func=_cmd_simulate)

    for name in ("pdf", "cdf"):
        tp = sub.add_parser(name, help=f"tabulate an analytic {name}")
        tp.add_argument("--box", required=True)
        tp.add_argument("--model", required=True,
                        choices=["X2d", "X3d", "Y2d", "general-n"])
        tp.add_argument("--grid", required=True, help="lo:hi:step")
        tp.add_argument("--mc-samples", type=int, default=1 << 20)
        tp.add_argument("--seed", type=int, default=0)
        tp.add_argument("--format", choices=["csv", "json"], default="csv")
        tp.add_argument("-o", "--output", default="-")
        tp.set_defaults(func=lambda a, _n=name: _cmd_table(a, _n))

    cmp_ = sub.add_parser("compare", help="KS-compare a sample file to a model")
    cmp_.add_argument("sample")
    cmp_.add_argument("--model", required=True,
                      choices=["X2d", "X3d", "Y2d", "general-n"])
    cmp_.add_argument("--box")
    cmp_.add_argument("--threshold", type=float, default=DEFAULT_KS_THRESHOLD)
    cmp_.add_argument("--bins", type=int, default=DEFAULT_BINS)
    cmp_.add_argument("--mc-samples", type=int, default=1 << 20)
    cmp_.add_argument("--seed", type=int, default=0)
    cmp_.add_argument("-o", "--output")
    cmp_.set_defaults(func=_cmd_compare)

    rec = sub.add_parser("recover", help="estimate box sides from a sample file")
    rec.add_argument("sample")
    rec.add_argument("--dims", type=int, choices=[2, 3])
    rec.add_argument("-o", "--output")
    rec.set_defaults(func=_cmd_recover)

    mn = sub.add_parser("mean", help="closed-form mean free path")
    mn.add_argument("--box", required=True)
    mn.add_argument("--format", choices=["csv", "json"], default="csv")
    mn.set_defaults(func=_cmd_mean)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        argv = _apply_config_file(argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ComputeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
