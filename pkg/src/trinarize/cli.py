"""Command-line interface.

    trinarize trinarize IMAGE --out TRIMAP.png [--method pde] [--truth TRUTH.png]
    trinarize analyze [--a 0.25 --b 0.5 --c 0.75] [--size 101x101] [--csv f.csv]
    trinarize sweep IMAGE TRUTH --a-values 0.4:0.6:5 --c-values 0.66:0.74:5 --out s.csv
    trinarize bench --inputs 'img/*.png' --truths 'truth/*.png' --out bench.csv
    trinarize phantom --out-dir phantoms --count 5 --seed 0

Every option can also come from a ``--config`` file of ``key = value`` lines
(keys are option names without dashes, e.g. ``disk_radius = 15``); options
given on the command line win.  Exit status: 0 success, 1 usage or I/O
error, 2 degenerate segmentation.
"""

from __future__ import annotations

import argparse
import glob
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import evaluate, grid, phantom, pipeline, reaction
from .postprocess import DegenerateSegmentationError
from .reaction import ModelParams, ParameterError
from .solver import StabilityWarning, default_params

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DEGENERATE = 2

# option dest -> ModelParams field
PARAM_FLAGS = {
    "a": "a", "b": "b", "c": "c", "cd": "c_D", "cs": "c_S", "dt": "dt",
    "max_steps": "max_steps", "tol": "steady_tol",
}

BUILTIN_DEFAULTS = {
    "method": "pde",
    "disk_radius": 20,
    "largest_component": True,
    "seed": 0,
    "size": "101x101",
    "a_values": "0.4:0.6:5",
    "c_values": "0.66:0.74:5",
    "count": 5,
    "sigma": 0.05,
    "jobs": 1,
}


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def read_config(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _coerce(key: str, value):
    if not isinstance(value, str):
        return value
    if key in ("largest_component",):
        return value.lower() in ("1", "true", "yes", "on")
    if key in ("disk_radius", "seed", "max_steps", "count", "jobs"):
        return int(value)
    if key in ("a", "b", "c", "cd", "cs", "dt", "tol", "sigma"):
        return float(value)
    return value


def _resolve(args: argparse.Namespace) -> argparse.Namespace:
    config = read_config(args.config) if getattr(args, "config", None) else {}
    for key, value in vars(args).items():
        if value is not None:
            continue
        if key in config:
            setattr(args, key, _coerce(key, config[key]))
        elif key in BUILTIN_DEFAULTS:
            setattr(args, key, BUILTIN_DEFAULTS[key])
    return args


def _params_for(args, g: grid.GridSpec) -> ModelParams:
    overrides = {field: getattr(args, flag) for flag, field in PARAM_FLAGS.items()
                 if getattr(args, flag, None) is not None}
    dt = overrides.get("dt", g.dx * g.dy / 4.0)
    overrides.setdefault("c_S", 1.0 / dt)
    return default_params(g, **overrides)


def parse_values(text: str) -> list[float]:
    """``start:stop:count`` (inclusive linspace) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise CliError(f"bad range {text!r}; use start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise CliError("range count must be >= 1")
        return [round(v, 12) for v in np.linspace(start, stop, count)]
    values = [float(v) for v in text.split(",") if v.strip()]
    if not values:
        raise CliError("empty value list")
    return values


def parse_size(text: str) -> tuple[int, int]:
    """``WIDTHxHEIGHT`` -> (height, width)."""
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise CliError(f"bad size {text!r}; use WIDTHxHEIGHT") from None
    return h, w


# ---------------------------------------------------------------------------
# commands


def cmd_trinarize(args) -> int:
    image = grid.load_grayscale(args.input)
    params = _params_for(args, grid.grid_spec(image)) if args.method == "pde" else None
    out = Path(args.out) if args.out else Path(args.input).with_name(
        Path(args.input).stem + "_trimap.png")
    try:
        result = pipeline.segment(image, args.method, params=params,
                                  disk_radius=args.disk_radius,
                                  keep_largest=args.largest_component, seed=args.seed)
    except DegenerateSegmentationError as exc:
        print(f"degenerate segmentation: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    grid.save_trimap(result, out)
    print(f"wrote {out}")
    if args.truth:
        truth = grid.load_trimap(args.truth)
        report = evaluate.score(result, truth)
        report_path = Path(args.report) if args.report else out.with_suffix(".json")
        report_path.write_text(report.to_json() + "\n")
        print(f"wrote {report_path}  average F1 {report.average_f1:.6f}  "
              f"average accuracy {report.average_accuracy:.6f}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    h, w = parse_size(args.size)
    g = grid.grid_spec(np.zeros((h, w)))
    p = _params_for(args, g)
    print(f"parameters: a={p.a:g} b={p.b:g} c={p.c:g} c_D={p.c_D:g} c_S={p.c_S:g} dt={p.dt:g}")
    print("equilibria:")
    for eq in reaction.classify_equilibria(p):
        print(f"  u={eq.root:g}  {eq.stability}")
    stable = ", ".join(f"{v:g}" for v in reaction.stable_states(p))
    print(f"stable states: {{{stable}}}")
    print(f"max |f| over [0,1]^4: {reaction.max_abs_source():.5f} (256/3125)")
    rep = reaction.check_stability(p, g)
    print(f"stability ({w}x{h} grid, dx={g.dx:g}, dy={g.dy:g}):")
    print(f"  lhs={rep.lhs:.6g} rhs={rep.rhs:.6g} satisfied={str(rep.satisfied).lower()} "
          f"ratio={rep.ratio:.6g}")
    if args.csv:
        u, f = reaction.phase_samples(p)
        with open(args.csv, "w") as fh:
            fh.write("u,f\n")
            for ui, fi in zip(u, f):
                fh.write(f"{ui:.3f},{fi:.10g}\n")
        print(f"wrote {args.csv}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    image = grid.load_grayscale(args.input)
    truth = grid.load_trimap(args.truth)
    if image.shape != truth.shape:
        raise CliError("image and truth differ in size")
    g = grid.grid_spec(image)
    overrides = {field: getattr(args, flag) for flag, field in PARAM_FLAGS.items()
                 if flag not in ("a", "b", "c") and getattr(args, flag, None) is not None}
    if "c_S" not in overrides:
        overrides["c_S"] = 1.0 / overrides.get("dt", g.dx * g.dy / 4.0)
    b = args.b if args.b is not None else 0.65
    result = evaluate.sweep(image, truth, parse_values(args.a_values),
                            parse_values(args.c_values), b,
                            disk_radius=args.disk_radius,
                            keep_largest=args.largest_component, **overrides)
    text = result.to_csv()
    if args.out:
        Path(args.out).write_text(text)
        a, c, v = result.best()
        print(f"wrote {args.out}; best a={a:g} c={c:g} average F1 {v:.6f}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _bench_one(job):
    image_path, truth_path, method, disk_radius, keep_largest, seed = job
    image = grid.load_grayscale(image_path)
    truth = grid.load_trimap(truth_path)
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", StabilityWarning)
        pred, _ = pipeline.segment_lenient(image, method, disk_radius=disk_radius,
                                           keep_largest=keep_largest, seed=seed)
    elapsed = time.perf_counter() - start
    return evaluate.score(pred, truth), elapsed


def bench_table(pairs, *, disk_radius=20, keep_largest=True, seed=0, jobs=1):
    """Average scores and total seconds per method over ``(image, truth)`` paths."""
    jobs_list = [(img, tru, m, disk_radius, keep_largest, seed)
                 for m in pipeline.METHOD_NAMES for img, tru in pairs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_bench_one, jobs_list))
    else:
        results = [_bench_one(j) for j in jobs_list]
    rows, timings = [], {}
    n = len(pairs)
    for k, method in enumerate(pipeline.METHOD_NAMES):
        chunk = results[k * n:(k + 1) * n]
        reports = [r for r, _ in chunk]
        rows.append({
            "method": method,
            "f1_class1": float(np.mean([r.class1.f1 for r in reports])),
            "f1_class2": float(np.mean([r.class2.f1 for r in reports])),
            "avg_f1": float(np.mean([r.average_f1 for r in reports])),
            "acc_class1": float(np.mean([r.class1.accuracy for r in reports])),
            "acc_class2": float(np.mean([r.class2.accuracy for r in reports])),
            "avg_acc": float(np.mean([r.average_accuracy for r in reports])),
        })
        timings[method] = sum(t for _, t in chunk)
    return rows, timings


BENCH_COLUMNS = ("method", "f1_class1", "f1_class2", "avg_f1",
                 "acc_class1", "acc_class2", "avg_acc")


def format_bench(rows) -> str:
    lines = [",".join(BENCH_COLUMNS)]
    for row in rows:
        lines.append(",".join([row["method"]] + [f"{row[k]:.6f}" for k in BENCH_COLUMNS[1:]]))
    return "\n".join(lines) + "\n"


def cmd_bench(args) -> int:
    inputs = sorted(glob.glob(args.inputs))
    truths = sorted(glob.glob(args.truths))
    if not inputs:
        raise CliError(f"no files match {args.inputs!r}")
    if len(inputs) != len(truths):
        raise CliError(f"{len(inputs)} inputs but {len(truths)} truths; pairs do not match")
    rows, timings = bench_table(list(zip(inputs, truths)), disk_radius=args.disk_radius,
                                keep_largest=args.largest_component, seed=args.seed,
                                jobs=args.jobs)
    text = format_bench(rows)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    # wall-clock lives apart from the table so the table stays reproducible
    timing_text = "method,seconds\n" + "".join(f"{m},{t:.3f}\n" for m, t in timings.items())
    if args.timings:
        Path(args.timings).write_text(timing_text)
    else:
        sys.stderr.write(timing_text)
    return EXIT_OK


def cmd_phantom(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    overrides = {"noise_sigma": args.sigma}
    if args.phantom_size:
        h, w = parse_size(args.phantom_size)
        overrides.update(height=h, width=w, center=(h / 2.0, w * 0.44),
                         semi_axes=(0.2 * min(h, w), 0.125 * min(h, w)),
                         tail_length=0.31 * min(h, w))
    for k, spec in enumerate(phantom.suite(args.count, args.seed, **overrides)):
        image, truth = phantom.generate(spec)
        grid.save_field(image, out_dir / f"phantom_{k:03d}.png")
        grid.save_trimap(truth, out_dir / f"phantom_{k:03d}_truth.png")
    print(f"wrote {args.count} phantom pairs to {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_param_flags(p: argparse.ArgumentParser, roots: bool = True) -> None:
    g = p.add_argument_group("model parameters")
    if roots:
        g.add_argument("--a", type=float, help="lower unstable root (default 0.5)")
        g.add_argument("--b", type=float, help="middle stable root (default 0.65)")
        g.add_argument("--c", type=float, help="upper unstable root (default 0.7)")
    g.add_argument("--cd", type=float, help="diffusion coefficient c_D (default 0.01)")
    g.add_argument("--cs", type=float, help="source coefficient c_S (default 1/dt)")
    g.add_argument("--dt", type=float, help="time step (default dx*dy/4)")
    g.add_argument("--max-steps", type=int, help="step cap (default 100)")
    g.add_argument("--tol", type=float, help="steady-state tolerance (default 1e-6)")


def _add_mask_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--disk-radius", type=int, help="closing disk radius in pixels (default 20)")
    p.add_argument("--largest-component", action=argparse.BooleanOptionalAction, default=None,
                   help="keep only the largest mask component (default on)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trinarize", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", help="key = value file providing option defaults")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("trinarize", help="segment one image")
    p.add_argument("input")
    p.add_argument("--out", help="output trimap PNG")
    p.add_argument("--method", choices=pipeline.METHOD_NAMES, default=None)
    p.add_argument("--truth", help="ground-truth trimap; writes a JSON report")
    p.add_argument("--report", help="JSON report path (default: OUT with .json)")
    p.add_argument("--seed", type=int)
    p.add_argument("--config", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    _add_param_flags(p)
    _add_mask_flags(p)
    p.set_defaults(func=cmd_trinarize)

    p = sub.add_parser("analyze", help="equilibria, source bound and stability report")
    p.add_argument("--size", help="grid as WIDTHxHEIGHT (default 101x101)")
    p.add_argument("--csv", help="write f(u) samples on [0,1] at spacing 1e-3")
    p.add_argument("--config", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    _add_param_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="average F1 over an (a, c) grid")
    p.add_argument("input")
    p.add_argument("truth")
    p.add_argument("--a-values", help="start:stop:count or comma list (default 0.4:0.6:5)")
    p.add_argument("--c-values", help="start:stop:count or comma list (default 0.66:0.74:5)")
    p.add_argument("--b", type=float, help="fixed middle root (default 0.65)")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--config", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    _add_param_flags(p, roots=False)
    _add_mask_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="score all methods on image/truth pairs")
    p.add_argument("--inputs", required=True, help="glob of input images")
    p.add_argument("--truths", required=True, help="glob of truth trimaps (same sort order)")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--timings", help="write per-method wall-clock CSV here (default stderr)")
    p.add_argument("--jobs", type=int, help="worker processes (default 1)")
    p.add_argument("--seed", type=int)
    p.add_argument("--config", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    _add_mask_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("phantom", help="write synthetic image/truth pairs")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--sigma", type=float, help="noise standard deviation (default 0.05)")
    p.add_argument("--size", dest="phantom_size", help="WIDTHxHEIGHT (default 128x128)")
    p.add_argument("--config", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_phantom)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _resolve(args)
        return args.func(args)
    except (CliError, ParameterError, phantom.PhantomError, grid.ImageFormatError,
            ValueError, OSError) as exc:
        print(f"trinarize: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
