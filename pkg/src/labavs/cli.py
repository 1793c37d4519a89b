"""Command line interface.

Subcommands
-----------
simulate
    Draw a benchmark dataset (quadrant response plus optional pure-noise
    predictors) and write it as CSV.
fit
    Fit a model to a CSV file or a fresh simulation, optionally choosing
    the selection threshold by cross-validation, write a model file, and
    print a relevance summary.
predict
    Evaluate a saved model at query points from a CSV file.
map
    Export the per-grid-point relevant sets and adjusted window widths as
    a CSV suitable for plotting.
eval
    Run a seeded train/test benchmark comparing fit variants and emit a
    JSON report.

Exit status is 0 on success, 1 for numerical failures arising from the
data (degenerate windows, non-convergence), and 2 for configuration or
I/O problems.  With ``--error-json`` the failure is also printed to
stdout as a one-line JSON object.
"""

import argparse
import csv
import json
import sys

import numpy as np
from joblib import Parallel, delayed

from .data import SimSpec, load_csv, save_csv, simulate, scale_unit_variance
from .errors import (
    ConfigurationError,
    DimensionMismatchError,
    NumericalError,
    ParseError,
)
from .pipeline import (
    FULL,
    REDUCED,
    LOCAL,
    GLOBAL,
    BandwidthSpec,
    fit,
    load_model,
    relevant_set_label,
    save_model,
)
from .selection import HARD_THRESHOLD, LOCAL_LASSO, STEPWISE, SelectionConfig
from .tuning import CvProtocol, select_lambda, test_error

_METHOD_FLAGS = {"hard": HARD_THRESHOLD, "stepwise": STEPWISE, "lasso": LOCAL_LASSO}
_EVAL_METHODS = ("labavs-a", "labavs-b", "loc1")


def _fmt(v: float) -> str:
    return f"{v:.17g}"


# ---------------------------------------------------------------------------
# shared option groups
# ---------------------------------------------------------------------------

def _add_fit_options(p):
    p.add_argument("--method", choices=sorted(_METHOD_FLAGS), default="hard",
                   help="variable selection rule (default hard)")
    p.add_argument("--lambda", dest="lam", type=float, default=0.55,
                   help="selection threshold (default 0.55)")
    p.add_argument("--nn-frac", type=float, default=None,
                   help="nearest-neighbour bandwidth fraction (default 0.2)")
    p.add_argument("--fixed-h", type=float, default=None,
                   help="fixed symmetric half-width instead of --nn-frac")
    p.add_argument("--grid-spacing", type=float, default=None,
                   help="grid spacing (default: derived from the bandwidth)")
    p.add_argument("--final-fit", choices=(REDUCED, FULL), default=REDUCED)
    p.add_argument("--shrink-mode", choices=(LOCAL, GLOBAL), default=LOCAL)


def _bw_spec(args) -> BandwidthSpec:
    if args.nn_frac is not None and args.fixed_h is not None:
        raise ConfigurationError("--nn-frac and --fixed-h are mutually exclusive")
    if args.fixed_h is not None:
        return BandwidthSpec.fixed(args.fixed_h)
    return BandwidthSpec.nearest_neighbor(
        0.2 if args.nn_frac is None else args.nn_frac)


def _sim_spec(args) -> SimSpec:
    return SimSpec(n=args.n, d_extra=args.d_extra,
                   noise_sd=args.noise_sd, seed=args.seed)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    data = simulate(_sim_spec(args))
    save_csv(data, args.out)
    print(f"wrote {data.n} rows ({data.d} predictors) to {args.out}")
    return 0


def cmd_fit(args) -> int:
    if (args.input is None) == (not args.simulate):
        raise ConfigurationError("need exactly one of --input or --simulate")
    if args.input is not None and args.out is not None and \
            str(args.input) == str(args.out):
        raise ConfigurationError("--input and --out name the same file")

    if args.simulate:
        data = simulate(_sim_spec(args))
    else:
        data = load_csv(args.input, response_column=args.response)
    if args.scale_unit_variance:
        data, scales = scale_unit_variance(data)
    else:
        scales = None

    method = _METHOD_FLAGS[args.method]
    bw_spec = _bw_spec(args)

    chosen = args.lam
    report = None
    if args.lambda_grid is not None:
        candidates = _parse_lambda_grid(args.lambda_grid)
        protocol = CvProtocol(bw_spec=bw_spec, method=method,
                              spacing=args.grid_spacing,
                              final_fit_mode=args.final_fit,
                              shrink_mode=args.shrink_mode,
                              folds=args.cv_folds, seed=args.seed,
                              n_jobs=args.jobs)
        report = select_lambda(data, candidates, protocol)
        chosen = report.chosen_lambda

    model = fit(data, SelectionConfig(method, chosen), bw_spec,
                spacing=args.grid_spacing, final_fit_mode=args.final_fit,
                shrink_mode=args.shrink_mode)
    if args.out is not None:
        save_model(model, args.out)

    _print_fit_summary(model, report, scales)
    if args.out is not None:
        print(f"model written to {args.out}")
    return 0


def _parse_lambda_grid(text):
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ConfigurationError(f"bad --lambda-grid {text!r}: {exc}") from None
    if len(values) < 2:
        raise ConfigurationError("--lambda-grid needs at least two values")
    return values


def _print_fit_summary(model, report, scales):
    data = model.data
    sig = model.sig
    print(f"n = {data.n} observations, d = {data.d} predictors")
    print(f"selection: {model.config.method}, lambda = {model.config.lam:g}")
    print(f"bandwidth: {model.bw_spec.kind} = {model.bw_spec.value:g}, "
          f"final fit {model.final_fit_mode}, shrink {model.shrink_mode}")
    shape = "x".join(str(s) for s in sig.grid.shape)
    print(f"grid: {shape} points, spacing {sig.grid.spacing:g}")
    if scales is not None:
        print("predictors scaled to unit variance; factors "
              + ", ".join(f"{s:g}" for s in scales))
    if report is not None:
        print("cross-validation:")
        for (lam, _), err in zip(report.candidates, report.cv_errors):
            mark = " *" if lam == report.chosen_lambda else ""
            print(f"  lambda {lam:g}: cv error {err:.6g}{mark}")
    frac = model.relevance_fractions()
    print("relevance by variable:")
    for j in range(data.d):
        print(f"  x{j + 1}: relevant at {100.0 * frac[j]:.1f}% of grid points")
    print("relevant-set patterns:")
    for label, count in model.pattern_counts():
        print(f"  {label}: {count} grid points")
    removed = sorted(model.globally_removed_dimensions())
    if removed:
        names = ", ".join(f"x{j + 1}" for j in removed)
        print(f"completely removed: {names}")
    if sig.degenerate_fallbacks:
        print(f"note: {sig.degenerate_fallbacks} grid points used a "
              "neighbouring classification (degenerate window)")


def cmd_predict(args) -> int:
    model = load_model(args.model)
    queries = _load_queries(args.input, model.d)
    preds = model.predict_many(queries)

    if args.format == "json":
        doc = {"schema": "labavs-predictions", "schema_version": 1,
               "predictions": [float(p) for p in preds]}
        text = json.dumps(doc, sort_keys=True) + "\n"
    else:
        lines = [",".join(f"x{j + 1}" for j in range(model.d)) + ",prediction"]
        for row, p in zip(queries, preds):
            lines.append(",".join(_fmt(v) for v in row) + "," + _fmt(p))
        text = "\n".join(lines) + "\n"
    _write_text(args.out, text)
    return 0


def _load_queries(path, d: int) -> np.ndarray:
    """Read a headed CSV of query points with exactly ``d`` numeric columns."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: empty file")
        if len(header) != d:
            raise ConfigurationError(
                f"{path}: {len(header)} columns, model expects {d}")
        rows = []
        for i, row in enumerate(reader, start=2):
            if len(row) != d:
                raise ParseError(f"{path}: row {i} has {len(row)} cells")
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                bad = next(c for c in row if not _is_float(c))
                raise ParseError(
                    f"{path}: row {i}: non-numeric cell {bad!r}") from None
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def cmd_map(args) -> int:
    model = load_model(args.model)
    sig = model.sig
    d = model.d
    if d == 2:
        dims = (0, 1)
        keep = np.arange(sig.grid.n_points)
    else:
        if args.slice is None:
            raise ConfigurationError(
                f"model has {d} dimensions; pick two with --slice a,b")
        dims = _parse_slice(args.slice, d)
        keep = _slice_rows(sig.grid, dims, args.at)

    a, b = dims
    header = (f"x{a + 1},x{b + 1},relevant_set,"
              f"lower{a + 1},upper{a + 1},lower{b + 1},upper{b + 1}")
    lines = [header]
    for i in keep:
        point = sig.grid.points[i]
        label = relevant_set_label(sig.relevant_set(int(i)))
        cells = [_fmt(point[a]), _fmt(point[b]), f'"{label}"',
                 _fmt(sig.adjusted_lower[i, a]), _fmt(sig.adjusted_upper[i, a]),
                 _fmt(sig.adjusted_lower[i, b]), _fmt(sig.adjusted_upper[i, b])]
        lines.append(",".join(cells))
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _parse_slice(text, d: int):
    try:
        parts = [int(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise ConfigurationError(f"bad --slice {text!r}: {exc}") from None
    if len(parts) != 2 or len(set(parts)) != 2:
        raise ConfigurationError("--slice needs two distinct 1-based dimensions")
    for p in parts:
        if not 1 <= p <= d:
            raise ConfigurationError(f"--slice dimension {p} outside 1..{d}")
    return parts[0] - 1, parts[1] - 1


def _slice_rows(grid, dims, at):
    """Flat indices of the grid plane through the anchor point."""
    d = len(grid.axes)
    if at is None:
        anchor = [len(ax) // 2 for ax in grid.axes]
    else:
        try:
            values = [float(tok) for tok in at.split(",")]
        except ValueError as exc:
            raise ConfigurationError(f"bad --at {at!r}: {exc}") from None
        if len(values) != d:
            raise ConfigurationError(f"--at needs {d} comma-separated values")
        anchor = [int(np.argmin(np.abs(grid.axes[j] - values[j])))
                  for j in range(d)]
    shape = grid.shape
    index = np.reshape(np.arange(grid.n_points), shape)
    slicer = [anchor[j] for j in range(d)]
    slicer[dims[0]] = slice(None)
    slicer[dims[1]] = slice(None)
    return index[tuple(slicer)].ravel()


def cmd_eval(args) -> int:
    methods = [tok.strip() for tok in args.methods.split(",") if tok.strip()]
    for name in methods:
        if name not in _EVAL_METHODS:
            raise ConfigurationError(
                f"unknown method {name!r}; choose from {', '.join(_EVAL_METHODS)}")
    if not methods:
        raise ConfigurationError("--methods selected nothing")

    method = _METHOD_FLAGS[args.method]
    bw_spec = _bw_spec(args)
    train_seeds = [args.seed + 2 * r for r in range(args.replicates)]
    test_seeds = [args.seed + 2 * r + 1 for r in range(args.replicates)]

    runner = Parallel(n_jobs=args.jobs)
    rows = runner(
        delayed(_eval_replicate)(
            methods, method, args.lam, bw_spec, args.grid_spacing,
            args.shrink_mode, args.n, args.test_n, args.noise_sd, ts, vs)
        for ts, vs in zip(train_seeds, test_seeds))

    method_rows = []
    for name in methods:
        errors = [row[name] for row in rows]
        mean = float(np.mean(errors))
        sd = float(np.std(errors, ddof=1)) if len(errors) > 1 else None
        method_rows.append({"name": name, "mean_error": mean,
                            "sd_error": sd, "errors": errors})
    doc = {
        "schema": "labavs-eval",
        "schema_version": 1,
        "protocol": args.protocol,
        "replicates": args.replicates,
        "train_n": args.n,
        "test_n": args.test_n,
        "noise_sd": args.noise_sd,
        "seeds": {"train": train_seeds, "test": test_seeds},
        "selection": {"method": method, "lambda": args.lam},
        "bandwidth": {"kind": bw_spec.kind, "value": bw_spec.value},
        "shrink_mode": args.shrink_mode,
        "methods": method_rows,
    }
    _write_text(args.out, json.dumps(doc, sort_keys=True) + "\n")
    return 0


def _eval_replicate(methods, sel_method, lam, bw_spec, spacing, shrink_mode,
                    n, test_n, noise_sd, train_seed, test_seed):
    """Summed squared test error per fit variant for one replicate.

    The test response is noiseless, so the error measures distance to the
    underlying surface rather than to one noisy draw of it.
    """
    train = simulate(SimSpec(n=n, noise_sd=noise_sd, seed=train_seed))
    test = simulate(SimSpec(n=test_n, noise_sd=0.0, seed=test_seed))
    out = {}
    for name in methods:
        if name == "loc1":
            cfg = SelectionConfig(HARD_THRESHOLD, 0.0)
            mode = REDUCED
        else:
            cfg = SelectionConfig(sel_method, lam)
            mode = FULL if name == "labavs-a" else REDUCED
        model = fit(train, cfg, bw_spec, spacing=spacing,
                    final_fit_mode=mode, shrink_mode=shrink_mode)
        out[name] = test_error(model, test) * test.n
    return out


def _write_text(out, text: str):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="labavs",
        description="Local regression with per-region variable selection "
                    "and adaptive asymmetric bandwidths.")
    parser.add_argument("--error-json", action="store_true",
                        help="on failure, print a JSON error object to stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a benchmark dataset as CSV")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--d-extra", type=int, default=0,
                   help="pure-noise predictors beyond the two genuine ones")
    p.add_argument("--noise-sd", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a model and write a model file")
    p.add_argument("--input", default=None, help="training data CSV")
    p.add_argument("--response", default="y",
                   help="response column name or 0-based index (default y)")
    p.add_argument("--simulate", action="store_true",
                   help="train on a fresh simulation instead of a file")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--d-extra", type=int, default=0)
    p.add_argument("--noise-sd", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale-unit-variance", action="store_true",
                   help="rescale predictors to unit sample variance first")
    _add_fit_options(p)
    p.add_argument("--lambda-grid", default=None,
                   help="comma-separated thresholds to choose by cross-validation")
    p.add_argument("--cv-folds", default=5, type=_folds_arg,
                   help="fold count or 'loocv' (default 5)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None, help="model file path")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="evaluate a saved model at query points")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, help="query points CSV")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="default stdout")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("map", help="export relevant sets and window widths")
    p.add_argument("--model", required=True)
    p.add_argument("--slice", default=None,
                   help="two 1-based dimensions a,b for models with d > 2")
    p.add_argument("--at", default=None,
                   help="comma-separated anchor point for the sliced plane")
    p.add_argument("--out", default=None, help="default stdout")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("eval", help="seeded train/test benchmark, JSON report")
    p.add_argument("--protocol", choices=("example1",), default="example1")
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--test-n", type=int, default=500)
    p.add_argument("--noise-sd", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--methods", default=",".join(_EVAL_METHODS),
                   help="comma-separated subset of labavs-a, labavs-b, loc1")
    _add_fit_options(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None, help="default stdout")
    p.set_defaults(func=cmd_eval)
    return parser


def _folds_arg(text):
    if text == "loocv":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"{text!r} is not an integer or 'loocv'") from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, DimensionMismatchError, OSError) as exc:
        return _fail(args, exc, 2)
    except NumericalError as exc:
        return _fail(args, exc, 1)


def _fail(args, exc, status: int) -> int:
    if getattr(args, "error_json", False):
        doc = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(doc, sort_keys=True))
    print(f"labavs: error: {exc}", file=sys.stderr)
    return status


def console():
    """Entry point for the installed ``labavs`` script."""
    raise SystemExit(main())


if __name__ == "__main__":
    console()
