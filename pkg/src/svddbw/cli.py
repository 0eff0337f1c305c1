"""Command-line interface.

Machine-readable results go to stdout (or --out files); human summaries and
diagnostics go to stderr. Exit codes: 0 ok, 2 input/config, 3 degenerate
bandwidth, 4 solver infeasible, 5 model file, 6 bandwidth search failed.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings

import numpy as np

from . import __version__
from .bandwidth import (
    mean_criterion,
    mean_sq_pairwise_closed_form,
    median2_criterion,
    median_criterion,
    median_pairwise_distance,
    weighted_mean_criterion,
)
from .core import DEFAULT_DELTA, BandwidthConfig, TrainConfig, validate_dataset
from .errors import ConfigError, DimensionMismatch, SvddError
from .evaluation import bandwidth_grid_search, default_bandwidth_grid
from .fileio import atomic_write_text, csv_text, fmt, load_model, read_csv, save_model
from .polygon import RNG_ALGORITHM, run_simulation
from .scoring import GridSpec, classify, score_grid
from .solver import train

log = logging.getLogger("svddbw")

DEFAULT_F = 0.001
THREADS_ENV = "SVDDBW_THREADS"


def _emit(**kv) -> None:
    print(" ".join(f"{k}={v}" for k, v in kv.items()))


def _diag(msg: str) -> None:
    print(msg, file=sys.stderr)


def _write_or_print(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        atomic_write_text(path, text)


def _col(ref):
    return ref if ref is None or not ref.lstrip("-").isdigit() else int(ref)


def _threads(arg) -> int:
    if arg is not None:
        return arg
    return int(os.environ.get(THREADS_ENV, "1"))


def cmd_bandwidth(args) -> int:
    data = read_csv(args.input, args.header, weights_col=_col(args.weights_col))
    n, p = data.n, data.p
    seed = 0 if args.seed is None else args.seed
    if args.criterion == "mean":
        if data.weights is not None:
            s = weighted_mean_criterion(data, args.delta)
        else:
            s = mean_criterion(data, args.delta)
        stat = ("mean_sq_dist", mean_sq_pairwise_closed_form(data))
    else:
        med = median_pairwise_distance(data, args.sample if args.sample and args.sample < n else None, seed)
        if args.criterion == "median":
            s = median_criterion(data, args.delta, args.sample, seed)
        else:
            s = median2_criterion(data, args.sample, seed)
        stat = ("median_dist", med)
    _emit(s=fmt(s), criterion=args.criterion, N=n, p=p, **{stat[0]: fmt(stat[1])})
    _diag(f"{args.criterion} criterion bandwidth s = {s:.6g} (N={n}, p={p}, {stat[0]}={stat[1]:.6g})")
    return 0


def _bandwidth_config(args) -> BandwidthConfig:
    if args.bandwidth is not None:
        return BandwidthConfig(criterion="fixed", fixed_value=args.bandwidth, delta=args.delta)
    return BandwidthConfig(
        criterion=args.criterion, delta=args.delta, median_sample_size=args.sample, seed=args.seed
    )


def cmd_train(args) -> int:
    data = read_csv(args.input, args.header)
    cfg = TrainConfig(
        outlier_fraction=args.f,
        kkt_tolerance=args.tol,
        max_iterations=args.max_iter,
        bandwidth=_bandwidth_config(args),
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = train(data, cfg)
    save_model(model, args.out)
    _emit(
        s=fmt(model.bandwidth),
        C=fmt(model.penalty),
        R2=fmt(model.threshold),
        n_sv=model.n_support,
        n_boundary=model.count("boundary"),
        n_outside=model.count("outside"),
        converged=int(model.converged),
    )
    if not model.converged:
        _diag(f"warning: solver did not converge (KKT gap {model.kkt_violation:.3g})")
    _diag(f"model written to {args.out}")
    return 0


def cmd_score(args) -> int:
    model = load_model(args.model)
    data = read_csv(args.input, args.header, validate=False)
    if data.n:
        validate_dataset(data)
        if data.p != model.p:
            raise DimensionMismatch(f"model expects {model.p} columns, input has {data.p}")
        rep = classify(model, data)
        rows = [(i, fmt(d), int(o)) for i, (d, o) in enumerate(zip(rep.dist2, rep.is_outlier))]
    else:
        rows = []
    _write_or_print(args.out, csv_text(["index", "dist2", "outlier"], rows))
    _diag(f"scored {len(rows)} rows; {sum(r[2] for r in rows)} outliers")
    return 0


def _parse_bounds(text: str, model, resolution: int) -> GridSpec:
    if text == "auto":
        return GridSpec.for_model(model, resolution)
    try:
        x0, x1, y0, y1 = (float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"bounds must be 'auto' or x0,x1,y0,y1; got {text!r}") from None
    return GridSpec(x0, x1, y0, y1, resolution)


def cmd_grid(args) -> int:
    model = load_model(args.model)
    if model.p != 2:
        score_grid(model)  # raises NotTwoDimensional
    spec = _parse_bounds(args.bounds, model, args.resolution)
    g = score_grid(model, spec)
    rows = ((fmt(x), fmt(y), fmt(d), int(i)) for x, y, d, i in zip(g.x, g.y, g.dist2, g.inlier))
    _write_or_print(args.out, csv_text(["x", "y", "dist2", "inlier"], rows))
    _diag(
        f"grid {spec.resolution}x{spec.resolution} over x[{spec.x_min:g},{spec.x_max:g}] "
        f"y[{spec.y_min:g},{spec.y_max:g}]; {int(g.inlier.sum())} inlier cells"
    )
    return 0


def cmd_crossval(args) -> int:
    train_data = read_csv(args.train, args.header)
    eval_data = read_csv(args.eval, args.header, label_col=_col(args.label_col))
    if args.grid == "auto":
        grid = default_bandwidth_grid(train_data, delta=args.delta)
    else:
        try:
            grid = [float(v) for v in args.grid.split(",")]
        except ValueError:
            raise ConfigError(f"grid must be 'auto' or a comma list; got {args.grid!r}") from None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = bandwidth_grid_search(train_data, eval_data, grid, args.f, args.positive, args.tol)
    text = csv_text(["s", "f1"], [(fmt(s), fmt(f)) for s, f in res.grid])
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stderr.write(text)
    _emit(best_s=fmt(res.best_s), best_f1=fmt(res.best_f1), grid_size=len(res.grid))
    return 0


def _parse_vertices(text: str) -> list:
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"vertices must look like 5..30 or 5,15,30; got {text!r}") from None


def _aggregate_path(out: str) -> str:
    root, ext = os.path.splitext(out)
    return f"{root}_aggregate{ext or '.csv'}"


def cmd_simulate(args) -> int:
    counts = _parse_vertices(args.vertices)

    def progress(i, n):
        if args.verbose:
            _diag(f"polygon {i}/{n}")

    rep = run_simulation(
        counts,
        polygons_per_count=args.per_count,
        n_sample=args.n_sample,
        f=args.f,
        s_grid_size=args.grid_size,
        seed=args.seed,
        resolution=args.resolution,
        delta=args.delta,
        n_jobs=_threads(args.jobs),
        progress=progress,
    )
    per = [
        (r.n_vertices, r.seed, fmt(r.s_mean), fmt(r.s_median), fmt(r.s_max), fmt(r.f_mean),
         fmt(r.f_median), fmt(r.f_max), fmt(r.ratio_mean), fmt(r.ratio_median))
        for r in rep.records
    ]
    header = ["n_vertices", "seed", "s_mean", "s_median", "s_max", "f_mean", "f_median",
              "f_max", "ratio_mean", "ratio_median"]
    atomic_write_text(args.out, csv_text(header, per))

    agg_rows = []
    for a in rep.aggregates:
        for name, summ in (("mean", a.ratio_mean), ("median", a.ratio_median)):
            agg_rows.append((a.n_vertices, name, a.n_used, a.n_excluded, fmt(summ.minimum), fmt(summ.q1),
                             fmt(summ.median), fmt(summ.q3), fmt(summ.maximum), fmt(summ.mean)))
    agg_path = args.aggregate_out or _aggregate_path(args.out)
    atomic_write_text(
        agg_path,
        csv_text(["n_vertices", "criterion", "n_used", "n_excluded", "min", "q1", "median", "q3",
                  "max", "mean"], agg_rows),
    )
    for a in rep.aggregates:
        _diag(
            f"vertices={a.n_vertices:3d}  mean: min {a.ratio_mean.minimum:.3f} q1 {a.ratio_mean.q1:.3f} "
            f"med {a.ratio_mean.median:.3f}  |  median: min {a.ratio_median.minimum:.3f} "
            f"q1 {a.ratio_median.q1:.3f} med {a.ratio_median.median:.3f}"
        )
    _emit(
        polygons=len(rep.records),
        excluded=len(rep.failures),
        median_ratio_mean=fmt(np.median(rep.ratios("mean"))) if rep.records else "nan",
        median_ratio_median=fmt(np.median(rep.ratios("median"))) if rep.records else "nan",
        rng=RNG_ALGORITHM,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="svddbw", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, header=True):
        if header:
            p.add_argument("--header", choices=["auto", "yes", "no"], default="auto")
        p.add_argument("--delta", type=float, default=DEFAULT_DELTA)

    p = sub.add_parser("bandwidth", help="compute an unsupervised bandwidth")
    p.add_argument("input")
    p.add_argument("--criterion", choices=["mean", "median", "median2"], default="mean")
    p.add_argument("--weights-col")
    p.add_argument("--sample", type=int)
    p.add_argument("--seed", type=int)
    common(p)
    p.set_defaults(func=cmd_bandwidth)

    p = sub.add_parser("train", help="train a model and write it to a file")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--f", type=float, default=DEFAULT_F, help="expected outlier fraction")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--criterion", choices=["mean", "median", "median2"], default="mean")
    g.add_argument("--bandwidth", type=float)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--sample", type=int)
    p.add_argument("--seed", type=int)
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", help="score rows against a saved model")
    p.add_argument("model")
    p.add_argument("input")
    p.add_argument("--out")
    p.add_argument("--header", choices=["auto", "yes", "no"], default="auto")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("grid", help="score a 2-D grid for region plots")
    p.add_argument("model")
    p.add_argument("--resolution", type=int, default=200)
    p.add_argument("--bounds", default="auto")
    p.add_argument("--out")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("crossval", help="supervised bandwidth grid search by F1")
    p.add_argument("train")
    p.add_argument("eval")
    p.add_argument("--label-col", default="-1")
    p.add_argument("--grid", default="auto")
    p.add_argument("--f", type=float, default=DEFAULT_F)
    p.add_argument("--positive", choices=["inlier", "outlier"], default="inlier")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out")
    common(p)
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("simulate", help="random polygon F1-ratio study")
    p.add_argument("--vertices", default="5..30")
    p.add_argument("--per-count", type=int, default=20)
    p.add_argument("--n-sample", type=int, default=600)
    p.add_argument("--f", type=float, default=DEFAULT_F)
    p.add_argument("--grid-size", type=int, default=30)
    p.add_argument("--resolution", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, help=f"worker processes (default ${THREADS_ENV} or 1)")
    p.add_argument("--out", required=True)
    p.add_argument("--aggregate-out")
    p.add_argument("-v", "--verbose", action="store_true")
    common(p, header=False)
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except SvddError as exc:
        _diag(f"error: {type(exc).__name__}: {exc}")
        return exc.exit_code
    except OSError as exc:
        _diag(f"error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
