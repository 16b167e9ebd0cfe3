"""Command line interface: ``rfm <subcommand> [options]``.

Estimation subcommands read headerless CSV and print the fused estimate
with depth diagnostics; ``simulate-*``, ``breakdown`` and ``efficiency``
run the Monte Carlo designs; ``plan-split`` evaluates the split-size rule.

Exit status is 0 on success, 2 on invalid options and 1 on runtime errors.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import covop, io, simulate
from .fusion import (FUSE_RULES, SplitPlan, plan_split, rfm_cluster, rfm_covariance,
                     rfm_location, rfm_scatter)
from .robust import MEstimatorConfig
from .tkmeans import ITkMConfig


class ConfigError(Exception):
    def __init__(self, flag, message):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


def _check(cond, flag, message):
    if not cond:
        raise ConfigError(flag, message)


def _check_prob(value, flag, lo_open=False, hi_open=True):
    ok_lo = value > 0 if lo_open else value >= 0
    ok_hi = value < 1 if hi_open else value <= 1
    _check(ok_lo and ok_hi, flag, f"must lie in {'(' if lo_open else '['}0, 1{')' if hi_open else ']'}")


# ---------------------------------------------------------------------------
# parser

def _common_out(p):
    p.add_argument("--output", "-o", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=("csv", "json"), default="json", help="output format")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    p.add_argument("--seed", type=int, default=0, help="master seed")


def _split_opts(p):
    p.add_argument("--input", "-i", required=True, help="input CSV")
    p.add_argument("--m", type=int, required=True, help="number of subsamples")
    p.add_argument("--shuffle", action="store_true",
                   help="permute observations (by --seed) before splitting")
    p.add_argument("--timings", action="store_true",
                   help="include wall-clock timings (makes output non-reproducible)")


def _mest_opts(p):
    p.add_argument("--tuning-c", type=float, default=4.685, help="biweight cutoff")
    p.add_argument("--max-iter", type=int, default=200, help="reweighting iteration limit")
    p.add_argument("--tol", type=float, default=1e-7, help="convergence tolerance")


def _itkm_opts(p):
    p.add_argument("--n-starts", type=int, default=20, help="random starts per k-means fit")
    p.add_argument("--max-iter", type=int, default=100, help="concentration step limit")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="rfm", description=__doc__.splitlines()[0],
                                     formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_ in (("estimate-location", "fused robust location of a CSV dataset"),
                        ("estimate-scatter", "fused robust scatter matrix of a CSV dataset")):
        p = sub.add_parser(name, help=help_, formatter_class=fmt)
        _split_opts(p)
        p.add_argument("--fuse", choices=FUSE_RULES, default="deepest",
                       help="fusion rule")
        _mest_opts(p)
        _common_out(p)

    p = sub.add_parser("estimate-covop", formatter_class=fmt,
                       help="fused trimmed covariance kernel of functional CSV data "
                            "(first row = grid)")
    _split_opts(p)
    p.add_argument("--alpha", type=float, default=0.25, help="trimming level")
    p.add_argument("--fuse", choices=FUSE_RULES, default="deepest",
                   help="fusion rule")
    p.add_argument("--no-center", action="store_true",
                   help="do not subtract the pointwise median of each subsample")
    _common_out(p)

    p = sub.add_parser("cluster", formatter_class=fmt,
                       help="two-stage trimmed k-means fusion; emits one label per row "
                            "(0 = outlier)")
    _split_opts(p)
    p.add_argument("--k", type=int, required=True, help="number of clusters")
    p.add_argument("--alpha1", type=float, default=0.2, help="subsample trimming level")
    p.add_argument("--alpha2", type=float, default=0.1, help="pooled-centers trimming level")
    _itkm_opts(p)
    _common_out(p)
    p.set_defaults(format="csv")

    for name, help_ in (("simulate-location", "location error table (contaminated Gaussian)"),
                        ("simulate-scatter", "scatter error table (contaminated Gaussian)")):
        p = sub.add_parser(name, help=help_, formatter_class=fmt)
        p.add_argument("--n", type=int, nargs="+", default=[100_000], help="sample sizes")
        p.add_argument("--m", type=int, nargs="+", default=[100], help="subsample counts")
        p.add_argument("--d", type=int, default=5, help="dimension")
        p.add_argument("--p", type=float, default=0.2, help="contamination probability")
        p.add_argument("--off-diag", type=float, default=0.2, help="common correlation of clean rows")
        p.add_argument("--outlier-center", type=float, default=50.0, help="location of the outliers")
        p.add_argument("--reps", type=int, default=5, help="replicates")
        p.add_argument("--timings", action="store_true", help="add T0/T1 timing columns")
        _mest_opts(p)
        _common_out(p)
        p.set_defaults(format="csv")

    p = sub.add_parser("simulate-covop", formatter_class=fmt,
                       help="covariance operator error table (functional model)")
    p.add_argument("--n", type=int, nargs="+", default=[50_000], help="sample sizes")
    p.add_argument("--m", type=int, nargs="+", default=[20], help="subsample counts")
    p.add_argument("--p", type=float, default=0.2, help="contamination probability")
    p.add_argument("--alpha", type=float, default=0.25, help="trimming level")
    p.add_argument("--T", type=int, default=20, help="grid size")
    p.add_argument("--reps", type=int, default=1, help="replicates")
    p.add_argument("--no-center", action="store_true",
                   help="do not subtract the pointwise median of each subsample")
    p.add_argument("--global", dest="global_robust", action="store_true",
                   help="also fit the trimmed estimator on the whole sample (ROB)")
    p.add_argument("--error-norm", choices=("frobenius", "hilbert_schmidt"),
                   default="frobenius", help="norm of the kernel error")
    p.add_argument("--timings", action="store_true", help="add T0/T1 timing columns")
    _common_out(p)
    p.set_defaults(format="csv")

    p = sub.add_parser("simulate-cluster", formatter_class=fmt,
                       help="clustering matching-error table (three-cluster model)")
    p.add_argument("--fac", type=int, nargs="+", default=[10], help="sample size factors")
    p.add_argument("--m", type=int, nargs="+", default=[10], help="subsample counts")
    p.add_argument("--alpha1", type=float, default=0.35, help="subsample trimming level")
    p.add_argument("--alpha2", type=float, default=0.1, help="pooled-centers trimming level")
    p.add_argument("--reps", type=int, default=5, help="replicates")
    p.add_argument("--timings", action="store_true", help="add T0/T1 timing columns")
    _itkm_opts(p)
    _common_out(p)
    p.set_defaults(format="csv")

    p = sub.add_parser("breakdown", formatter_class=fmt,
                       help="breakdown frequencies of the median of subsample medians")
    p.add_argument("--n", type=int, default=30_000, help="sample size")
    p.add_argument("--m", type=int, nargs="+", default=[5, 10, 30, 50, 100, 150],
                   help="subsample counts")
    p.add_argument("--p", type=float, nargs="+", default=[0.45, 0.49, 0.495, 0.499],
                   help="outlier probabilities")
    p.add_argument("--reps", type=int, default=5000, help="replicates")
    _common_out(p)
    p.set_defaults(format="csv")

    p = sub.add_parser("efficiency", formatter_class=fmt,
                       help="variance ratio of full-sample median to median of medians")
    p.add_argument("--k", type=int, default=20, help="subsample size is 2k+1")
    p.add_argument("--m", type=int, default=200, help="number of subsamples")
    p.add_argument("--reps", type=int, default=2000, help="replicates")
    _common_out(p)
    p.set_defaults(format="csv")

    p = sub.add_parser("plan-split", formatter_class=fmt,
                       help="subsample size for O(l^a) estimation and O(m^b) fusion costs")
    p.add_argument("--n", type=int, required=True, help="sample size")
    p.add_argument("--a", type=float, default=1.0, help="subsample cost exponent")
    p.add_argument("--b", type=float, default=2.0, help="fusion cost exponent")
    _common_out(p)
    p.set_defaults(format="csv")
    return parser


# ---------------------------------------------------------------------------
# validation

def validate(args):
    _check(args.threads >= 1, "--threads", "must be at least 1")
    cmd = args.command
    if cmd.startswith("estimate-") or cmd == "cluster":
        _check(args.m >= 1, "--m", "must be at least 1")
    if hasattr(args, "tuning_c"):
        _check(args.tuning_c > 0, "--tuning-c", "must be positive")
        _check(args.tol > 0, "--tol", "must be positive")
    if hasattr(args, "max_iter"):
        _check(args.max_iter >= 1, "--max-iter", "must be at least 1")
    if hasattr(args, "n_starts"):
        _check(args.n_starts >= 1, "--n-starts", "must be at least 1")
    if hasattr(args, "alpha"):
        _check_prob(args.alpha, "--alpha", lo_open=True)
    if hasattr(args, "alpha1"):
        _check_prob(args.alpha1, "--alpha1")
        _check_prob(args.alpha2, "--alpha2")
    if cmd == "cluster":
        _check(args.k >= 1, "--k", "must be at least 1")
    if cmd in ("simulate-location", "simulate-scatter"):
        _check(args.d >= 1, "--d", "must be at least 1")
        _check_prob(args.p, "--p", hi_open=False)
        _check(abs(args.off_diag) < 1, "--off-diag", "must satisfy |off_diag| < 1")
    if cmd == "simulate-covop":
        _check_prob(args.p, "--p")
        _check(args.T >= 2, "--T", "must be at least 2")
    if cmd.startswith("simulate-"):
        _check(args.reps >= 1, "--reps", "must be at least 1")
        for m in args.m:
            _check(m >= 1, "--m", "must be at least 1")
    if cmd in ("simulate-location", "simulate-scatter", "simulate-covop"):
        for n, m in ((n, m) for n in args.n for m in args.m):
            _check(m <= n, "--m", f"{m} subsamples do not fit n={n}")
    if cmd == "simulate-cluster":
        for f in args.fac:
            _check(f >= 1, "--fac", "must be at least 1")
    if cmd == "breakdown":
        _check(args.n >= 1, "--n", "must be positive")
        _check(args.reps >= 1, "--reps", "must be at least 1")
        for m in args.m:
            _check(1 <= m <= args.n, "--m", f"{m} must lie in [1, n]")
        for p in args.p:
            _check_prob(p, "--p", hi_open=False)
    if cmd == "efficiency":
        _check(args.k >= 0, "--k", "must be non-negative")
        _check(args.m >= 1, "--m", "must be at least 1")
        _check(args.reps >= 100, "--reps", "must be at least 100")
    if cmd == "plan-split":
        _check(args.n >= 1, "--n", "must be positive")
        _check(args.a > 0, "--a", "must be positive")
        _check(args.b > 1, "--b", "must exceed 1 for the split-size rule")


def _meta(args) -> dict:
    skip = {"output", "format", "threads", "func"}
    return {k: v for k, v in vars(args).items() if k not in skip}


# ---------------------------------------------------------------------------
# commands

def _plan(args, n):
    _check(args.m <= n, "--m", f"{args.m} subsamples do not fit {n} observations")
    return SplitPlan.for_size(n, args.m, assignment="shuffled" if args.shuffle else "contiguous",
                              seed=args.seed)


def _emit_fusion(args, res):
    meta = _meta(args)
    chosen = res.chosen.tolist() if isinstance(res.chosen, np.ndarray) else res.chosen
    if args.format == "json":
        out = {"config": meta, "estimate": res.estimate, "depths": res.depths,
               "chosen": chosen, "discarded": res.discarded}
        if args.timings:
            out["timing"] = res.timing
        io.emit(io.dumps_json(out), args.output)
        return
    meta = dict(meta, chosen=chosen, discarded=res.discarded, depths=list(res.depths))
    if args.timings:
        meta["fuse_seconds"] = res.timing["fuse"]
    io.emit(io.matrix_csv(res.estimate, meta), args.output)


def cmd_estimate(args):
    if args.command == "estimate-covop":
        fd = covop.read_functional_csv(args.input)
        res = rfm_covariance(fd, _plan(args, len(fd)), args.alpha, args.fuse,
                             center=not args.no_center, n_jobs=args.threads)
    else:
        X = io.read_dataset_csv(args.input)
        cfg = MEstimatorConfig(args.tuning_c, args.max_iter, args.tol)
        fn = rfm_location if args.command == "estimate-location" else rfm_scatter
        res = fn(X, _plan(args, len(X)), args.fuse, cfg, n_jobs=args.threads)
    _emit_fusion(args, res)


def cmd_cluster(args):
    X = io.read_dataset_csv(args.input)
    cfg = ITkMConfig(args.n_starts, args.max_iter, args.seed)
    res = rfm_cluster(X, _plan(args, len(X)), args.k, args.alpha1, args.alpha2, cfg,
                      n_jobs=args.threads)
    meta = _meta(args)
    if args.format == "json":
        out = {"config": meta, "centers": res.centers, "radius": res.radius,
               "objective": res.objective, "labels": res.labels,
               "discarded": res.discarded}
        if args.timings:
            out["timing"] = res.timing
        io.emit(io.dumps_json(out), args.output)
    else:
        io.emit(io.matrix_csv(res.labels[:, None], meta), args.output)


def _emit_table(args, rows):
    meta = _meta(args)
    if args.format == "json":
        io.emit(io.dumps_json({"config": meta, "rows": rows}), args.output)
    else:
        io.emit(io.table_csv(rows, meta), args.output)


def cmd_simulate(args):
    rows = []
    if args.command in ("simulate-location", "simulate-scatter"):
        fn = (simulate.simulate_location if args.command == "simulate-location"
              else simulate.simulate_scatter)
        cfg = MEstimatorConfig(args.tuning_c, args.max_iter, args.tol)
        for n in args.n:
            for m in args.m:
                rows.append(fn(n, m, args.d, args.p, args.reps, args.seed, args.off_diag,
                               args.outlier_center, cfg, args.threads, args.timings))
    elif args.command == "simulate-covop":
        for n in args.n:
            for m in args.m:
                rows.append(simulate.simulate_covop(
                    n, m, args.p, args.alpha, args.T, args.reps, args.seed,
                    not args.no_center, args.global_robust, args.error_norm,
                    args.threads, args.timings))
    else:
        cfg = ITkMConfig(args.n_starts, args.max_iter, args.seed)
        for fac in args.fac:
            for m in args.m:
                rows.append(simulate.simulate_cluster(
                    fac, m, args.alpha1, args.alpha2, args.reps, args.seed, cfg,
                    args.threads, args.timings))
    _emit_table(args, rows)


def cmd_breakdown(args):
    _emit_table(args, simulate.breakdown_mc(args.n, args.m, args.p, args.reps, args.seed))


def cmd_efficiency(args):
    ratio, v_full, v_fused = simulate.efficiency_study(args.k, args.m, args.reps, args.seed,
                                                       return_variances=True)
    _emit_table(args, [{"k": args.k, "l": 2 * args.k + 1, "m": args.m, "reps": args.reps,
                        "var_median": v_full, "var_median_of_medians": v_fused,
                        "ratio": ratio, "limit": 2 / np.pi}])


def cmd_plan_split(args):
    plan = plan_split(args.n, args.a, args.b)
    _emit_table(args, [{"n": args.n, "a": args.a, "b": args.b, "l": plan.l, "m": plan.m,
                        "discarded": args.n - plan.m * plan.l}])


COMMANDS = {
    "estimate-location": cmd_estimate,
    "estimate-scatter": cmd_estimate,
    "estimate-covop": cmd_estimate,
    "cluster": cmd_cluster,
    "simulate-location": cmd_simulate,
    "simulate-scatter": cmd_simulate,
    "simulate-covop": cmd_simulate,
    "simulate-cluster": cmd_simulate,
    "breakdown": cmd_breakdown,
    "efficiency": cmd_efficiency,
    "plan-split": cmd_plan_split,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        validate(args)
        COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"rfm {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"rfm {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
