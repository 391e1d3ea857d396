"""Command-line entry point: ``sparsedist <subcommand> ...``.

Exit status is 0 on success, 2 on a usage error and 1 on a runtime error.
"""

import argparse
import sys

import numpy as np

from . import fileio
from .experiments import (
    CompressionSpec,
    PrototypeSpec,
    SimulationSpec,
    gaussian_blobs,
    ingest_histogram,
    run_compression,
    run_prototypes,
    run_simulation,
    synthetic_histogram,
)
from .hardness import subset_sum_decide
from .measures import Distribution
from .objectives import kl_objective, l2_objective
from .projection import TieBreakRule, exact_sparse_project, greedy_sparse_project
from .solvers import SolverConfig, dist_iht, format_support, trace_to_csv

# options whose value may legitimately start with "-"
_SIGNED_VALUE_OPTS = ("--set",)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sparsedist",
        description="Sparse discrete distributions: IHT, sparse projections and experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("project", help="project a function file onto k-sparse distributions")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--method", choices=("greedy", "exact"), default="greedy")
    p.add_argument("--tie", choices=("lowest", "random"), default="lowest")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the projection as a function file")

    p = sub.add_parser("solve", help="run distribution IHT on an l2 or KL objective")
    p.add_argument("--objective", choices=("l2", "kl"), default="l2")
    p.add_argument("--target", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--mu", type=float, default=0.008)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--init", choices=("greedy", "uniform", "given"), default="uniform")
    p.add_argument("--init-file", help="starting distribution for --init given")
    p.add_argument("--projection", choices=("greedy", "exact"), default="greedy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", help="write the iteration trace as CSV")
    p.add_argument("--out", help="write the best distribution as a function file")

    p = sub.add_parser("simulate", help="IHT vs greedy on random targets")
    p.add_argument("--n", type=int, default=15)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--k", type=int, default=7)
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--objective", choices=("l2", "kl"), default="l2")
    p.add_argument("--mu", type=float, default=0.008)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--positions", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timing", action="store_true", help="add a wall_time column")
    p.add_argument("--out", required=True)

    p = sub.add_parser("compress", help="distribution compression by compressed sensing")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="CSV whose first column holds raw values")
    src.add_argument("--synthetic", action="store_true", help="use a log-normal histogram")
    p.add_argument("--bins", type=int, default=1000)
    p.add_argument("--bin-width", type=float, default=1.0)
    p.add_argument("--rows", type=int, default=100)
    p.add_argument("--k", type=int, default=50)
    p.add_argument("--gamma-lasso", type=float)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--tests", type=int, default=20)
    p.add_argument("--iters", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timing", action="store_true", help="add a wall_time column")
    p.add_argument("--out", required=True)

    p = sub.add_parser("prototypes", help="prototype selection by IHT on MMD")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="CSV of feature rows")
    src.add_argument("--synthetic", action="store_true", help="use two Gaussian blobs")
    p.add_argument("--labels", help="CSV with one label per data row")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--gamma", type=float)
    p.add_argument("--iters", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sspcheck", help="decide subset sum through exact sparse projection")
    p.add_argument("--set", required=True, dest="ground_set",
                   help='comma-separated integers, e.g. "-3,1,2"')
    return parser


def _glue_signed_values(argv):
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _SIGNED_VALUE_OPTS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def _write(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _read_lines(path):
    with open(path) as fh:
        return fh.read().splitlines()


def cmd_project(args):
    q = fileio.read_function(args.input)
    if args.method == "exact":
        res = exact_sparse_project(q, args.k)
    else:
        res = greedy_sparse_project(q, args.k, TieBreakRule(args.tie, args.seed))
    print(f"support: {format_support(res.result.support)}")
    print(f"distance_sq: {res.distance_sq!r}")
    if args.out:
        fileio.write_function(args.out, res.result.dist)


def cmd_solve(args):
    target = fileio.read_function(args.target)
    if not isinstance(target, Distribution):
        raise ValueError("target must be a distribution")
    obj = l2_objective(target) if args.objective == "l2" else kl_objective(target)
    init = args.init
    if init == "given":
        if not args.init_file:
            raise ValueError("--init given needs --init-file")
        init = fileio.read_function(args.init_file)
        if not isinstance(init, Distribution):
            raise ValueError("init file must hold a distribution")
    cfg = SolverConfig(mu0=args.mu, max_iters=args.iters, projection=args.projection,
                       init=init, seed=args.seed)
    res = dist_iht(obj, args.k, cfg)
    print(f"best_objective: {res.best_objective!r}")
    print(f"best_iteration: {res.best_iteration}")
    print(f"support: {format_support(res.best.support)}")
    if args.trace:
        _write(args.trace, trace_to_csv(res.trace))
    if args.out:
        fileio.write_function(args.out, res.best.dist)


def cmd_simulate(args):
    spec = SimulationSpec(n=args.n, m=args.m, k=args.k, runs=args.runs,
                          objective=args.objective, mu0=args.mu, iters=args.iters,
                          positions=args.positions, seed=args.seed, timing=args.timing)
    table = run_simulation(spec)
    _write(args.out, table.to_csv())
    for row in table.rows:
        if row["run"] == "mean":
            print(f"{row['algorithm']}: mean normalized objective {row['normalized']:.6g}")


def cmd_compress(args):
    if args.synthetic:
        p0 = synthetic_histogram(args.bins, args.bin_width, seed=args.seed)
    else:
        p0 = ingest_histogram(_read_lines(args.data), args.bins, args.bin_width)
    spec = CompressionSpec(bins=args.bins, bin_width=args.bin_width, rows=args.rows, k=args.k,
                           gamma_lasso=args.gamma_lasso, trials=args.trials, tests=args.tests,
                           iters=args.iters, seed=args.seed, timing=args.timing)
    table = run_compression(spec, p0)
    _write(args.out, table.to_csv())
    for name in ("iht", "lasso", "random"):
        errs = [r["test_error"] for r in table.select(algorithm=name)]
        print(f"{name}: mean test error {np.mean(errs):.6g}")


def _read_matrix(path):
    return np.loadtxt(path, delimiter=",", ndmin=2)


def cmd_prototypes(args):
    if args.synthetic:
        X, y = gaussian_blobs(seed=args.seed)
    else:
        if not args.labels:
            raise ValueError("--data needs --labels")
        X = _read_matrix(args.data)
        y = np.loadtxt(args.labels, delimiter=",", dtype=str, ndmin=1)
    spec = PrototypeSpec(k=args.k, gamma=args.gamma, iters=args.iters, seed=args.seed)
    table = run_prototypes(spec, X, y)
    _write(args.out, table.to_csv())
    for row in table.rows:
        print(f"{row['algorithm']}: test error {row['test_error']:.4f}")


def cmd_sspcheck(args):
    try:
        ground = [int(s) for s in args.ground_set.split(",") if s.strip()]
    except ValueError:
        raise ValueError(f"--set must be comma-separated integers, got {args.ground_set!r}")
    subset = subset_sum_decide(ground)
    if subset is None:
        print("no zero-sum subset")
    else:
        print("subset: " + ",".join(str(e) for e in subset))


COMMANDS = {
    "project": cmd_project,
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "compress": cmd_compress,
    "prototypes": cmd_prototypes,
    "sspcheck": cmd_sspcheck,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_glue_signed_values(argv))
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        COMMANDS[args.command](args)
    except (ValueError, OSError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
