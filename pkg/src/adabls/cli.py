"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 runtime failure,
3 precision not reached (only with ``--strict``).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import datasets, harness, worked_examples
from .errors import ConfigError
from .problems import (gradient_relative_error, lasso_objective, logistic_objective,
                       lipschitz_bound, matrix_factorization_objective, rosenbrock_objective)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_PRECISION = 0, 1, 2, 3

GRADCHECK_PROBLEMS = ("logistic", "lasso", "rosenbrock", "matrix_factorization")


def _print_summaries(summaries, stream):
    harness.emit_csv(summaries, stream)
    for s in summaries:
        if s.gain is not None:
            stream.write(f"# {s.method}: gain={s.gain:.4f} vs {s.best_regular} ({s.metric})\n")


def _any_unreached(summaries):
    return any(not v.reached_precision for s in summaries for v in s.variants)


def cmd_run(args):
    if not args.config:
        raise ConfigError("run needs --config")
    cfg = harness.load_config(args.config)
    exp = harness.build_experiment(cfg, data_dir=args.data_dir, seed=args.seed)
    traces = harness.run_grid(exp, workers=args.workers)
    out = args.out or "runs"
    summaries = harness.write_grid(traces, out, metric=args.metric)
    _print_summaries(summaries, sys.stdout)
    if args.strict and _any_unreached(summaries):
        return EXIT_PRECISION
    return EXIT_OK


def cmd_compare(args):
    directory = args.traces or args.out
    if not directory:
        raise ConfigError("compare needs a trace directory")
    traces = harness.read_traces(directory)
    if not traces:
        raise ConfigError(f"no trace CSVs in {directory}")
    summaries = harness.summarize_by_method(traces, metric=args.metric)
    _print_summaries(summaries, sys.stdout)
    if args.strict and _any_unreached(summaries):
        return EXIT_PRECISION
    return EXIT_OK


def _gradcheck_problem(name, rng):
    if name == "logistic":
        ds, _ = datasets.synth_logistic(60, 8, seed=int(rng.integers(1 << 31)))
        A = ds.X.toarray()
        return logistic_objective(A, ds.labels, lipschitz_bound(A) / (10 * ds.n)), 1.0
    if name == "lasso":
        A, y, _ = datasets.synth_linear_inverse(30, 40, 5, 0.1, seed=int(rng.integers(1 << 31)))
        return lasso_objective(A, y, 0.1), 1.0
    if name == "rosenbrock":
        return rosenbrock_objective(), 2.0
    if name == "matrix_factorization":
        M = datasets.synth_ratings(8, 6, 0.5, seed=int(rng.integers(1 << 31)))
        return matrix_factorization_objective(M, 2), 1.0
    raise ConfigError(f"unknown problem {name!r}; choose from {GRADCHECK_PROBLEMS}")


def cmd_gradcheck(args):
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    names = GRADCHECK_PROBLEMS if args.problem == "all" else (args.problem,)
    ok = True
    for name in names:
        problem, scale = _gradcheck_problem(name, rng)
        worst = max(gradient_relative_error(problem, scale * rng.standard_normal(problem.dimension))
                    for _ in range(args.points))
        passed = worst <= args.tol
        ok &= passed
        print(f"{name:22s} max_rel_err={worst:.3e} {'PASS' if passed else 'FAIL'}")
    return EXIT_OK if ok else EXIT_RUNTIME


def cmd_replicate(args):
    ok = True
    for name, passed, detail in worked_examples.replicate_all():
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
    return EXIT_OK if ok else EXIT_RUNTIME


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--seed", type=int)
    common.add_argument("--metric", choices=("fevals", "gevals", "elapsed"), default="fevals")
    common.add_argument("--data-dir", metavar="PATH",
                        help=f"dataset directory (default: ${datasets.DATA_DIR_ENV} or ./data)")
    common.add_argument("--strict", action="store_true",
                        help="exit with status 3 when a variant misses the precision target")
    common.add_argument("--workers", type=int)

    parser = argparse.ArgumentParser(prog="adabls", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="execute a grid from a config file")
    p = sub.add_parser("compare", parents=[common], help="summarize existing trace CSVs")
    p.add_argument("traces", nargs="?", metavar="DIR")
    p = sub.add_parser("gradcheck", parents=[common], help="finite-difference gradient audit")
    p.add_argument("--problem", default="all", choices=("all",) + GRADCHECK_PROBLEMS)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-6)
    sub.add_parser("replicate-examples", parents=[common],
                   help="check the two scalar backtracking examples")
    return parser


_COMMANDS = {"run": cmd_run, "compare": cmd_compare, "gradcheck": cmd_gradcheck,
             "replicate-examples": cmd_replicate}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - every other failure maps to one exit code
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
