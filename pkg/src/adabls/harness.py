"""Experiment grids over method x line-search variant x initial step size.

A configuration is a flat JSON object. Recognized keys (defaults in
brackets)::

    problem            logistic | lasso | rosenbrock | matrix_factorization
    dataset            "synthetic" or a file name under the data directory
    seed               [0]
    n, d               synthetic sizes (logistic [500, 20]; lasso [128, 256])
    sparsity, noise    lasso planted support size and noise level [10, 0.01]
    lam_ratio          lasso lambda as a fraction of |A^T y|_inf [0.1]
    rows, cols, rank, density   matrix factorization sizes [30, 20, 3, 0.3]
    methods            list of gd | agd | adagrad | fista
    regular_rhos       list of rho for regular backtracking
    adaptive_rho       number, or object keyed by method
    include_baseline   fixed-step run per method [false]
    alpha0_multipliers initial steps as multiples of 1/L (needs a Lipschitz hint)
    alpha0             absolute initial steps (overrides the multipliers)
    c                  Armijo constant, number or object keyed by method
                       [1e-4 for gd/adagrad, 0.5 for agd]
    epsilon            adaptive Armijo clamp [0.01]
    policy             restarting | monotone [restarting]; FISTA is always monotone
    precision          gap target, number or object keyed by method
    max_iterations     [10000]
    max_adjustments    [200]
    agd_m              AGD strong-convexity constant [problem hint]
    fista_momentum     classical | lagged [classical]
    workers            thread pool size [1]
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import datasets
from .errors import CapExceeded, ConfigError
from .linesearch import BacktrackConfig, Criterion, Mode, Policy
from .optimizers import FixedStep, LineSearch, Method, Stopping, fista_step, init_state, run
from .problems import (lasso_objective, lipschitz_bound, logistic_objective,
                       matrix_factorization_init, matrix_factorization_objective,
                       rosenbrock_objective, soft_threshold)
from .trace import EvalCounters, RunTrace, format_float, read_trace_csv, write_trace_csv

__all__ = [
    "EvalCounters",
    "RunTrace",
    "Cell",
    "Experiment",
    "VariantSummary",
    "ComparisonSummary",
    "DEFAULT_PRECISION",
    "TABLE_PRECISIONS",
    "SUMMARY_COLUMNS",
    "load_config",
    "build_experiment",
    "reference_optimum",
    "run_grid",
    "summarize",
    "summarize_by_method",
    "emit_csv",
    "write_grid",
    "read_traces",
]

DEFAULT_PRECISION = 1e-9

# per-dataset precision targets for logistic regression
TABLE_PRECISIONS = {
    "a9a": {"agd": 1e-9, "gd": 1e-6, "gd_monotone": 1e-5, "adagrad": 1e-6},
    "gisette_scale": {"agd": 1e-9, "gd": 1e-9, "gd_monotone": 1e-5, "adagrad": 1e-9},
    "mnist": {"agd": 1e-9, "gd": 1e-6, "gd_monotone": 1e-3, "adagrad": 1e-9},
    "mushrooms": {"agd": 1e-9, "gd": 1e-9, "gd_monotone": 1e-5, "adagrad": 1e-9},
    "phishing": {"agd": 1e-9, "gd": 1e-9, "gd_monotone": 1e-6, "adagrad": 1e-6},
    "protein": {"agd": 1e-9, "gd": 1e-9, "gd_monotone": 1e-5, "adagrad": 1e-9},
    "web-1": {"agd": 1e-9, "gd": 1e-9, "gd_monotone": 1e-8, "adagrad": 1e-9},
}

DEFAULT_C = {"gd": 1e-4, "adagrad": 1e-4, "agd": 0.5}

SUMMARY_COLUMNS = ("variant", "rho", "mode", "f_evals_avg", "grad_evals_avg", "elapsed_avg",
                   "reached_precision", "gain", "diverged")

_KNOWN_KEYS = {
    "problem", "dataset", "seed", "n", "d", "sparsity", "noise", "lam_ratio", "rows", "cols",
    "rank", "density", "methods", "regular_rhos", "adaptive_rho", "include_baseline",
    "alpha0_multipliers", "alpha0", "c", "epsilon", "policy", "precision", "max_iterations",
    "max_adjustments", "agd_m", "fista_momentum", "workers",
}


@dataclass(frozen=True)
class Cell:
    method: Method
    variant: str
    step: object
    alpha0_multiplier: Optional[float]
    precision: float


@dataclass
class Experiment:
    config: dict
    problem: object
    x0: np.ndarray
    f_star: float
    cells: list
    m: Optional[float] = None


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _per_method(value, method, default=None):
    if isinstance(value, dict):
        return value.get(method, default)
    return default if value is None else value


def _build_problem(cfg, data_dir):
    kind = cfg.get("problem")
    dataset = cfg.get("dataset", "synthetic")
    seed = int(cfg.get("seed", 0))
    root = datasets.resolve_data_dir(data_dir)
    if kind == "logistic":
        if dataset == "synthetic":
            ds, _ = datasets.synth_logistic(int(cfg.get("n", 500)), int(cfg.get("d", 20)), seed)
        else:
            path = root / dataset
            if not path.exists():
                raise ConfigError(f"dataset file {path} not found")
            ds = datasets.load_libsvm(path)
        lbar = lipschitz_bound(ds.X, ds.n)
        gamma = lbar / (10.0 * ds.n)
        problem = logistic_objective(ds.X, ds.labels, gamma, name=f"logistic:{dataset}")
        return problem, problem.initial_point()
    if kind == "lasso":
        if dataset == "synthetic":
            A, y, _ = datasets.synth_linear_inverse(
                int(cfg.get("n", 128)), int(cfg.get("d", 256)), int(cfg.get("sparsity", 10)),
                float(cfg.get("noise", 0.01)), seed)
        else:
            pa, py = root / f"{dataset}.A.csv", root / f"{dataset}.y.csv"
            if not (pa.exists() and py.exists()):
                raise ConfigError(f"expected {pa} and {py}")
            A, y = datasets.load_dense(pa), datasets.load_dense(py).ravel()
        lam = float(cfg.get("lam_ratio", 0.1)) * float(np.max(np.abs(A.T @ y)))
        problem = lasso_objective(A, y, lam, name=f"lasso:{dataset}")
        return problem, problem.initial_point()
    if kind == "rosenbrock":
        return rosenbrock_objective(), np.zeros(2)
    if kind == "matrix_factorization":
        r = int(cfg.get("rank", 3))
        if dataset == "synthetic":
            M = datasets.synth_ratings(int(cfg.get("rows", 30)), int(cfg.get("cols", 20)),
                                       float(cfg.get("density", 0.3)), seed)
        else:
            path = root / dataset
            if not path.exists():
                raise ConfigError(f"dataset file {path} not found")
            M = datasets.load_dense(path)
        problem = matrix_factorization_objective(M, r, name=f"matrix_factorization:{dataset}")
        return problem, matrix_factorization_init(M.shape[0], M.shape[1], r, seed)
    raise ConfigError(f"unknown problem {kind!r}")


def _precision(cfg, method, policy):
    given = _per_method(cfg.get("precision"), method)
    if given is not None:
        return float(given)
    table = TABLE_PRECISIONS.get(str(cfg.get("dataset", "")).lower())
    if table:
        key = f"{method}_monotone" if policy is Policy.MONOTONE and method == "gd" else method
        if key in table:
            return table[key]
    return DEFAULT_PRECISION


def _fmt(x):
    return format(x, "g")


def build_experiment(cfg, data_dir=None, seed=None) -> Experiment:
    """Validate ``cfg`` and expand it into grid cells.

    Raises ``ConfigError`` before any optimization runs.
    """
    cfg = dict(cfg)
    if seed is not None:
        cfg["seed"] = seed
    unknown = set(cfg) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    methods = cfg.get("methods") or ["gd"]
    try:
        methods = [Method(m) for m in methods]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    problem, x0 = _build_problem(cfg, data_dir)
    lhint = problem.lipschitz_hint
    if "alpha0" in cfg:
        starts = [(None, float(a)) for a in cfg["alpha0"]]
    else:
        mults = cfg.get("alpha0_multipliers", [1e1, 1e2, 1e3, 1e4])
        if not lhint:
            raise ConfigError("alpha0_multipliers need a Lipschitz hint; give alpha0 instead")
        starts = [(float(k), float(k) / lhint) for k in mults]
    rhos = [float(r) for r in cfg.get("regular_rhos", [])]
    eps = float(cfg.get("epsilon", 0.01))
    max_adj = int(cfg.get("max_adjustments", 200))
    try:
        base_policy = Policy(cfg.get("policy", "restarting"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    cells = []
    try:
        for method in methods:
            name = method.value
            if method is Method.FISTA:
                if not problem.is_composite:
                    raise ConfigError("FISTA needs a composite problem")
                criterion, policy = Criterion.DESCENT_LEMMA, Policy.MONOTONE
            else:
                criterion, policy = Criterion.ARMIJO, base_policy
            c = float(_per_method(cfg.get("c"), name, DEFAULT_C.get(name, 1e-4)))
            prec = _precision(cfg, name, policy)
            if cfg.get("include_baseline"):
                if not lhint:
                    raise ConfigError("baseline needs a Lipschitz hint")
                gamma = problem.strong_convexity_hint or 0.0
                cells.append(Cell(method, "baseline", FixedStep(1.0 / (lhint + gamma)), None, prec))
            variants = [(Mode.REGULAR, r) for r in rhos]
            arho = _per_method(cfg.get("adaptive_rho"), name)
            if arho is not None:
                variants.append((Mode.ADAPTIVE, float(arho)))
            for mode, rho in variants:
                for mult, a0 in starts:
                    bc = BacktrackConfig(rho=rho, c=c, epsilon=eps, alpha0=a0, policy=policy,
                                         max_adjustments=max_adj, mode=mode)
                    if criterion is Criterion.ARMIJO:
                        bc.check_armijo()
                    cells.append(Cell(method, f"{mode.value}_rho{_fmt(rho)}",
                                      LineSearch(bc, criterion), mult, prec))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    if not cells:
        raise ConfigError("the grid is empty")
    m = cfg.get("agd_m", problem.strong_convexity_hint)
    if Method.AGD in methods and m is None:
        raise ConfigError("AGD needs agd_m for this problem")
    if cfg.get("fista_momentum", "classical") not in ("classical", "lagged"):
        raise ConfigError("fista_momentum must be classical or lagged")
    budget = int(cfg.get("max_iterations", 10000))
    f_star = reference_optimum(problem, x0, budget)
    return Experiment(cfg, problem, x0, f_star, cells, m)


def reference_optimum(problem, x0, budget=10000):
    """Reference optimal value used for suboptimality gaps.

    Uses the problem's known optimum when it has one. Otherwise: damped
    Newton iterations for problems with a Hessian; for L1-composite problems
    a fixed-step FISTA run of up to ``10 * budget`` iterations whose support
    is periodically polished by solving the reduced optimality system; and a
    long adaptive-backtracking gradient descent run as a last resort.
    """
    if problem.optimum_value is not None:
        return float(problem.optimum_value)
    if problem.hessian is not None and problem.nonsmooth is None:
        x = np.array(x0, dtype=float)
        fx = problem.value(x)
        for _ in range(100):
            g = problem.gradient(x)
            if np.linalg.norm(g) <= 1e-14 * max(1.0, abs(fx)):
                break
            step = np.linalg.solve(problem.hessian(x), g)
            t = 1.0
            while problem.value(x - t * step) > fx and t > 1e-12:
                t *= 0.5
            x_new = x - t * step
            f_new = problem.value(x_new)
            if f_new >= fx and t < 1.0:
                break
            x, fx = x_new, f_new
        return float(fx)
    psi = problem.nonsmooth
    if psi is not None and hasattr(psi, "lam") and problem.lipschitz_hint:
        return _lasso_reference(problem, x0, 10 * budget)
    cfg = BacktrackConfig(rho=0.5, c=1e-4, alpha0=1.0, mode=Mode.ADAPTIVE)
    tr = run(problem, Method.GD, LineSearch(cfg), Stopping(10 * budget), x0=x0)
    return min(r.objective for r in tr.rows)


def _lasso_reference(problem, x0, max_iter, chunk=500):
    L = problem.lipschitz_hint
    lam = problem.nonsmooth.lam
    step = FixedStep(1.0 / L)
    state = init_state(Method.FISTA, x0)
    best = problem.value(state.x)
    # recover A^T A and A^T y through the gradient, which is affine
    d = problem.dimension
    grad0 = problem.gradient(np.zeros(d))
    for done in range(0, max_iter, chunk):
        for _ in range(chunk):
            state = fista_step(problem, state, step)
        x = state.x
        best = min(best, problem.value(x))
        support = np.flatnonzero(x)
        if support.size == 0:
            continue
        # gradient at unit vectors gives the needed columns of A^T A
        cols = np.stack([problem.gradient(np.eye(d)[j]) - grad0 for j in support], axis=1)
        G = cols[support]
        rhs = -grad0[support] - lam * np.sign(x[support])
        try:
            xs = np.linalg.solve(G, rhs)
        except np.linalg.LinAlgError:
            continue
        if np.any(np.sign(xs) != np.sign(x[support])):
            continue
        xp = np.zeros(d)
        xp[support] = xs
        fp = problem.value(xp)
        g = problem.gradient(xp)
        fixed = soft_threshold(xp - g / L, lam / L)
        best = min(best, fp)
        if np.linalg.norm(fixed - xp) <= 1e-13 * max(1.0, np.linalg.norm(xp)):
            return float(best)
    return float(best)


def _run_cell(exp: Experiment, index: int, cell: Cell) -> RunTrace:
    meta = {
        "problem": exp.problem.name,
        "variant": cell.variant,
        "alpha0_multiplier": cell.alpha0_multiplier,
        "precision": cell.precision,
        "cell": index,
    }
    seed = int(exp.config.get("seed", 0))
    stopping = Stopping(int(exp.config.get("max_iterations", 10000)), target_gap=cell.precision)
    try:
        return run(exp.problem, cell.method, cell.step, stopping, x0=exp.x0,
                   m=exp.m if cell.method is Method.AGD else None, f_star=exp.f_star,
                   seed=seed, momentum=exp.config.get("fista_momentum", "classical"), meta=meta)
    except CapExceeded as exc:
        return exc.trace


def run_grid(exp: Experiment, workers: Optional[int] = None) -> list:
    """Run every cell of ``exp``; results keep the cell order."""
    workers = int(workers or exp.config.get("workers", 1))
    if workers <= 1:
        return [_run_cell(exp, i, c) for i, c in enumerate(exp.cells)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_cell, exp, i, c) for i, c in enumerate(exp.cells)]
        return [f.result() for f in futures]


@dataclass(frozen=True)
class VariantSummary:
    variant: str
    method: str
    rho: Optional[float]
    mode: str
    f_evals_avg: float
    grad_evals_avg: float
    elapsed_avg: float
    reached_precision: bool
    diverged: int
    runs: int


@dataclass
class ComparisonSummary:
    """Per-variant averages over the initial-step grid of one method.

    ``gain`` is ``1 - adaptive / best regular`` on ``metric``; None when
    either side is missing.
    """

    method: str
    metric: str
    precision: float
    variants: list = field(default_factory=list)
    gain: Optional[float] = None
    best_regular: Optional[str] = None

    def variant(self, label):
        for v in self.variants:
            if v.variant == label:
                return v
        raise KeyError(label)


_METRIC_FIELD = {"fevals": "f_evals_avg", "gevals": "grad_evals_avg", "elapsed": "elapsed_avg"}


def _avg(xs):
    return float(np.mean(xs)) if xs else math.nan


def _diverged(trace):
    if trace.termination in ("diverged", "cap_exceeded"):
        return True
    return not trace.rows or not math.isfinite(trace.rows[-1].objective)


def summarize(traces, precision=None, metric="fevals") -> ComparisonSummary:
    """Aggregate traces of one method that share a problem and precision.

    Counters are read at the first row whose gap reaches ``precision``; runs
    that never reach it contribute their final row and mark the variant as
    not having reached the precision. Diverged runs are excluded from the
    averages and counted.
    """
    if metric not in _METRIC_FIELD:
        raise ValueError(f"metric must be one of {sorted(_METRIC_FIELD)}")
    traces = list(traces)
    if not traces:
        raise ValueError("no traces to summarize")
    methods = {t.fingerprint.get("method") for t in traces}
    if len(methods) != 1:
        raise ValueError(f"traces mix methods {sorted(map(str, methods))}")
    method = next(iter(methods))
    if precision is None:
        precision = float(traces[0].meta.get("precision", DEFAULT_PRECISION))
    groups = {}
    for t in traces:
        fp = t.fingerprint
        key = (fp.get("mode"), fp.get("rho"))
        groups.setdefault(key, []).append(t)
    out = []
    for (mode, rho), group in groups.items():
        label = "baseline" if mode == "fixed" else f"{mode}_rho{_fmt(rho)}"
        f, g, e = [], [], []
        reached, diverged = True, 0
        for t in group:
            if _diverged(t):
                diverged += 1
                reached = False
                continue
            row = t.first_reaching(precision)
            if row is None:
                reached = False
                row = t.rows[-1]
            f.append(row.f_evals)
            g.append(row.grad_evals)
            e.append(row.elapsed_s)
        out.append(VariantSummary(label, method, rho, mode, _avg(f), _avg(g), _avg(e), reached,
                                  diverged, len(group)))
    summary = ComparisonSummary(method, metric, precision, out)
    fld = _METRIC_FIELD[metric]
    regular = [v for v in out if v.mode == Mode.REGULAR.value and math.isfinite(getattr(v, fld))]
    adaptive = [v for v in out if v.mode == Mode.ADAPTIVE.value]
    if regular and adaptive:
        best = min(regular, key=lambda v: getattr(v, fld))
        summary.best_regular = best.variant
        ref = getattr(best, fld)
        val = getattr(adaptive[0], fld)
        if ref > 0 and math.isfinite(val):
            summary.gain = 1.0 - val / ref
    return summary


def summarize_by_method(traces, metric="fevals"):
    by = {}
    for t in traces:
        by.setdefault(t.fingerprint.get("method"), []).append(t)
    return [summarize(ts, metric=metric) for _, ts in sorted(by.items())]


def emit_csv(obj, sink):
    """Write a trace, a summary or a list of summaries as CSV to ``sink``."""
    if isinstance(obj, RunTrace):
        write_trace_csv(obj, sink)
        return
    summaries = [obj] if isinstance(obj, ComparisonSummary) else list(obj)
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for s in summaries:
        for v in s.variants:
            gain = ""
            if v.mode == Mode.ADAPTIVE.value and s.gain is not None and v is _first_adaptive(s):
                gain = format_float(s.gain)
            writer.writerow([f"{s.method}/{v.variant}",
                             "" if v.rho is None else format_float(v.rho), v.mode,
                             format_float(v.f_evals_avg), format_float(v.grad_evals_avg),
                             format_float(v.elapsed_avg), str(v.reached_precision).lower(),
                             gain, v.diverged])


def _first_adaptive(summary):
    for v in summary.variants:
        if v.mode == Mode.ADAPTIVE.value:
            return v
    return None


def _trace_filename(index, trace):
    fp, meta = trace.fingerprint, trace.meta
    mult = meta.get("alpha0_multiplier")
    tag = f"_a{_fmt(mult)}" if mult is not None else f"_alpha{_fmt(fp.get('alpha0'))}"
    return f"{index:03d}_{fp['method']}_{meta.get('variant', fp['mode'])}{tag}.csv"


def write_grid(traces, out_dir, metric="fevals"):
    """Write one CSV per trace plus ``summary.csv``; returns the summaries."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i, t in enumerate(traces):
        with open(out / _trace_filename(i, t), "w", newline="") as fh:
            write_trace_csv(t, fh)
    summaries = summarize_by_method(traces, metric)
    with open(out / "summary.csv", "w", newline="") as fh:
        emit_csv(summaries, fh)
    return summaries


def read_traces(directory):
    paths = sorted(p for p in Path(directory).glob("*.csv") if p.name != "summary.csv")
    traces = []
    for p in paths:
        with open(p) as fh:
            traces.append(read_trace_csv(fh))
    return traces


def summary_to_csv(summaries) -> str:
    buf = io.StringIO()
    emit_csv(summaries, buf)
    return buf.getvalue()
