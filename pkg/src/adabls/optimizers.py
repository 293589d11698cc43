"""Gradient descent, Nesterov AGD, Adagrad and FISTA with pluggable step sizes.

A step source is either :class:`FixedStep` or :class:`LineSearch`. Each
``*_step`` function takes an :class:`OptimizerState` and returns a new one;
evaluation counts go to an optional :class:`~adabls.trace.EvalCounters`.

Objective-evaluation bookkeeping with line search:

* GD and Adagrad reuse the accepted trial value as the next base value, so
  a run costs one evaluation at ``x0`` plus one per criterion probe.
* AGD runs the search from the extrapolated point, whose value is new at
  every iteration; FISTA likewise needs ``f(y_k)``. Both cost one
  evaluation per iteration plus one per probe.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .errors import CapExceeded, InvalidStrongConvexity
from .linesearch import (ArmijoContext, BacktrackConfig, Criterion, DescentLemmaContext,
                         Mode, Policy, armijo_search, descent_lemma_search, initial_step)
from .problems import ProblemDefinition, prox_point
from .trace import EvalCounters, RunTrace, TraceRow

__all__ = [
    "Method",
    "FixedStep",
    "LineSearch",
    "OptimizerState",
    "Stopping",
    "agd_momentum",
    "fista_momentum",
    "gd_step",
    "agd_step",
    "adagrad_step",
    "fista_step",
    "init_state",
    "run",
]


class Method(enum.Enum):
    GD = "gd"
    AGD = "agd"
    ADAGRAD = "adagrad"
    FISTA = "fista"


@dataclass(frozen=True)
class FixedStep:
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"fixed step must be positive, got {self.alpha}")


@dataclass(frozen=True)
class LineSearch:
    config: BacktrackConfig
    criterion: Criterion = Criterion.ARMIJO

    def __post_init__(self):
        object.__setattr__(self, "criterion", Criterion(self.criterion))


StepSource = Union[FixedStep, LineSearch]


@dataclass(frozen=True)
class OptimizerState:
    """Iterate plus method-specific auxiliaries.

    ``y`` is the AGD/FISTA auxiliary sequence, ``x_prev`` the previous
    FISTA iterate, ``t`` the FISTA momentum scalar and ``s`` the Adagrad
    accumulator. ``value`` caches ``F(x)`` when it is known for free;
    ``alpha`` is the last accepted step, ``lipschitz`` its reciprocal (for
    AGD, after clamping to ``m``). ``clamped`` records that AGD's estimate
    had to be raised to ``m`` on the last step.
    """

    x: np.ndarray
    y: Optional[np.ndarray] = None
    x_prev: Optional[np.ndarray] = None
    t: float = 1.0
    s: Optional[np.ndarray] = None
    value: Optional[float] = None
    alpha: Optional[float] = None
    lipschitz: Optional[float] = None
    search: Optional[object] = None
    clamped: bool = False


@dataclass(frozen=True)
class Stopping:
    """Stop on the first of: iteration budget, gap target, gradient norm."""

    max_iterations: int = 1000
    target_gap: Optional[float] = None
    grad_tol: Optional[float] = None


def init_state(method, x0):
    x0 = np.array(x0, dtype=float)
    method = Method(method)
    if method is Method.ADAGRAD:
        return OptimizerState(x0, s=np.zeros_like(x0))
    if method in (Method.AGD, Method.FISTA):
        return OptimizerState(x0, y=x0.copy(), x_prev=x0.copy())
    return OptimizerState(x0)


def agd_momentum(L, m):
    """``(sqrt(L) - sqrt(m)) / (sqrt(L) + sqrt(m))``."""
    if not (m > 0 and m <= L):
        raise InvalidStrongConvexity(f"need 0 < m <= L, got m={m}, L={L}")
    rl, rm = math.sqrt(L), math.sqrt(m)
    return (rl - rm) / (rl + rm)


def fista_momentum(t):
    """Next momentum scalar ``(1 + sqrt(1 + 4 t^2)) / 2``."""
    return 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))


def _bump(counters, name, k=1):
    if counters is not None:
        setattr(counters, name, getattr(counters, name) + k)


def _base_value(problem, state, counters):
    if state.value is not None:
        return state.value
    _bump(counters, "objective_evals")
    return float(problem.value(state.x))


def _armijo_step(problem, x, d, base, slope, config, start, counters):
    def trial(a):
        _bump(counters, "objective_evals")
        return problem.value(x + a * d)

    ctx = ArmijoContext(base, slope, trial)
    try:
        res = armijo_search(ctx, config, start)
    except CapExceeded as exc:
        _bump(counters, "criterion_evals", exc.result.criterion_evals)
        raise
    _bump(counters, "criterion_evals", res.criterion_evals)
    return res


def _require_armijo(step):
    if step.criterion is not Criterion.ARMIJO:
        raise ValueError("GD, AGD and Adagrad use the Armijo criterion")


def gd_step(problem: ProblemDefinition, state: OptimizerState, gradient, step: StepSource,
            counters: Optional[EvalCounters] = None) -> OptimizerState:
    """``x <- x - alpha g`` with ``alpha`` fixed or found along ``d = -g``."""
    g = np.asarray(gradient, dtype=float)
    if isinstance(step, FixedStep):
        return replace(state, x=state.x - step.alpha * g, value=None, alpha=step.alpha,
                       lipschitz=1.0 / step.alpha, search=None)
    _require_armijo(step)
    if not np.any(g):
        return replace(state, search=None)
    cfg = step.config
    base = _base_value(problem, state, counters)
    d = -g
    res = _armijo_step(problem, state.x, d, base, -float(g @ g), cfg,
                       initial_step(cfg.policy, cfg.alpha0, state.alpha), counters)
    a = res.accepted_alpha
    return replace(state, x=state.x + a * d, value=res.accepted_probe.trial_value, alpha=a,
                   lipschitz=1.0 / a, search=res)


def agd_step(problem: ProblemDefinition, state: OptimizerState, gradient, step: StepSource,
             m: float, counters: Optional[EvalCounters] = None) -> OptimizerState:
    """One step of Nesterov's constant-momentum scheme.

    ``y+ = x - alpha g``, ``beta = (sqrt(L) - sqrt(m)) / (sqrt(L) + sqrt(m))``,
    ``x+ = (1 + beta) y+ - beta y``, where ``L = 1 / alpha``. With line search
    ``alpha`` is the accepted Armijo step and an estimate below ``m`` is
    raised to ``m`` (``clamped=True`` in the returned state).
    """
    if not m > 0:
        raise InvalidStrongConvexity(f"m must be positive, got {m}")
    g = np.asarray(gradient, dtype=float)
    x = state.x
    y = x if state.y is None else state.y
    clamped = False
    search = None
    if isinstance(step, FixedStep):
        alpha = step.alpha
        L = 1.0 / alpha
        y_new = x - alpha * g
    else:
        _require_armijo(step)
        cfg = step.config
        if not np.any(g):
            alpha = state.alpha if state.alpha is not None else cfg.alpha0
            y_new = x.copy()
        else:
            base = _base_value(problem, state, counters)
            d = -g
            search = _armijo_step(problem, x, d, base, -float(g @ g), cfg,
                                  initial_step(cfg.policy, cfg.alpha0, state.alpha), counters)
            alpha = search.accepted_alpha
            y_new = x + alpha * d
        L = 1.0 / alpha
        if L < m:
            L, clamped = m, True
    beta = agd_momentum(L, m)
    x_new = (1.0 + beta) * y_new - beta * y
    return replace(state, x=x_new, y=y_new, value=None, alpha=alpha, lipschitz=L,
                   search=search, clamped=clamped)


def adagrad_step(problem: ProblemDefinition, state: OptimizerState, gradient, step: StepSource,
                 counters: Optional[EvalCounters] = None) -> OptimizerState:
    """Per-coordinate step ``alpha / sqrt(s_i)`` after ``s_i += g_i^2``.

    Line search probes along the preconditioned direction
    ``d_i = -g_i / sqrt(s_i)``. Coordinates whose accumulator is still zero
    have zero gradient and are left in place.
    """
    g = np.asarray(gradient, dtype=float)
    s = np.zeros_like(g) if state.s is None else state.s
    s_new = s + g * g
    root = np.sqrt(s_new)
    d = -np.divide(g, root, out=np.zeros_like(g), where=root > 0)
    if isinstance(step, FixedStep):
        return replace(state, x=state.x + step.alpha * d, s=s_new, value=None, alpha=step.alpha,
                       lipschitz=1.0 / step.alpha, search=None)
    _require_armijo(step)
    if not np.any(g):
        return replace(state, s=s_new, search=None)
    cfg = step.config
    base = _base_value(problem, state, counters)
    res = _armijo_step(problem, state.x, d, base, float(g @ d), cfg,
                       initial_step(cfg.policy, cfg.alpha0, state.alpha), counters)
    a = res.accepted_alpha
    return replace(state, x=state.x + a * d, s=s_new, value=res.accepted_probe.trial_value,
                   alpha=a, lipschitz=1.0 / a, search=res)


def fista_step(problem: ProblemDefinition, state: OptimizerState, step: StepSource,
               counters: Optional[EvalCounters] = None, momentum="classical") -> OptimizerState:
    """One FISTA iteration from the auxiliary point ``y``.

    Evaluates ``f(y)`` and ``grad f(y)`` once, then takes
    ``x+ = prox_alpha(y - alpha grad f(y))``. With line search the step is
    accepted by the descent-lemma criterion and must use the monotone
    policy, so the Lipschitz estimate ``1/alpha`` never decreases.

    ``momentum="classical"`` extrapolates from the new iterate,
    ``y+ = x+ + (t - 1)/t+ (x+ - x)``. ``momentum="lagged"`` extrapolates
    from the current and previous iterates instead,
    ``y+ = x + (t - 1)/t+ (x - x_prev)``.
    """
    if momentum not in ("classical", "lagged"):
        raise ValueError(f"unknown momentum indexing {momentum!r}")
    x = state.x
    y = x if state.y is None else state.y
    x_prev = x if state.x_prev is None else state.x_prev
    psi = problem.nonsmooth
    _bump(counters, "gradient_evals")
    g = np.asarray(problem.gradient(y), dtype=float)
    search = None
    value = None
    if isinstance(step, FixedStep):
        alpha = step.alpha
        _bump(counters, "prox_evals")
        p = prox_point(y, alpha, g, psi)
    else:
        cfg = step.config
        if step.criterion is not Criterion.DESCENT_LEMMA:
            raise ValueError("FISTA line search uses the descent-lemma criterion")
        if cfg.policy is not Policy.MONOTONE:
            raise ValueError("FISTA line search requires the monotone policy")
        _bump(counters, "objective_evals")
        fy = float(problem.smooth_value(y))

        def prox_eval(a):
            _bump(counters, "prox_evals")
            p = prox_point(y, a, g, psi)
            _bump(counters, "objective_evals")
            return p, problem.smooth_value(p)

        ctx = DescentLemmaContext(y, fy, g, prox_eval, psi)
        try:
            search = descent_lemma_search(ctx, cfg, initial_step(cfg.policy, cfg.alpha0, state.alpha))
        except CapExceeded as exc:
            _bump(counters, "criterion_evals", exc.result.criterion_evals)
            raise
        _bump(counters, "criterion_evals", search.criterion_evals)
        alpha = search.accepted_alpha
        p = search.accepted_probe.point
        value = search.accepted_probe.trial_value
    t_new = fista_momentum(state.t)
    coef = (state.t - 1.0) / t_new
    if momentum == "classical":
        y_new = p + coef * (p - x)
    else:
        y_new = x + coef * (x - x_prev)
    return replace(state, x=p, x_prev=x, y=y_new, t=t_new, value=value, alpha=alpha,
                   lipschitz=1.0 / alpha, search=search)


def _fingerprint(method, step, seed):
    fp = {"method": method.value, "seed": seed}
    if isinstance(step, FixedStep):
        fp.update(criterion=None, mode="fixed", rho=None, c=None, epsilon=None,
                  alpha0=step.alpha, policy=None)
    else:
        cfg = step.config
        fp.update(criterion=step.criterion.value, mode=cfg.mode.value, rho=cfg.rho,
                  c=cfg.c if step.criterion is Criterion.ARMIJO else None,
                  epsilon=cfg.epsilon if cfg.mode is Mode.ADAPTIVE else None,
                  alpha0=cfg.alpha0, policy=cfg.policy.value)
    return fp


def run(problem: ProblemDefinition, method, step: StepSource, stopping: Stopping = Stopping(),
        x0=None, m=None, f_star=None, seed=None, momentum="classical", meta=None) -> RunTrace:
    """Iterate ``method`` on ``problem`` and record one trace row per iteration.

    Row 0 describes the starting point. The objective column is evaluated
    outside the counters and outside the timed region. Every iteration costs
    exactly one gradient evaluation.

    Parameters
    ----------
    problem : ProblemDefinition
    method : Method or str
    step : FixedStep or LineSearch
    stopping : Stopping
    x0 : array, optional
        Defaults to ``problem.initial_point()``.
    m : float, optional
        AGD strong-convexity constant; defaults to the problem's hint.
    f_star : float, optional
        Reference optimum for the gap column; defaults to
        ``problem.optimum_value``. Without one the gap is NaN.
    seed : int, optional
        Recorded in the fingerprint only.
    momentum : str
        FISTA extrapolation indexing, see :func:`fista_step`.

    Raises
    ------
    CapExceeded
        With ``exc.trace`` set to the partial trace.
    """
    method = Method(method)
    if method is Method.AGD:
        m = problem.strong_convexity_hint if m is None else m
        if m is None:
            raise InvalidStrongConvexity("AGD needs a strong-convexity constant m")
    f_star = problem.optimum_value if f_star is None else f_star
    x0 = problem.initial_point() if x0 is None else x0
    counters = EvalCounters()
    state = init_state(method, x0)
    searching = isinstance(step, LineSearch)
    if searching and method is not Method.FISTA:
        _bump(counters, "objective_evals")
        state = replace(state, value=float(problem.value(state.x)))

    trace = RunTrace(_fingerprint(method, step, seed), meta=dict(meta or {}))
    if f_star is not None:
        trace.meta.setdefault("f_star", float(f_star))
    elapsed = 0.0

    def record(k, alpha):
        obj = float(problem.value(state.x))
        gap = obj - f_star if f_star is not None else math.nan
        c = counters
        trace.rows.append(TraceRow(k, obj, gap, math.nan if alpha is None else float(alpha),
                                   c.objective_evals, c.gradient_evals, c.criterion_evals,
                                   c.prox_evals, elapsed))
        return obj, gap

    obj, gap = record(0, None)
    reason = "max_iterations"
    if stopping.target_gap is not None and gap <= stopping.target_gap:
        reason = "target_gap"
        stopping = replace(stopping, max_iterations=0)
    for k in range(1, stopping.max_iterations + 1):
        tic = time.perf_counter()
        try:
            if method is Method.FISTA:
                state = fista_step(problem, state, step, counters, momentum)
            else:
                _bump(counters, "gradient_evals")
                g = np.asarray(problem.gradient(state.x), dtype=float)
                if stopping.grad_tol is not None and np.linalg.norm(g) <= stopping.grad_tol:
                    elapsed += time.perf_counter() - tic
                    reason = "grad_tol"
                    break
                if not np.any(g):
                    elapsed += time.perf_counter() - tic
                    reason = "stationary"
                    break
                if method is Method.GD:
                    state = gd_step(problem, state, g, step, counters)
                elif method is Method.AGD:
                    state = agd_step(problem, state, g, step, m, counters)
                else:
                    state = adagrad_step(problem, state, g, step, counters)
        except CapExceeded as exc:
            trace.termination = "cap_exceeded"
            exc.trace = trace
            raise
        elapsed += time.perf_counter() - tic
        obj, gap = record(k, state.alpha)
        if not math.isfinite(obj):
            reason = "diverged"
            break
        if stopping.target_gap is not None and gap <= stopping.target_gap:
            reason = "target_gap"
            break
    trace.termination = reason
    return trace
