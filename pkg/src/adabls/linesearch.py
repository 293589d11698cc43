"""Regular and adaptive backtracking line search.

A line-search criterion is expressed through its *violation* ``v(alpha)``,
a ratio that is at least one exactly when the criterion holds at ``alpha``.
Regular backtracking shrinks the tentative step by a constant ``rho`` until
``v >= 1``; adaptive backtracking shrinks it by a factor computed from the
latest violation instead.

Two criteria are provided:

* the Armijo sufficient-decrease condition
  ``F(x + a d) - F(x) <= c a <grad F(x), d>``;
* the descent-lemma (quadratic upper bound) check used by proximal gradient
  methods, ``f(p) <= f(y) + <grad f(y), p - y> + |p - y|^2 / (2 a)`` with
  ``p = prox_a(y - a grad f(y))``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import CapExceeded, InvalidViolation, NonDescentDirection

__all__ = [
    "Mode",
    "Policy",
    "Criterion",
    "BacktrackConfig",
    "CriterionProbe",
    "LineSearchResult",
    "ArmijoContext",
    "DescentLemmaContext",
    "armijo_violation",
    "armijo_adaptive_factor",
    "descent_lemma_violation",
    "descent_lemma_adaptive_factor",
    "backtrack",
    "armijo_search",
    "descent_lemma_search",
    "initial_step",
]


class Mode(enum.Enum):
    REGULAR = "regular"
    ADAPTIVE = "adaptive"


class Policy(enum.Enum):
    """How the first tentative step of each call is chosen."""

    RESTARTING = "restarting"
    MONOTONE = "monotone"


class Criterion(enum.Enum):
    ARMIJO = "armijo"
    DESCENT_LEMMA = "descent_lemma"


@dataclass(frozen=True)
class BacktrackConfig:
    """Parameters of one backtracking subroutine.

    Parameters
    ----------
    rho : float
        Regular shrink factor in (0, 1). Adaptive factors are built from it.
    c : float
        Armijo constant in (0, 1). Ignored by the descent-lemma criterion.
    epsilon : float
        Lower clamp of the adaptive Armijo factor. Must stay below ``rho``
        for adaptive Armijo searches.
    alpha0 : float
        Initial tentative step size.
    policy : Policy
        ``RESTARTING`` starts every call from ``alpha0``; ``MONOTONE`` starts
        from the step accepted by the previous call.
    max_adjustments : int
        Safety cap on the number of shrinks per call.
    mode : Mode
        ``REGULAR`` or ``ADAPTIVE``.
    """

    rho: float = 0.5
    c: float = 1e-4
    epsilon: float = 0.01
    alpha0: float = 1.0
    policy: Policy = Policy.RESTARTING
    max_adjustments: int = 200
    mode: Mode = Mode.REGULAR

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        if not 0.0 < self.c < 1.0:
            raise ValueError(f"c must lie in (0, 1), got {self.c}")
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not (self.alpha0 > 0.0 and math.isfinite(self.alpha0)):
            raise ValueError(f"alpha0 must be positive, got {self.alpha0}")
        if int(self.max_adjustments) != self.max_adjustments or self.max_adjustments < 1:
            raise ValueError("max_adjustments must be a positive integer")
        # coerce strings coming from config files
        object.__setattr__(self, "policy", Policy(self.policy))
        object.__setattr__(self, "mode", Mode(self.mode))

    def check_armijo(self):
        """Raise if the adaptive Armijo factor cannot stay below ``rho``."""
        if self.mode is Mode.ADAPTIVE and not self.epsilon < self.rho:
            raise ValueError(
                f"adaptive Armijo search needs epsilon < rho "
                f"(epsilon={self.epsilon}, rho={self.rho})")


@dataclass(frozen=True)
class CriterionProbe:
    """One evaluation of a criterion at a tentative step size.

    ``trial_value`` is the objective at the trial point, kept so that the
    accepting probe hands it back without a second evaluation. ``point`` is
    the trial point itself when the criterion computes it (descent lemma).
    """

    alpha: float
    violation: float
    trial_value: float
    feasible: bool
    point: Optional[np.ndarray] = None


@dataclass(frozen=True)
class LineSearchResult:
    accepted_alpha: float
    criterion_evals: int
    adjustments: int
    accepted_probe: CriterionProbe
    terminated_by_cap: bool = False


@dataclass(frozen=True)
class ArmijoContext:
    """Inputs of the Armijo criterion at the base point ``x``.

    ``trial_evaluator(alpha)`` returns ``F(x + alpha d)``.
    """

    base_value: float
    directional_derivative: float
    trial_evaluator: Callable[[float], float]


@dataclass(frozen=True)
class DescentLemmaContext:
    """Inputs of the descent-lemma criterion at the anchor ``y``.

    ``prox_evaluator(alpha)`` returns the pair ``(p, f(p))`` where ``p`` is
    the proximal gradient point. ``nonsmooth_value`` evaluates the nonsmooth
    term so probes can report the full objective; it may be omitted.
    """

    anchor_point: np.ndarray
    smooth_value_at_anchor: float
    gradient_at_anchor: np.ndarray
    prox_evaluator: Callable[[float], tuple]
    nonsmooth_value: Optional[Callable[[np.ndarray], float]] = None

    def __post_init__(self):
        if np.shape(self.anchor_point) != np.shape(self.gradient_at_anchor):
            raise ValueError("gradient_at_anchor and anchor_point differ in shape")


def armijo_violation(ctx: ArmijoContext, alpha: float, c: float) -> CriterionProbe:
    """Probe the Armijo condition at ``alpha``.

    Performs exactly one evaluation of ``ctx.trial_evaluator``. A non-finite
    trial value gives an infeasible probe with violation ``-inf``.
    """
    if not ctx.directional_derivative < 0.0:
        raise NonDescentDirection(
            f"directional derivative must be negative, got {ctx.directional_derivative}")
    trial = float(ctx.trial_evaluator(alpha))
    if not math.isfinite(trial):
        return CriterionProbe(alpha, -math.inf, trial, False)
    # adding 0.0 turns the -0.0 of a zero decrease into 0.0
    v = (trial - ctx.base_value) / (c * alpha * ctx.directional_derivative) + 0.0
    return CriterionProbe(alpha, v, trial, v >= 1.0)


def armijo_adaptive_factor(violation: float, rho: float, c: float, epsilon: float) -> float:
    """Shrink factor ``max(epsilon, rho (1 - c) / (1 - c v))``.

    Equals ``rho`` at ``v = 1`` and decreases as the violation grows more
    negative. Non-finite violations yield the clamp ``epsilon``.
    """
    if not math.isfinite(violation):
        return epsilon
    return max(epsilon, rho * (1.0 - c) / (1.0 - c * violation))


def descent_lemma_violation(ctx: DescentLemmaContext, alpha: float) -> CriterionProbe:
    """Probe the descent-lemma criterion at ``alpha``.

    When the linearization gap ``f(p) - f(y) - <grad f(y), p - y>`` is not
    positive the quadratic model already upper-bounds ``f`` and the probe is
    feasible with violation ``+inf``.
    """
    point, smooth_trial = ctx.prox_evaluator(alpha)
    smooth_trial = float(smooth_trial)
    point = np.asarray(point)
    if not math.isfinite(smooth_trial):
        return CriterionProbe(alpha, -math.inf, smooth_trial, False, point)
    trial = smooth_trial
    if ctx.nonsmooth_value is not None:
        trial += float(ctx.nonsmooth_value(point))
    step = point - ctx.anchor_point
    quad = float(np.vdot(step, step)) / (2.0 * alpha)
    gap = smooth_trial - ctx.smooth_value_at_anchor - float(np.vdot(ctx.gradient_at_anchor, step))
    if gap <= 0.0:
        return CriterionProbe(alpha, math.inf, trial, True, point)
    v = quad / gap
    return CriterionProbe(alpha, v, trial, v >= 1.0, point)


def descent_lemma_adaptive_factor(violation: float, rho: float) -> float:
    """Shrink factor ``rho * v`` for an infeasible descent-lemma probe."""
    if not (math.isfinite(violation) and violation > 0.0):
        raise InvalidViolation(f"violation must be finite and positive, got {violation}")
    return rho * violation


def initial_step(policy: Policy, alpha0: float, previous_accepted: Optional[float] = None) -> float:
    if Policy(policy) is Policy.MONOTONE and previous_accepted is not None:
        return previous_accepted
    return alpha0


def backtrack(criterion: Callable[[float], CriterionProbe], config: BacktrackConfig,
              adaptive_factor: Optional[Callable[[float], float]] = None,
              start: Optional[float] = None) -> LineSearchResult:
    """Shrink a tentative step until ``criterion`` reports a feasible probe.

    Parameters
    ----------
    criterion : callable
        Maps a step size to a :class:`CriterionProbe`.
    config : BacktrackConfig
    adaptive_factor : callable, optional
        Maps the violation of an infeasible probe to the shrink factor.
        Required in adaptive mode; ignored in regular mode.
    start : float, optional
        First tentative step; defaults to ``config.alpha0``.

    Returns
    -------
    LineSearchResult

    Raises
    ------
    CapExceeded
        After ``config.max_adjustments`` shrinks without a feasible probe.
        The exception's ``result`` carries the last probe.
    """
    adaptive = config.mode is Mode.ADAPTIVE
    if adaptive and adaptive_factor is None:
        raise ValueError("adaptive mode needs an adaptive_factor")
    alpha = config.alpha0 if start is None else float(start)
    probe = criterion(alpha)
    evals = 1
    while not probe.feasible:
        if evals - 1 >= config.max_adjustments:
            result = LineSearchResult(probe.alpha, evals, evals - 1, probe, True)
            raise CapExceeded(
                f"no feasible step after {config.max_adjustments} adjustments "
                f"(last alpha={probe.alpha:.3e}, violation={probe.violation:.3e})", result)
        factor = adaptive_factor(probe.violation) if adaptive else config.rho
        alpha = alpha * factor
        probe = criterion(alpha)
        evals += 1
    return LineSearchResult(probe.alpha, evals, evals - 1, probe, False)


def armijo_search(ctx: ArmijoContext, config: BacktrackConfig,
                  start: Optional[float] = None) -> LineSearchResult:
    """Backtrack on the Armijo condition with ``config``."""
    config.check_armijo()
    if not ctx.directional_derivative < 0.0:
        raise NonDescentDirection(
            f"directional derivative must be negative, got {ctx.directional_derivative}")
    c = config.c

    def factor(v):
        return armijo_adaptive_factor(v, config.rho, c, config.epsilon)

    return backtrack(lambda a: armijo_violation(ctx, a, c), config, factor, start)


def descent_lemma_search(ctx: DescentLemmaContext, config: BacktrackConfig,
                         start: Optional[float] = None) -> LineSearchResult:
    """Backtrack on the descent-lemma criterion with ``config``.

    In adaptive mode a violation outside (0, 1) (non-finite trial values,
    cancellation in the linearization gap) falls back to ``config.rho``.
    """
    rho = config.rho

    def factor(v):
        try:
            return descent_lemma_adaptive_factor(v, rho)
        except InvalidViolation:
            return rho

    return backtrack(lambda a: descent_lemma_violation(ctx, a), config, factor, start)
