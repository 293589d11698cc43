"""Two scalar instances where single backtracking calls can be checked by hand.

``F(x) = x^2`` from ``x = -1`` along ``d = 2`` with ``c = 1/4``: the Armijo
condition reads ``(2a - 1)^2 <= 1 - a`` and holds exactly for
``a <= 0.75``. Starting from ``a = 1``, ``rho = 0.75`` accepts 0.75 after
one shrink while ``rho = 0.8`` needs two and returns 0.64.

``F(x) = cos x - x / (5 pi)`` from ``x = pi/2`` along ``d = -F'(pi/2)`` with
``c = 1 / (2 pi)``: the step reaching ``3 pi`` is feasible but the smaller
step reaching ``2 pi`` is not, so from the step reaching ``4 pi`` the factor
5/7 needs one shrink and the smaller factor 3/7 needs two.
"""

import math

import numpy as np

from .linesearch import ArmijoContext, BacktrackConfig, Mode, armijo_search, armijo_violation
from .problems import example_objectives

__all__ = ["square_context", "cosine_context", "COSINE_SLOPE", "COSINE_C",
           "square_search", "cosine_search", "cosine_step_to", "replicate_all"]

COSINE_SLOPE = 1.0 / (5.0 * math.pi)
COSINE_C = 1.0 / (2.0 * math.pi)


def _context(problem, x, d):
    x, d = np.array([x], dtype=float), np.array([d], dtype=float)
    slope = float(problem.gradient(x) @ d)
    return ArmijoContext(problem.value(x), slope, lambda a: problem.value(x + a * d))


def square_context():
    return _context(example_objectives()[0], -1.0, 2.0)


def cosine_context():
    problem = example_objectives()[1]
    x = math.pi / 2
    return _context(problem, x, -float(problem.gradient(np.array([x]))[0]))


def cosine_step_to(target):
    """Step size that moves ``pi/2`` to ``target`` along the cosine direction."""
    return (target - math.pi / 2) / (1.0 + COSINE_SLOPE)


def square_search(rho, mode=Mode.REGULAR, epsilon=0.01):
    cfg = BacktrackConfig(rho=rho, c=0.25, epsilon=epsilon, alpha0=1.0, mode=mode)
    return armijo_search(square_context(), cfg)


def cosine_search(rho, mode=Mode.REGULAR, epsilon=0.01):
    cfg = BacktrackConfig(rho=rho, c=COSINE_C, epsilon=epsilon,
                          alpha0=cosine_step_to(4 * math.pi), mode=mode)
    return armijo_search(cosine_context(), cfg)


def replicate_all():
    """Run every check; yields ``(name, passed, detail)``."""
    out = []
    for rho, alpha, evals in ((0.75, 0.75, 2), (0.8, 0.64, 3)):
        r = square_search(rho)
        ok = abs(r.accepted_alpha - alpha) <= 1e-12 and r.criterion_evals == evals
        out.append((f"square rho={rho}", ok,
                    f"alpha={r.accepted_alpha:.15g} evals={r.criterion_evals}"))
    r = square_search(0.8, Mode.ADAPTIVE)
    ok = abs(r.accepted_alpha - 0.6) <= 1e-12 and r.criterion_evals == 2
    out.append(("square adaptive rho=0.8", ok,
                f"alpha={r.accepted_alpha:.15g} evals={r.criterion_evals}"))
    ctx = cosine_context()
    at3 = armijo_violation(ctx, cosine_step_to(3 * math.pi), COSINE_C).feasible
    at2 = armijo_violation(ctx, cosine_step_to(2 * math.pi), COSINE_C).feasible
    out.append(("cosine feasibility", at3 and not at2,
                f"reach 3pi feasible={at3}, reach 2pi feasible={at2}"))
    for rho, adjustments in ((5 / 7, 1), (3 / 7, 2)):
        r = cosine_search(rho)
        out.append((f"cosine rho={rho:.4f}", r.adjustments == adjustments,
                    f"adjustments={r.adjustments}"))
    return out
