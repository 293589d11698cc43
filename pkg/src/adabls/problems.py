"""Objective families with analytic gradients.

Every constructor returns a :class:`ProblemDefinition`. Composite problems
``F = f + psi`` report ``F`` through ``value`` and ``grad f`` through
``gradient``; ``smooth_value`` evaluates ``f`` alone and ``nonsmooth``
carries ``psi`` together with its proximal operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .errors import ConvergenceFailure, DimensionMismatch, NoProxAvailable, RankOutOfRange

__all__ = [
    "ProblemDefinition",
    "L1Norm",
    "soft_threshold",
    "prox_point",
    "largest_eigenvalue",
    "lipschitz_bound",
    "logistic_objective",
    "lasso_objective",
    "rosenbrock_objective",
    "matrix_factorization_objective",
    "matrix_factorization_init",
    "example_objectives",
    "finite_difference_gradient",
    "gradient_relative_error",
]


@dataclass(frozen=True)
class ProblemDefinition:
    name: str
    dimension: int
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    smooth_value: Optional[Callable[[np.ndarray], float]] = None
    nonsmooth: Optional[object] = None
    lipschitz_hint: Optional[float] = None
    strong_convexity_hint: Optional[float] = None
    hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    optimum_value: Optional[float] = None
    x0: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.smooth_value is None:
            object.__setattr__(self, "smooth_value", self.value)

    @property
    def is_composite(self):
        return self.nonsmooth is not None

    def initial_point(self):
        if self.x0 is not None:
            return np.array(self.x0, dtype=float)
        return np.zeros(self.dimension)


def soft_threshold(z, level):
    """Componentwise ``sign(z) * max(|z| - level, 0)``."""
    z = np.asarray(z, dtype=float)
    return np.sign(z) * np.maximum(np.abs(z) - level, 0.0)


@dataclass(frozen=True)
class L1Norm:
    """``lam * |x|_1`` with its proximal operator."""

    lam: float

    def __call__(self, x):
        return self.lam * float(np.abs(x).sum())

    def prox(self, z, step):
        return soft_threshold(z, self.lam * step)


def prox_point(y, alpha, smooth_gradient, nonsmooth=None):
    """Proximal gradient point ``argmin_x psi(x) + |x - (y - alpha g)|^2 / (2 alpha)``.

    With ``nonsmooth=None`` this is the plain gradient step.
    """
    z = np.asarray(y, dtype=float) - alpha * np.asarray(smooth_gradient, dtype=float)
    if nonsmooth is None:
        return z
    prox = getattr(nonsmooth, "prox", None)
    if prox is None:
        raise NoProxAvailable(f"{type(nonsmooth).__name__} has no prox method")
    return prox(z, alpha)


def largest_eigenvalue(A, rtol=1e-8, max_iter=10000, seed=0):
    """Largest eigenvalue of ``A^T A`` by power iteration.

    Iterates until the Rayleigh quotient changes by at most ``rtol``
    relatively. Raises ``ConvergenceFailure`` after ``max_iter`` iterations.
    """
    d = A.shape[1]
    if (sp.issparse(A) and A.nnz == 0) or (not sp.issparse(A) and not np.any(A)):
        raise ValueError("A must be nonzero")
    v = np.random.default_rng(seed).standard_normal(d)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = A.T @ (A @ v)
        lam_new = float(v @ w)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            # start vector landed in the null space; restart from a new draw
            v = np.random.default_rng(seed + 1).standard_normal(d)
            v /= np.linalg.norm(v)
            continue
        v = w / norm
        if lam_new > 0 and abs(lam_new - lam) <= rtol * lam_new:
            return lam_new
        lam = lam_new
    raise ConvergenceFailure(f"power iteration did not reach rtol={rtol} in {max_iter} iterations")


def lipschitz_bound(A, n=None, **kwargs):
    """Upper bound ``lambda_max(A^T A) / (4 n)`` on the logistic-loss Lipschitz constant."""
    n = A.shape[0] if n is None else n
    return largest_eigenvalue(A, **kwargs) / (4.0 * n)


def _as_matrix(A):
    if sp.issparse(A):
        return sp.csr_matrix(A, dtype=float)
    return np.asarray(A, dtype=float)


def logistic_objective(A, y, gamma, name="logistic"):
    """L2-regularized logistic regression.

    ``F(x) = mean_i [log(1 + exp(a_i x)) - y_i a_i x] + gamma/2 |x|^2``,
    which equals the cross-entropy form for labels in {0, 1} and is
    evaluated through ``logaddexp`` so it stays finite for any finite ``x``.
    """
    A = _as_matrix(A)
    y = np.asarray(y, dtype=float).ravel()
    n, d = A.shape
    if y.shape[0] != n:
        raise DimensionMismatch(f"A has {n} rows but y has {y.shape[0]} entries")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    gamma = float(gamma)

    def value(x):
        z = A @ x
        return float(np.mean(np.logaddexp(0.0, z) - y * z)) + 0.5 * gamma * float(x @ x)

    def gradient(x):
        z = A @ x
        return A.T @ (expit(z) - y) / n + gamma * x

    def hessian(x):
        s = expit(A @ x)
        w = s * (1.0 - s) / n
        if sp.issparse(A):
            H = (A.T @ sp.diags(w) @ A).toarray()
        else:
            H = A.T @ (w[:, None] * A)
        return H + gamma * np.eye(d)

    try:
        lbar = lipschitz_bound(A, n)
    except ValueError:
        lbar = None
    return ProblemDefinition(name, d, value, gradient, lipschitz_hint=lbar,
                             strong_convexity_hint=gamma if gamma > 0 else None,
                             hessian=hessian)


def lasso_objective(A, y, lam, name="lasso"):
    """``F(x) = |Ax - y|^2 / 2 + lam |x|_1`` with soft-threshold prox."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    A = _as_matrix(A)
    y = np.asarray(y, dtype=float).ravel()
    n, d = A.shape
    if y.shape[0] != n:
        raise DimensionMismatch(f"A has {n} rows but y has {y.shape[0]} entries")
    psi = L1Norm(float(lam))

    def smooth_value(x):
        r = A @ x - y
        return 0.5 * float(r @ r)

    def value(x):
        return smooth_value(x) + psi(x)

    def gradient(x):
        return A.T @ (A @ x - y)

    return ProblemDefinition(name, d, value, gradient, smooth_value=smooth_value,
                             nonsmooth=psi, lipschitz_hint=largest_eigenvalue(A))


def rosenbrock_objective():
    """``F(u, v) = 100 (u - v^2)^2 + (1 - v)^2``; minimum 0 at (1, 1)."""

    def value(x):
        u, v = x
        return 100.0 * (u - v * v) ** 2 + (1.0 - v) ** 2

    def gradient(x):
        u, v = x
        r = u - v * v
        return np.array([200.0 * r, -400.0 * v * r - 2.0 * (1.0 - v)])

    return ProblemDefinition("rosenbrock", 2, value, gradient, optimum_value=0.0)


def matrix_factorization_objective(A, r, name="matrix_factorization"):
    """``F(U, V) = |U V^T - A|_F^2 / 2``.

    The variable is ``concatenate([U.ravel(), V.ravel()])`` with both
    blocks row-major, ``U`` of shape (m, r) and ``V`` of shape (n, r).
    ``optimum_value`` is the Eckart-Young value ``sum_{i>r} s_i^2 / 2``.
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    if not (1 <= r < min(m, n)):
        raise RankOutOfRange(f"rank must satisfy 1 <= r < {min(m, n)}, got {r}")
    split = m * r

    def unpack(x):
        return x[:split].reshape(m, r), x[split:].reshape(n, r)

    def value(x):
        U, V = unpack(x)
        R = U @ V.T - A
        return 0.5 * float(np.vdot(R, R))

    def gradient(x):
        U, V = unpack(x)
        R = U @ V.T - A
        return np.concatenate([(R @ V).ravel(), (R.T @ U).ravel()])

    s = np.linalg.svd(A, compute_uv=False)
    fstar = 0.5 * float(np.sum(s[r:] ** 2))
    return ProblemDefinition(name, (m + n) * r, value, gradient, optimum_value=fstar)


def matrix_factorization_init(m, n, r, seed):
    """Entries i.i.d. uniform on [0, 1/sqrt(r)], flattened like the objective."""
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 1.0 / math.sqrt(r), size=(m + n) * r)


def example_objectives():
    """The scalar functions ``x^2`` and ``cos x - x / (5 pi)``.

    Both act on length-1 arrays.
    """
    a = 1.0 / (5.0 * math.pi)
    square = ProblemDefinition(
        "square", 1,
        lambda x: float(x[0] ** 2),
        lambda x: np.array([2.0 * x[0]]),
        optimum_value=0.0)
    wavy = ProblemDefinition(
        "cosine_slope", 1,
        lambda x: float(math.cos(x[0]) - a * x[0]),
        lambda x: np.array([-math.sin(x[0]) - a]))
    return square, wavy


def finite_difference_gradient(fun, x, h=None):
    """Central differences with step ``1e-6 * (1 + |x|)`` by default."""
    x = np.asarray(x, dtype=float)
    if h is None:
        h = 1e-6 * (1.0 + np.linalg.norm(x))
    g = np.empty_like(x)
    e = np.zeros_like(x)
    for i in range(x.size):
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2.0 * h)
        e[i] = 0.0
    return g


def gradient_relative_error(problem, x):
    """``|g_fd - g| / max(|g|, |g_fd|)`` for the smooth part of ``problem``."""
    g = np.asarray(problem.gradient(x), dtype=float)
    fd = finite_difference_gradient(problem.smooth_value, x)
    scale = max(np.linalg.norm(g), np.linalg.norm(fd))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(fd - g) / scale)
