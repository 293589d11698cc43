"""Regular and adaptive backtracking line search for first-order methods."""

from .linesearch import (ArmijoContext, BacktrackConfig, Criterion, CriterionProbe,
                         DescentLemmaContext, LineSearchResult, Mode, Policy,
                         armijo_adaptive_factor, armijo_search, armijo_violation, backtrack,
                         descent_lemma_adaptive_factor, descent_lemma_search,
                         descent_lemma_violation, initial_step)
from .optimizers import (FixedStep, LineSearch, Method, OptimizerState, Stopping,
                         adagrad_step, agd_step, fista_step, gd_step, run)
from .problems import (ProblemDefinition, example_objectives, lasso_objective,
                       lipschitz_bound, logistic_objective, matrix_factorization_objective,
                       prox_point, rosenbrock_objective)
from .trace import EvalCounters, RunTrace

__version__ = "0.1.0"
