# Sparse recovery with FISTA. The measurements y = A x* + noise come from a
# Gaussian matrix with 128 rows and 256 columns and a planted x* with ten
# nonzeros. The step is found by backtracking on the descent-lemma
# inequality with a monotone policy, so the Lipschitz estimate 1/alpha
# only ever grows.
#
# Here the cost is counted in gradient evaluations: every FISTA iteration
# takes exactly one, so this is the iteration count to reach 1e-8.
import sys

import numpy as np

from adabls import datasets, harness

cfg = {
    "problem": "lasso", "n": 128, "d": 256, "sparsity": 10, "noise": 0.01, "seed": 0,
    "methods": ["fista"], "regular_rhos": [1 / 2, 1 / 3, 1 / 5], "adaptive_rho": 1 / 1.1,
    "alpha0_multipliers": [1e3, 1e2, 1e1, 1.0], "precision": 1e-8, "max_iterations": 20000,
}

exp = harness.build_experiment(cfg)
traces = harness.run_grid(exp)
summary = harness.summarize(traces, metric="gevals")
harness.emit_csv(summary, sys.stdout)

# how close is the recovered support to the planted one?
_, _, x_star = datasets.synth_linear_inverse(128, 256, 10, 0.01, seed=0)
best = min(traces, key=lambda t: t.final.objective)
print(f"planted support size {np.count_nonzero(x_star)}; "
      f"final objective {best.final.objective:.10g} (F* = {exp.f_star:.10g})")
