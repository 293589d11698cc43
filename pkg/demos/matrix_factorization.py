# Low-rank factorization of a sparse ratings-like matrix, min over U, V of
# |U V^T - A|_F^2 / 2. The problem is nonconvex, but its optimal value is
# known from the truncated SVD, so the suboptimality gap is exact.
#
# Gradient descent and Adagrad are run from the same seeded uniform
# initialization, each with a regular and an adaptive Armijo search.
from adabls import datasets
from adabls.linesearch import BacktrackConfig, Mode
from adabls.optimizers import LineSearch, Stopping, run
from adabls.problems import matrix_factorization_init, matrix_factorization_objective

rows, cols, rank, seed = 40, 30, 4, 0
A = datasets.synth_ratings(rows, cols, 0.3, seed)
problem = matrix_factorization_objective(A, rank)
x0 = matrix_factorization_init(rows, cols, rank, seed)
print(f"optimal value (truncated SVD): {problem.optimum_value:.6f}")

for method in ("gd", "adagrad"):
    for mode in Mode:
        cfg = BacktrackConfig(rho=0.5, c=1e-4, alpha0=1.0, mode=mode)
        tr = run(problem, method, LineSearch(cfg), Stopping(3000, target_gap=1e-6), x0=x0)
        print(f"{method:8s} {mode.value:8s} iterations {tr.iterations:5d}  gap "
              f"{tr.final.gap:.2e}  #f {tr.final.f_evals}")
