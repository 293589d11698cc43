# Rosenbrock's valley F(u, v) = 100 (u - v^2)^2 + (1 - v)^2 from the origin
# with an initial step of 0.1 and 1000 iterations.
#
# Gradient descent uses rho = 0.3 and c = 1e-4. AGD uses rho = 0.9 and
# c = 1/2, with the strong-convexity constant taken as the smallest Hessian
# eigenvalue at the minimizer (1, 1). The adaptive searches need far fewer
# objective evaluations. Whether they also end lower depends on the method:
# for AGD the regular search ends lower here, at a much higher cost.
import numpy as np

from adabls.linesearch import BacktrackConfig, Mode
from adabls.optimizers import LineSearch, Stopping, run
from adabls.problems import rosenbrock_objective

problem = rosenbrock_objective()
m = float(np.linalg.eigvalsh(np.array([[200.0, -400.0], [-400.0, 802.0]]))[0])

for method, rho, c in (("gd", 0.3, 1e-4), ("agd", 0.9, 0.5)):
    for mode in Mode:
        cfg = BacktrackConfig(rho=rho, c=c, alpha0=0.1, mode=mode)
        tr = run(problem, method, LineSearch(cfg), Stopping(1000),
                 m=m if method == "agd" else None)
        print(f"{method:4s} {mode.value:8s} final loss {tr.final.objective:.3e}  "
              f"#f {tr.final.f_evals:6d}  wall {tr.final.elapsed_s:.3f} s")
