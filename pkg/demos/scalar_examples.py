# Two one-dimensional instances on which a single backtracking call can be
# followed by hand.
#
# On F(x) = x^2 from x = -1 along d = 2 with c = 1/4, a step a is accepted
# iff (2a - 1)^2 <= 1 - a, i.e. iff a <= 0.75. Starting from a = 1, a
# shrink factor of 0.75 lands exactly on the boundary, while 0.8 overshoots
# it to 0.8 and then needs a second shrink to 0.64. The adaptive variant
# with rho = 0.8 reads how badly a = 1 fails and jumps straight to 0.6.
#
# On F(x) = cos x - x / (5 pi) the feasible set is not an interval: a longer
# step can pass while a shorter one fails, so a smaller shrink factor can
# cost more evaluations.
import math

from adabls.linesearch import Mode, armijo_violation
from adabls.worked_examples import (COSINE_C, cosine_context, cosine_search, cosine_step_to,
                                    square_context, square_search)

print("F(x) = x^2, x = -1, d = 2, c = 1/4")
for a in (1.0, 0.8, 0.75, 0.64, 0.6):
    probe = armijo_violation(square_context(), a, 0.25)
    print(f"  a = {a:<5} violation v = {probe.violation:6.3f}  feasible = {probe.feasible}")

for rho, mode in ((0.75, Mode.REGULAR), (0.8, Mode.REGULAR), (0.8, Mode.ADAPTIVE)):
    r = square_search(rho, mode)
    print(f"  {mode.value:8s} rho = {rho}: accepted {r.accepted_alpha:.4g} "
          f"after {r.criterion_evals} criterion evaluations")

print()
print("F(x) = cos x - x / (5 pi), x = pi/2, c = 1/(2 pi)")
ctx = cosine_context()
for k in (4, 3, 2):
    probe = armijo_violation(ctx, cosine_step_to(k * math.pi), COSINE_C)
    print(f"  step reaching {k} pi: feasible = {probe.feasible}")
for rho, label in ((5 / 7, "5/7"), (3 / 7, "3/7")):
    r = cosine_search(rho)
    print(f"  rho = {label}: {r.adjustments} adjustment(s), iterate "
          f"{math.pi / 2 + r.accepted_alpha * (1 + 1 / (5 * math.pi)):.4f}")
