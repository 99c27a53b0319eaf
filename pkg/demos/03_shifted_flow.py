"""
Choosing among many solutions
=============================

diag(1, 0) u = (1, 0) is solved by every (1, s).  Anchoring the flow at
ubar = (0, 5) steers it to the solution closest to the anchor, (1, 5).
"""

import numpy as np

from holderdsm import (HVector, Schedule, get_problem, integrate, integrate_shifted,
                       perturb)

problem = get_problem("psd2", ubar=[0.0, 5.0])
schedule = Schedule.power(d=4, c=1, b=0.9)
print("nearest solution to the anchor:", problem.ystar.coords)

for delta in (1e-1, 1e-2, 1e-3):
    noisy = perturb(problem.f, delta, seed=1)
    shifted = integrate_shifted(problem.operator, schedule, noisy, problem.start(),
                                problem.ubar)
    plain = integrate(problem.operator, schedule, noisy, problem.start())
    print(f"delta={delta:6.0e}  anchored -> {np.round(shifted.u_at_stop.coords, 3)}"
          f"   plain -> {np.round(plain.u_at_stop.coords, 3)}")

# a zero anchor is exactly the plain flow
noisy = perturb(problem.f, 1e-2, 0)
a = integrate(problem.operator, schedule, noisy, problem.start())
b = integrate_shifted(problem.operator, schedule, noisy, problem.start(),
                      HVector([0.0, 0.0]))
print("zero anchor identical:", np.array_equal(a.U, b.U))
