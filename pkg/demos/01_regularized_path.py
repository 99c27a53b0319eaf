"""
The regularized solution path
=============================

Solve F(V) + a V = f_delta along a decreasing schedule a(t) and watch the
norm of V grow while a * ||V|| shrinks.
"""

import numpy as np

from holderdsm import Schedule, get_problem, perturb, sample_path

# a strictly monotone, non-differentiable problem: F(u)_i = sign(u_i)|u_i|^0.75
problem = get_problem("holder075")
noisy = perturb(problem.f, 1e-3, seed=0)
schedule = Schedule.power(d=1, c=1, b=0.9)

times = np.concatenate([[0.0], np.logspace(-2, 4, 13)])
path = sample_path(problem.operator, schedule, noisy, times)

print(f"{'t':>10} {'a(t)':>10} {'||V||':>10} {'a||V||':>10} {'misfit':>10}")
for p in path:
    print(f"{p.t:10.3g} {p.a:10.3g} {p.psi:10.5f} {p.phi_d:10.3g} {p.discrepancy:10.3g}")

# the misfit settles near the noise level instead of going to zero
print("noise level:", noisy.delta, "  ||y|| =", round(float(np.sqrt(
    np.dot(problem.weights * problem.y.coords, problem.y.coords))), 5))
