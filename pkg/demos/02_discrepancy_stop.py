"""
Stopping the flow by the discrepancy principle
==============================================

Integrate u' = -(F(u) + a(t) u - f_delta) and stop when the misfit reaches
C * delta**zeta.  Smaller noise means a later stop and a better answer.
"""

import numpy as np

from holderdsm import Schedule, StopRule, get_problem, integrate, norm, perturb

problem = get_problem("composite")
schedule = Schedule.power(d=4, c=1, b=0.9)
rule = StopRule(C=1.5, zeta=0.9)

print(f"{'delta':>8} {'t_delta':>10} {'steps':>6} {'misfit':>10} {'error':>10}")
for delta in (1e-1, 1e-2, 1e-3, 1e-4):
    noisy = perturb(problem.f, delta, seed=0)
    rec = integrate(problem.operator, schedule, noisy, problem.start(), rule)
    err = norm(rec.u_at_stop - problem.y)
    print(f"{delta:8.0e} {rec.t_delta:10.4g} {rec.n_steps:6d} "
          f"{rec.discrepancy_at_stop:10.4g} {err:10.3g}")

# a singular linear operator behaves worse: noise in the null space is only
# damped by a(t_delta), which shrinks like delta**zeta
singular = get_problem("psd5")
for delta in (1e-1, 1e-3):
    rec = integrate(singular.operator, schedule, perturb(singular.f, delta, 0),
                    singular.start(), rule)
    print("psd5", delta, "error", round(norm(rec.u_at_stop - singular.y), 4))
