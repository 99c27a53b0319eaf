"""
Checking the estimates on computed data
=======================================

Certify a schedule, then compare a trajectory against the analytic
envelopes for ||u'|| and ||u - V_delta||.
"""

import numpy as np

from holderdsm import (Schedule, audit_limits, audit_trajectory, certify, get_problem,
                       integrate, perturb, sample_path)

schedule = Schedule.power(d=3, c=1, b=0.5)
for cid, q in (("eq28", None), ("eq26_q", 0.25), ("eq46_q", 0.25)):
    print(cid, certify(schedule, cid, q))

# too small a scale fails right at t = 0
print(certify(Schedule.power(d=1, c=1, b=0.5), "eq26_q", 0.25))

problem = get_problem("identity")
noisy = perturb(problem.f, 1e-2, seed=0)
rec = integrate(problem.operator, schedule, noisy, problem.start())
print(audit_trajectory(problem.operator, schedule, noisy, rec, q=0.25, y=problem.y).table())

path = sample_path(problem.operator, schedule, noisy,
                   np.concatenate([[0.0], np.logspace(-2, 5, 40)]))
print(audit_limits(schedule, path, [1e2, 1e3, 1e4, 1e5]).table())
