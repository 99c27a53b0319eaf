"""Derivative-free Dynamical Systems Method for monotone ill-posed equations.

Solves ``F(u) = f`` for monotone, locally Hölder-continuous ``F`` from noisy
data ``f_delta`` by following the flow

    u' = -(F(u) + a(t) u - f_delta)

and stopping it with a discrepancy principle.
"""

from .errors import (
    ConfigError,
    DSMError,
    InitConditionError,
    NonConvergenceError,
    StiffnessError,
    StoppingTimeout,
    StructuralError,
)
from .space import HVector, axpy, inner, norm
from .operators import (
    MonotoneOperator,
    MonotoneProblem,
    NoisyData,
    get_problem,
    make_composite,
    make_identity,
    make_pointwise_holder,
    make_psd_linear,
    perturb,
    problem_labels,
)
from .schedule import ConditionCertificate, Schedule, certify
from .path import PathPoint, noiseless_path, sample_path, solve_regularized
from .dsm import (
    InitCertificate,
    IntegratorOptions,
    StopRule,
    TrajectoryRecord,
    check_init,
    integrate,
    integrate_shifted,
)
from .report import AuditReport
from .verification import (
    GronwallInstance,
    audit_aux33,
    audit_limits,
    audit_trajectory,
    gronwall_bound,
    gronwall_check,
)
from .study import StudyConfig, StudyRow, parse_config, run_study

__version__ = "0.1.0"
