"""Integration of the flow ``u' = -(F(u) + a(t)(u - ubar) - f_delta)``.

The unshifted flow is the case ``ubar = 0``.  Time stepping uses the
Kutta-Merson 4(3) embedded pair with PI step-size control; the stopping time
of the discrepancy principle is located by bisection on a cubic Hermite
interpolant of the accepted steps.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InitConditionError, StiffnessError, StoppingTimeout, StructuralError
from .operators import NoisyData
from .path import solve_regularized
from .report import AuditReport
from .schedule import certify
from .space import HVector

__all__ = [
    "StopRule",
    "IntegratorOptions",
    "TrajectoryRecord",
    "InitCertificate",
    "integrate",
    "integrate_shifted",
    "check_init",
    "merson_step",
    "hermite",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StopRule:
    """Discrepancy principle ``||F(u(t_delta)) - f_delta|| = C delta**zeta``.

    ``crossing_tol`` is relative: the bisection stops once the bracket is
    shorter than ``crossing_tol * (1 + t)``.  ``match_rtol`` is the accepted
    relative mismatch between the discrepancy and its target.
    """

    C: float = 1.5
    zeta: float = 0.9
    crossing_tol: float = 1e-10
    match_rtol: float = 1e-10

    def __post_init__(self):
        if not self.C > 0:
            raise StructuralError("C must be positive")
        if not 0.0 < self.zeta <= 1.0:
            raise StructuralError(f"zeta must lie in (0, 1], got {self.zeta}")

    def target(self, delta):
        tgt = self.C * delta ** self.zeta
        if not tgt > delta:
            raise StructuralError(
                f"C delta^zeta = {tgt:.6g} must exceed delta = {delta:.6g}")
        return tgt


@dataclass(frozen=True)
class IntegratorOptions:
    rtol: float = 1e-8
    atol: float = 1e-12
    T_max: float = 1e6
    h0: float | None = None
    max_steps: int = 50_000_000
    safety: float = 0.9


@dataclass(eq=False)
class TrajectoryRecord:
    """Accepted steps of one DSM run.

    When the run stopped, the last sample is the refined stopping point
    ``(t_delta, u_at_stop)``; every earlier sample has discrepancy above the
    target.  ``h`` is ``||u'||``, i.e. ``||F(u) + a (u - ubar) - f_delta||``.
    """

    times: np.ndarray
    U: np.ndarray
    discrepancy: np.ndarray
    a: np.ndarray
    h: np.ndarray
    weights: np.ndarray
    target: float
    delta: float
    t_delta: float | None = None
    u_at_stop: HVector | None = None
    stopped: bool = False
    ubar: HVector | None = None
    n_rejected: int = 0
    n_evals: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def samples(self):
        w = self.weights
        for i in range(self.times.size):
            yield (float(self.times[i]), HVector(self.U[i], w), float(self.discrepancy[i]),
                   float(self.a[i]), float(self.h[i]))

    @property
    def u_norm(self):
        return np.sqrt(np.einsum("ij,ij->i", self.U * self.weights, self.U))

    @property
    def discrepancy_at_stop(self):
        return float(self.discrepancy[-1]) if self.stopped else None

    @property
    def n_steps(self):
        return self.times.size - 1


def merson_step(field, t, u, k1, h):
    """One Kutta-Merson step.

    Returns the fourth-order solution and Merson's local error estimate
    (``O(h**4)``).
    """
    k2 = field(t + h / 3, u + (h / 3) * k1)
    k3 = field(t + h / 3, u + (h / 6) * (k1 + k2))
    k4 = field(t + h / 2, u + (h / 8) * (k1 + 3.0 * k3))
    k5 = field(t + h, u + (h / 2) * (k1 - 3.0 * k3 + 4.0 * k4))
    u_new = u + (h / 6) * (k1 + 4.0 * k4 + k5)
    err = (h / 30) * (2.0 * k1 - 9.0 * k3 + 8.0 * k4 - k5)
    return u_new, err


def hermite(t0, u0, k0, t1, u1, k1, s):
    """Cubic Hermite interpolant of ``(u, u')`` at both ends, evaluated at ``s``."""
    h = t1 - t0
    th = (s - t0) / h
    th2 = th * th
    th3 = th2 * th
    return ((2 * th3 - 3 * th2 + 1) * u0 + (th3 - 2 * th2 + th) * h * k0
            + (-2 * th3 + 3 * th2) * u1 + (th3 - th2) * h * k1)


def _validate_u(u, operator, name):
    if not isinstance(u, HVector):
        u = HVector(u, operator.weights)
    if u.n != operator.dimension or not np.array_equal(u.weights, operator.weights):
        raise StructuralError(f"{name} does not live in the operator's space")
    return u


def integrate_shifted(operator, schedule, f_delta, u0, ubar, rule=StopRule(),
                      opts=IntegratorOptions()):
    """Run the shifted flow until the discrepancy principle fires.

    Parameters
    ----------
    operator : MonotoneOperator
    schedule : Schedule
        Must satisfy the ``eq28`` condition.
    f_delta : NoisyData
    u0 : HVector
        Initial value; ``||F(u0) - f_delta||`` must exceed ``C delta**zeta``.
    ubar : HVector or None
        Anchor; ``None`` means zero.
    rule : StopRule
    opts : IntegratorOptions

    Returns
    -------
    TrajectoryRecord

    Raises
    ------
    InitConditionError
        ``u0`` already meets the stopping criterion.
    StoppingTimeout
        ``opts.T_max`` was reached first.
    StiffnessError
        The step size underflowed.
    """
    if not isinstance(f_delta, NoisyData):
        raise StructuralError("f_delta must be NoisyData (the noise level is required)")
    cert = certify(schedule, "eq28")
    if not cert.passed:
        raise StructuralError(f"schedule fails eq28 at t={cert.witness}: {cert.reason}")
    delta = f_delta.delta
    target = rule.target(delta)
    u0 = _validate_u(u0, operator, "u0")
    w = operator.weights
    F = operator.func
    f = f_delta.f_delta.coords
    ub = np.zeros(operator.dimension) if ubar is None else _validate_u(ubar, operator, "ubar").coords
    a_of = schedule.value
    nevals = 0

    def wn(x):
        return math.sqrt(float(np.dot(w * x, x)))

    def full(t, u):
        nonlocal nevals
        nevals += 1
        Fu = F(u)
        k = -(Fu + a_of(t) * (u - ub) - f)
        return k, Fu

    def field_(t, u):
        return full(t, u)[0]

    t = 0.0
    u = u0.coords.copy()
    k, Fu = full(t, u)
    disc = wn(Fu - f)
    if not disc > target:
        raise InitConditionError(
            f"||F(u0) - f_delta|| = {disc:.6g} does not exceed C delta^zeta = {target:.6g}",
            disc, target)

    T, Us, D, A, H = [t], [u.copy()], [disc], [float(a_of(t))], [wn(k)]
    if opts.h0 is not None:
        h = opts.h0
    else:
        sc = opts.atol + opts.rtol * np.abs(u)
        d0 = np.max(np.abs(u) / sc)
        d1 = np.max(np.abs(k) / sc)
        h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        h = min(h, 1e-2)
    err_prev = 1.0
    rejected = 0
    steps = 0
    stop = None
    while True:
        if t >= opts.T_max:
            break
        if steps >= opts.max_steps:
            break
        h = min(h, opts.T_max - t)
        if h < 1e-14 * max(1.0, t):
            rec = _record(T, Us, D, A, H, w, target, delta, ubar, rejected, nevals)
            raise StiffnessError(f"step size underflow at t={t:.6g}", rec, t)
        u_new, err = merson_step(field_, t, u, k, h)
        sc = opts.atol + opts.rtol * np.maximum(np.abs(u), np.abs(u_new))
        en = float(np.max(np.abs(err) / sc))
        if not np.isfinite(en):
            h *= 0.2
            rejected += 1
            continue
        if en > 1.0:
            h *= max(0.2, opts.safety * en ** -0.25)
            rejected += 1
            continue
        t_new = t + h
        k_new, Fu_new = full(t_new, u_new)
        disc_new = wn(Fu_new - f)
        steps += 1
        if disc_new <= target:
            stop = _locate(full, wn, f, target, rule, t, u, k, disc, t_new, u_new, k_new, disc_new)
            break
        T.append(t_new)
        Us.append(u_new.copy())
        D.append(disc_new)
        A.append(float(a_of(t_new)))
        H.append(wn(k_new))
        en = max(en, 1e-10)
        fac = opts.safety * en ** (-0.7 / 4) * err_prev ** (0.4 / 4)
        h *= min(5.0, max(0.2, fac))
        err_prev = en
        t, u, k, disc = t_new, u_new, k_new, disc_new

    if stop is None:
        rec = _record(T, Us, D, A, H, w, target, delta, ubar, rejected, nevals)
        raise StoppingTimeout(
            f"no crossing of C delta^zeta = {target:.6g} before T_max = {opts.T_max:.6g}"
            f" (final discrepancy {disc:.6g})", rec, disc)
    ts, us, ks, ds = stop
    T.append(ts)
    Us.append(us)
    D.append(ds)
    A.append(float(a_of(ts)))
    H.append(wn(ks))
    rec = _record(T, Us, D, A, H, w, target, delta, ubar, rejected, nevals)
    rec.t_delta = ts
    rec.u_at_stop = HVector(us, w)
    rec.stopped = True
    log.info("stopped at t_delta=%.6g after %d steps (%d rejected)", ts, steps, rejected)
    return rec


def _locate(full, wn, f, target, rule, t0, u0, k0, d0, t1, u1, k1, d1):
    """Bisection for the first crossing inside one accepted step."""
    best = (abs(d1 - target), t1, u1, k1, d1)
    lo, hi = t0, t1
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        um = hermite(t0, u0, k0, t1, u1, k1, mid)
        km, Fm = full(mid, um)
        dm = wn(Fm - f)
        if abs(dm - target) < best[0]:
            best = (abs(dm - target), mid, um, km, dm)
        if abs(dm - target) <= rule.match_rtol * target:
            break
        if dm > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rule.crossing_tol * (1.0 + hi):
            break
    return best[1], best[2], best[3], best[4]


def _record(T, Us, D, A, H, w, target, delta, ubar, rejected, nevals):
    return TrajectoryRecord(np.array(T), np.array(Us), np.array(D), np.array(A), np.array(H),
                            w, target, delta, ubar=ubar, n_rejected=rejected, n_evals=nevals)


def integrate(operator, schedule, f_delta, u0, rule=StopRule(), opts=IntegratorOptions()):
    """Run ``u' = -(F(u) + a(t) u - f_delta)`` until the discrepancy principle fires.

    See :func:`integrate_shifted` for parameters and errors.
    """
    return integrate_shifted(operator, schedule, f_delta, u0, None, rule, opts)


@dataclass
class InitCertificate:
    """Which initialization conditions hold for a given ``u0``.

    ``report`` holds the measured sides of the three initialization
    conditions as checks named ``eq29``, ``eq48`` and ``eq49``; ``p_ceiling`` is
    ``1 - q/(1 - 2q)``.
    """

    report: AuditReport
    p: float
    q: float
    theta: float
    p_ceiling: float
    p_admissible: bool
    theta_admissible: bool
    schedule_eq46: bool
    V0: HVector | None = None

    @property
    def checks(self):
        return {c.name: c for c in self.report.checks}

    def holds(self, name):
        return self.checks[name].passed

    def summary(self):
        return " ".join(f"{c.name}:{'ok' if c.passed else 'no'}" for c in self.report.checks)


def check_init(operator, schedule, f_delta, u0, rule=StopRule(), p=0.4, q=0.25,
               theta=1.0, ubar=None):
    """Report the initialization conditions of the stopping-time theorems.

    Conditions ``eq48`` and ``eq49`` only matter for the claim that the
    stopping time diverges as ``delta -> 0``; this function never raises on
    them.  For a shifted flow the regularized solution is that of
    ``F(V) + a (V - ubar) = f_delta`` and the right side of ``eq48`` uses
    ``||V(0) - ubar||``.
    """
    if not isinstance(f_delta, NoisyData):
        raise StructuralError("f_delta must be NoisyData")
    u0 = _validate_u(u0, operator, "u0")
    w = operator.weights
    delta = f_delta.delta
    fd = f_delta.f_delta
    ub = np.zeros(operator.dimension) if ubar is None else _validate_u(ubar, operator, "ubar").coords
    a0 = float(schedule.value(0.0))
    F0 = operator.func(u0.coords)

    def wn(x):
        return float(np.sqrt(np.dot(w * x, x)))

    tgt = rule.C * delta ** rule.zeta
    rep = AuditReport("initialization conditions")
    disc = wn(F0 - fd.coords)
    rep.add("eq29", disc > tgt > delta, disc, tgt,
            detail=f"||F(u0)-f_delta|| > C delta^zeta > delta (delta={delta:.3g})")
    rhs_data = HVector(fd.coords + a0 * ub, w)
    V0 = solve_regularized(operator, a0, rhs_data, delta=delta).V
    h0 = wn(F0 + a0 * (u0.coords - ub) - fd.coords)
    rhs48 = p * a0 * wn(V0.coords - ub)
    rep.add("eq48", h0 <= rhs48, h0, rhs48, detail=f"p={p:g}")
    rhs49 = theta * delta ** rule.zeta
    rep.add("eq49", h0 <= rhs49, h0, rhs49, detail=f"theta={theta:g}")
    if not 0.0 < q < 0.5:
        raise StructuralError("q must lie in (0, 1/2)")
    ceiling = 1.0 - q / (1.0 - 2.0 * q)
    try:
        eq46 = certify(schedule, "eq46_q", q).passed
    except StructuralError:
        eq46 = False
    return InitCertificate(rep, p, q, theta, ceiling, 0.0 < p < ceiling,
                           0.0 <= theta < rule.C, eq46, V0)
