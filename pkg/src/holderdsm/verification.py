"""Numeric certifiers for the Gronwall-type and limit estimates.

Everything here is a report, never a gate: the hypotheses of the underlying
estimates involve limsups that cannot be checked on sampled data, so only
their conclusions are evaluated on computed trajectories and paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StructuralError
from .path import solve_regularized
from .report import AuditReport, Check
from .schedule import certify, damped_integral, phi_grid
from .space import HVector

__all__ = [
    "GronwallInstance",
    "gronwall_bound",
    "gronwall_check",
    "k_constant",
    "audit_limits",
    "audit_aux33",
    "audit_trajectory",
    "regularized_along",
]


@dataclass(frozen=True, eq=False)
class GronwallInstance:
    """Samples of ``g``, ``alpha`` and ``beta`` on an increasing grid."""

    grid: np.ndarray
    g: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        arrs = [np.asarray(x, float) for x in (self.grid, self.g, self.alpha, self.beta)]
        n = arrs[0].size
        if any(x.ndim != 1 or x.size != n for x in arrs) or n < 1:
            raise StructuralError("grid, g, alpha and beta must be 1-d of equal length")
        if np.any(np.diff(arrs[0]) <= 0):
            raise StructuralError("grid must be strictly increasing")
        for name, x in zip(("g", "alpha", "beta"), arrs[1:]):
            if np.any(x < 0):
                raise StructuralError(f"{name} must be non-negative")
        for name, x in zip(("grid", "g", "alpha", "beta"), arrs):
            object.__setattr__(self, name, x)


def _cumtrapz(x, y):
    return np.concatenate([[0.0], np.cumsum(0.5 * np.diff(x) * (y[1:] + y[:-1]))])


def gronwall_bound(inst):
    """``g(0) e^{-A(t)} + e^{-A(t)} int_0^t e^{A(s)} beta(s) ds`` with ``A = int alpha``.

    Trapezoidal rule on the instance grid, accumulated in log space.
    """
    A = _cumtrapz(inst.grid, inst.alpha)
    source = damped_integral(A, inst.grid, inst.beta)
    return inst.g[0] * np.exp(-A) + source


def gronwall_check(inst, tol=0.0):
    """Verify ``g <= bound * (1 + tol)`` at every grid point.

    Returns a :class:`Check` whose ``lhs`` is the worst ratio ``g / bound``,
    ``rhs`` the allowance ``1 + tol`` and ``witness`` the first violating time.
    """
    bound = gronwall_bound(inst)
    allowed = bound * (1.0 + tol)
    bad = inst.g > allowed
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bound > 0, inst.g / bound, np.where(inst.g > 0, np.inf, 0.0))
    witness = float(inst.grid[np.flatnonzero(bad)[0]]) if bad.any() else None
    return Check("gronwall", not bad.any(), float(ratio.max()), 1.0 + tol, witness)


def k_constant(schedule, T=None, dphi=0.02):
    """``1 + sup_t e^{-phi(t)} int_0^t e^{phi(s)} |a'(s)|/a(s) ds`` over ``[0, T]``."""
    T = schedule.T_max if T is None else T
    t = phi_grid(schedule, T, dphi)
    g = np.abs(schedule.derivative(t)) / schedule.value(t)
    return 1.0 + float(damped_integral(schedule.integral_phi(t), t, g).max())


def _path_arrays(path):
    if isinstance(path, tuple):
        t, psi = (np.asarray(x, float) for x in path)
    else:
        t = np.array([p.t for p in path], float)
        psi = np.array([p.psi for p in path], float)
    if t.size < 2 or np.any(np.diff(t) <= 0):
        raise StructuralError("path times must be increasing with at least two samples")
    return t, psi


def _tail_quantities(schedule, t_path, psi_path, t_end, dphi):
    t = np.union1d(phi_grid(schedule, t_end, dphi), t_path[t_path <= t_end])
    psi = np.interp(t, t_path, psi_path)
    return t, psi


def audit_limits(schedule, path, checkpoints, eps=0.1, dphi=0.02):
    """Tail behaviour of the schedule-dependent limits at checkpoints.

    Evaluates, at each checkpoint, ``phi(t)``, ``log(a(t)) + phi(t)``, the
    damped ratio ``e^{-phi} int e^{phi} |a'| psi`` (with ``psi = ||V_delta||``
    interpolated from ``path``), the ratio
    ``M(t) = int e^{phi}|a'| / (e^{phi} a)`` and the threshold time ``t_eps``
    after which ``e^{-phi} int e^{phi}|a'| < eps a`` on the grid.  Each check
    asserts monotone behaviour across the checkpoints.
    """
    cps = np.asarray(sorted(checkpoints), float)
    t_path, psi_path = _path_arrays(path)
    if cps[-1] > t_path[-1] * (1 + 1e-12):
        raise StructuralError("path does not reach the last checkpoint")
    t, psi = _tail_quantities(schedule, t_path, psi_path, cps[-1], dphi)
    phi = schedule.integral_phi(t)
    a = schedule.value(t)
    adot = np.abs(schedule.derivative(t))
    R_psi = damped_integral(phi, t, adot * psi)
    R_one = damped_integral(phi, t, adot)
    M = R_one / a
    idx = np.searchsorted(t, cps)
    rep = AuditReport("schedule limit audit")

    def decreasing(x):
        return bool(np.all(np.diff(x) < 0))

    def increasing(x):
        return bool(np.all(np.diff(x) > 0))

    phic = phi[idx]
    rep.add("phi increasing", increasing(phic), float(phic[0]), float(phic[-1]),
            detail="phi(t) at first/last checkpoint")
    grow = np.log(a[idx]) + phic
    rep.add("a e^phi increasing", increasing(grow), float(grow[0]), float(grow[-1]),
            detail="log a + phi at first/last checkpoint")
    if np.isfinite(schedule.T_max) and schedule.T_max >= cps[-1]:
        T = schedule.T_max
        lo = np.log(schedule.value(T / 2)) + schedule.integral_phi(T / 2)
        hi = np.log(schedule.value(T)) + schedule.integral_phi(T)
        rep.add("a e^phi increasing near T_max", hi > lo, float(lo), float(hi),
                detail="log a + phi at T_max/2 and T_max")
    rc = R_psi[idx]
    rep.add("damped ratio decreasing", decreasing(rc), float(rc[0]), float(rc[-1]),
            detail="e^-phi int e^phi |a'| psi")
    mc = M[idx]
    rep.add("M decreasing", decreasing(mc), float(mc[0]), float(mc[-1]),
            detail="int e^phi |a'| / (e^phi a)")
    ok = R_one < eps * a
    bad = np.flatnonzero(~ok)
    if bad.size == 0:
        t_eps = float(t[0])
    elif bad[-1] + 1 < t.size:
        t_eps = float(t[bad[-1] + 1])
    else:
        t_eps = None
    rep.add("t_eps exists", t_eps is not None, t_eps, float(cps[-1]),
            detail=f"eps={eps:g}")
    rep.values = {"t": cps, "phi": phic, "log_a_e_phi": grow, "damped_ratio": rc,
                  "M": mc, "t_eps": t_eps}
    return rep


def audit_aux33(schedule, q, path, tol=1e-8, dphi=0.02):
    """Check ``e^{-(1-q)phi} int e^{(1-q)phi} |a'| psi <= q/(1-2q) a psi`` at path samples.

    Raises
    ------
    StructuralError
        If the schedule is not certified for ``eq26_q`` with this ``q``.
    """
    cert = certify(schedule, "eq26_q", q)
    if not cert.passed:
        raise StructuralError(
            f"schedule is not certified for eq26 with q={q}: {cert.reason} (t={cert.witness})")
    t_path, psi_path = _path_arrays(path)
    coef = q / (1.0 - 2.0 * q)
    for attempt in range(2):
        t, psi = _tail_quantities(schedule, t_path, psi_path, t_path[-1], dphi)
        lhs_all = damped_integral((1.0 - q) * schedule.integral_phi(t), t,
                                  np.abs(schedule.derivative(t)) * psi)
        lhs = lhs_all[np.searchsorted(t, t_path)]
        rhs = coef * schedule.value(t_path) * psi_path
        margin = (rhs - lhs) / np.maximum(rhs, 1e-300)
        if margin[1:].min() >= 2 * tol or attempt == 1:
            break
        dphi /= 4
    bad = lhs > rhs * (1.0 + tol)
    rep = AuditReport(f"auxiliary inequality, q={q:g}")
    worst = int(np.argmax(lhs / np.maximum(rhs, 1e-300)))
    rep.add("auxiliary inequality", not bad.any(), float(lhs[worst]), float(rhs[worst]),
            float(t_path[np.flatnonzero(bad)[0]]) if bad.any() else None,
            detail=f"{t_path.size} samples, tol={tol:g}")
    rep.values = {"t": t_path, "lhs": lhs, "rhs": rhs}
    return rep


def regularized_along(operator, f_delta, times, a_values, ubar=None, tol=None):
    """Regularized solutions (shifted when ``ubar`` is given) at the given times."""
    w = operator.weights
    fd, delta = f_delta.f_delta, getattr(f_delta, "delta", None)
    ub = np.zeros(operator.dimension) if ubar is None else ubar.coords
    out = []
    V = None
    for t, a in zip(times, a_values):
        data = HVector(fd.coords + a * ub, w)
        p = solve_regularized(operator, float(a), data, tol, V, t=float(t), delta=delta)
        out.append(p)
        V = p.V
    return out


def audit_trajectory(operator, schedule, f_delta, record, q=0.25, slack=0.05,
                     y=None, K=None, norm_slack=0.05):
    """Audit a DSM trajectory against the analytic envelopes.

    Checks, at every recorded step:

    * ``h(t) <= e^{-(1-q)phi} h(0) + e^{-(1-q)phi} int e^{(1-q)phi}|a'| psi``
      (only when the schedule certifies ``eq26_q``),
    * ``||u - V_delta|| <= e^{-phi}||w(0)|| + e^{-phi} int e^{phi} |a'|/a psi``,
    * ``a ||u - V_delta|| <= h`` and ``||F(u) - F(V_delta)|| <= h``,
    * ``||u|| <= e^{-phi}||w(0)|| + K ||V_delta|| + norm_slack``,
    * the stopping clause (discrepancy above target before ``t_delta``),

    and, when ``y`` (the target solution) is given, the error decomposition at
    ``t_delta``.  For shifted runs all norms are taken relative to ``ubar``.
    """
    w = operator.weights
    ub = record.ubar
    ubc = np.zeros(operator.dimension) if ub is None else ub.coords
    T = record.times
    a = record.a
    pts = regularized_along(operator, f_delta, T, a, ub)
    Vs = np.array([p.V.coords for p in pts])
    tol_max = max(p.tol for p in pts)

    def rownorm(X):
        return np.sqrt(np.einsum("ij,ij->i", X * w, X))

    psi = rownorm(Vs - ubc)
    wdist = rownorm(record.U - Vs)
    FU = np.array([operator.func(u) for u in record.U])
    FV = np.array([operator.func(v) for v in Vs])
    dF = rownorm(FU - FV)
    h = record.h
    phi = schedule.integral_phi(T)
    adot = np.abs(schedule.derivative(T))
    rep = AuditReport("trajectory audit")

    def verdict(name, lhs, rhs, detail=""):
        ratio = lhs / np.maximum(rhs, 1e-300)
        bad = lhs > rhs
        i = int(np.argmax(ratio))
        rep.add(name, not bad.any(), float(lhs[i]), float(rhs[i]),
                float(T[np.flatnonzero(bad)[0]]) if bad.any() else None, detail)

    try:
        eq26 = certify(schedule, "eq26_q", q).passed
    except StructuralError:
        eq26 = False
    if eq26:
        env = h[0] * np.exp(-(1 - q) * phi) + damped_integral((1 - q) * phi, T, adot * psi)
        verdict("h bound", h, env * (1 + slack), f"q={q:g}, slack={slack:g}")
    else:
        rep.add("h bound", True, detail=f"skipped: schedule not certified for eq26 q={q:g}")
    env_w = wdist[0] * np.exp(-phi) + damped_integral(phi, T, adot / a * psi)
    verdict("w bound", wdist, env_w * (1 + slack) + 2 * tol_max / a, f"slack={slack:g}")
    verdict("a|u-V| <= h", a * wdist, h * (1 + slack) + 2 * tol_max)
    verdict("|F(u)-F(V)| <= h", dF, h * (1 + slack) + 2 * tol_max)
    Kc = k_constant(schedule) if K is None else K
    unorm = rownorm(record.U - ubc)
    verdict("norm bound", unorm, np.exp(-phi) * wdist[0] + Kc * psi + norm_slack,
            f"K={Kc:.6g}")
    if record.stopped:
        before = record.discrepancy[:-1]
        ok = bool(np.all(before > record.target))
        rep.add("stop clause", ok, float(before.min()) if before.size else None,
                record.target, detail="min discrepancy before t_delta vs target")
        if y is not None:
            td, at = record.t_delta, record.a[-1]
            f_exact = getattr(f_delta, "f", None)
            if f_exact is None:
                raise StructuralError("error chain needs the exact data on f_delta")
            V = solve_regularized(operator, float(at), HVector(f_exact.coords + at * ubc, w),
                                  delta=0.0).V
            u = record.U[-1]
            err = float(np.sqrt(np.dot(w * (u - y.coords), u - y.coords)))
            rhs = (wdist[-1] + f_delta.delta / at
                   + float(np.sqrt(np.dot(w * (V.coords - y.coords), V.coords - y.coords))))
            rep.add("error chain", err <= rhs + 4 * tol_max / at, err, rhs, td)
    rep.values = {"t": T, "psi": psi, "w": wdist, "h": h, "dF": dF}
    return rep
