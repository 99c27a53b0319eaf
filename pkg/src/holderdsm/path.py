"""The regularized equation ``F(V) + a V = f_delta`` and its path in ``t``.

``G(V) = F(V) + a V`` is strongly monotone with modulus ``a`` whenever ``F`` is
monotone, so the damped iteration ``V <- V - lam (G(V) - f_delta)`` contracts
for small enough ``lam``.  Plain damping is hopeless once ``a`` is small
compared to the Lipschitz scale of ``F``, so the iteration is accelerated by
Anderson mixing; the damped step with backtracking stays as the safeguard.
No derivative of ``F`` is ever formed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergenceError, StructuralError
from .operators import NoisyData
from .space import HVector

__all__ = [
    "PathPoint",
    "default_tolerance",
    "solve_regularized",
    "direct_solve",
    "sample_path",
    "noiseless_path",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PathPoint:
    """Solution of the regularized equation at one value of ``a``.

    ``phi_d = a * psi`` equals ``||F(V) - f_delta||`` up to the solver
    residual; ``discrepancy`` is the measured value of the latter.
    """

    t: float | None
    a: float
    V: HVector
    psi: float
    phi_d: float
    residual: float
    discrepancy: float
    tol: float
    iterations: int = 0


def default_tolerance(a, delta=None):
    """``min(1e-10, 1e-3 a delta)`` for noisy data, floored at ``1e-13``."""
    if delta is None or delta <= 0:
        return 1e-10
    return max(1e-13, min(1e-10, 1e-3 * a * delta))


def _unpack(f_delta):
    if isinstance(f_delta, NoisyData):
        return f_delta.f_delta, f_delta.delta
    return f_delta, None


def _lipschitz_estimate(F, x, w, rng, probes=3):
    F0 = F(x)
    eps = 1e-3 * (1.0 + np.sqrt(np.dot(w * x, x)))
    best = 0.0
    for _ in range(probes):
        d = rng.standard_normal(x.size)
        d *= eps / np.sqrt(np.dot(w * d, d))
        dF = F(x + d) - F0
        best = max(best, np.sqrt(np.dot(w * dF, dF)) / eps)
    return best


def _solve(F, w, a, f, tol, x0, max_iter, depth):
    """Anderson-accelerated damped fixed point on raw arrays.

    Returns ``(x, residual_norm, iterations)``.
    """
    n = f.size
    sw = np.sqrt(w)

    def R(x):
        return F(x) + a * x - f

    def wn(r):
        return float(np.sqrt(np.dot(w * r, r)))

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = R(x)
    rn = wn(r)
    if rn <= tol:
        return x, rn, 0
    L = _lipschitz_estimate(F, x, w, np.random.default_rng(0))
    lam = a / (a + L) ** 2
    dX, dR = [], []
    best = (rn, x)
    for it in range(1, max_iter + 1):
        cand = None
        if dX:
            DX = np.column_stack(dX)
            DR = np.column_stack(dR)
            gamma = np.linalg.lstsq(sw[:, None] * DR, sw * r, rcond=None)[0]
            xa = x - lam * r - (DX - lam * DR) @ gamma
            ra = R(xa)
            rna = wn(ra)
            if np.isfinite(rna) and rna < rn:
                cand = (xa, ra, rna)
            else:
                dX, dR = [], []
        if cand is None:
            # plain damped step with backtracking on the residual norm
            for _ in range(80):
                xd = x - lam * r
                rd = R(xd)
                rnd = wn(rd)
                if np.isfinite(rnd) and rnd < rn:
                    cand = (xd, rd, rnd)
                    lam *= 1.1
                    break
                lam *= 0.5
            else:
                raise NonConvergenceError(
                    f"damped step found no descent (a={a:.3e}, residual={rn:.3e})",
                    best[0], best[1])
        xn, rn_vec, rnn = cand
        dX.append(xn - x)
        dR.append(rn_vec - r)
        if len(dX) > depth:
            dX.pop(0)
            dR.pop(0)
        x, r, rn = xn, rn_vec, rnn
        if rn < best[0]:
            best = (rn, x)
        if rn <= tol:
            return x, rn, it
    raise NonConvergenceError(
        f"no convergence in {max_iter} iterations (a={a:.3e}, best residual={best[0]:.3e},"
        f" tol={tol:.1e})", best[0], best[1])


def solve_regularized(operator, a, f_delta, tol=None, V_init=None, *, t=None,
                      delta=None, max_iter=5000, depth=None):
    """Solve ``F(V) + a V = f_delta`` to residual ``tol``.

    Parameters
    ----------
    operator : MonotoneOperator
    a : float
        Regularization parameter, ``a > 0``.
    f_delta : HVector or NoisyData
    tol : float, optional
        Residual tolerance; defaults to :func:`default_tolerance`.
    V_init : HVector, optional
        Warm start.
    t : float, optional
        Only recorded on the returned point.
    delta : float, optional
        Noise level used for the default tolerance (taken from ``f_delta``
        when it is a :class:`NoisyData`).

    Raises
    ------
    NonConvergenceError
        When the iteration budget is exhausted; carries the best residual.
    """
    f_vec, d = _unpack(f_delta)
    delta = d if delta is None else delta
    if not a > 0:
        raise StructuralError(f"regularization parameter must be positive, got {a}")
    if tol is None:
        tol = default_tolerance(a, delta)
    if not tol > 0:
        raise StructuralError("tolerance must be positive")
    w = operator.weights
    if f_vec.n != operator.dimension or not np.array_equal(f_vec.weights, w):
        raise StructuralError("data does not live in the operator's space")
    depth = min(operator.dimension, 20) if depth is None else depth
    x0 = None if V_init is None else V_init.coords
    x, rn, its = _solve(operator.func, w, float(a), f_vec.coords, tol, x0, max_iter, depth)
    psi = float(np.sqrt(np.dot(w * x, x)))
    Fr = operator.func(x) - f_vec.coords
    disc = float(np.sqrt(np.dot(w * Fr, Fr)))
    return PathPoint(t, float(a), HVector(x, w), psi, float(a) * psi, rn, disc, tol, its)


def direct_solve(matrix, a, f_delta):
    """Dense solve of ``(A + a I) V = f_delta`` for linear problems."""
    f_vec, _ = _unpack(f_delta)
    A = np.asarray(matrix, float)
    x = np.linalg.solve(A + a * np.eye(A.shape[0]), f_vec.coords)
    return HVector(x, f_vec.weights)


def sample_path(operator, schedule, f_delta, times, tol=None, *, delta=None,
                max_iter=5000):
    """Regularized solutions at increasing times, warm-started in sequence.

    ``tol`` may be a float or ``None``; ``None`` picks
    :func:`default_tolerance` per point.
    """
    f_vec, d = _unpack(f_delta)
    delta = d if delta is None else delta
    times = np.asarray(times, float)
    if times.ndim != 1 or times.size == 0:
        raise StructuralError("times must be a non-empty 1-d sequence")
    if np.any(times < 0) or np.any(np.diff(times) <= 0):
        raise StructuralError("times must be non-negative and increasing")
    F0 = operator.func(np.zeros(operator.dimension)) - f_vec.coords
    if np.sqrt(np.dot(operator.weights * F0, F0)) == 0.0:
        raise StructuralError("||F(0) - f_delta|| = 0: the path is identically zero")
    out = []
    V = None
    for ti in times:
        a = float(schedule.value(ti))
        try:
            p = solve_regularized(operator, a, f_vec, tol, V, t=float(ti), delta=delta,
                                  max_iter=max_iter)
        except NonConvergenceError as exc:
            raise NonConvergenceError(f"at t={ti:.6g}: {exc}", exc.best_residual,
                                      exc.best_iterate) from exc
        out.append(p)
        V = p.V
    return out


def noiseless_path(operator, schedule, f, times, tol=None, **kw):
    """:func:`sample_path` with exact data (``delta = 0``)."""
    f_vec, _ = _unpack(f)
    return sample_path(operator, schedule, f_vec, times, tol, delta=0.0, **kw)
