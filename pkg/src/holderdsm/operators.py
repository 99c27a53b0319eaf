"""Monotone operators and a registry of desk-scale test problems.

Every problem ships with its exact data ``f`` and its minimal-norm solution
``y``.  The ground truth is built constructively: for linear problems ``y`` is
taken from the range of the (self-adjoint) matrix, so it is orthogonal to the
null space; nonlinear problems are strictly monotone and have a unique
solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import StructuralError
from .space import HVector, norm, uniform_weights

__all__ = [
    "MonotoneOperator",
    "MonotoneProblem",
    "NoisyData",
    "make_identity",
    "make_psd_linear",
    "make_pointwise_holder",
    "make_composite",
    "perturb",
    "check_monotone",
    "holder_ratio",
    "get_problem",
    "problem_labels",
]


@dataclass(frozen=True, eq=False)
class MonotoneOperator:
    """A monotone map on the weighted space.

    ``func`` acts on raw coordinate arrays; :meth:`apply` wraps it for
    :class:`HVector` arguments.  ``holder_exponent`` and ``holder_constant``
    are declared metadata (``holder_constant=None`` means unknown) and are
    never used by the solvers, neither is ``differentiable``.
    """

    func: object
    weights: np.ndarray
    holder_exponent: float = 1.0
    holder_constant: float | None = None
    holder_radius: float = 1.0
    differentiable: bool = True
    matrix: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.size < 1 or not np.all(w > 0):
            raise StructuralError("operator weights must be positive")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if not 0.0 < self.holder_exponent <= 1.0:
            raise StructuralError(
                f"holder exponent must lie in (0, 1], got {self.holder_exponent}")

    @property
    def dimension(self):
        return self.weights.size

    def __call__(self, x):
        return self.func(x)

    def apply(self, u):
        if u.n != self.dimension or not np.array_equal(u.weights, self.weights):
            raise StructuralError("argument does not live in the operator's space")
        return HVector(self.func(u.coords), self.weights)

    def vector(self, coords):
        return HVector(coords, self.weights)


@dataclass(frozen=True, eq=False)
class MonotoneProblem:
    """Operator plus exact data and minimal-norm solution.

    Parameters
    ----------
    operator : MonotoneOperator
    y : HVector
        Minimal-norm solution of ``F(u) = f``.
    f : HVector
        Exact data, ``F(y)``.
    label : str
    null_basis : ndarray, optional
        Columns form a weighted-orthonormal basis of ``{u : F(u + y) = f} - y``
        when that set is a subspace (linear problems).  ``None`` means the
        solution is unique.
    ubar : HVector, optional
        Anchor of the shifted flow.
    u0 : HVector, optional
        Suggested starting point for flows (defaults to zero).
    strictly_monotone : bool
    """

    operator: MonotoneOperator
    y: HVector
    f: HVector
    label: str = ""
    null_basis: np.ndarray | None = None
    ubar: HVector | None = None
    u0: HVector | None = None
    strictly_monotone: bool = False
    notes: str = ""

    def __post_init__(self):
        Fy = self.operator.apply(self.y)
        if norm(Fy - self.f) > 1e-12 * (1.0 + norm(self.f)):
            raise StructuralError("f does not equal F(y)")

    @property
    def n(self):
        return self.operator.dimension

    @property
    def weights(self):
        return self.operator.weights

    def nearest_solution(self, ubar):
        """Solution of ``F(u) = f`` closest to ``ubar``."""
        if ubar is None or self.null_basis is None or self.null_basis.shape[1] == 0:
            return self.y
        N = self.null_basis
        coeffs = N.T @ (self.weights * ubar.coords)
        return HVector(self.y.coords + N @ coeffs, self.weights)

    @property
    def ystar(self):
        return self.nearest_solution(self.ubar)

    def start(self):
        if self.u0 is not None:
            return self.u0
        return HVector(np.zeros(self.n), self.weights)

    def with_shift(self, ubar):
        return MonotoneProblem(self.operator, self.y, self.f, self.label,
                               self.null_basis, ubar, self.u0,
                               self.strictly_monotone, self.notes)


@dataclass(frozen=True, eq=False)
class NoisyData:
    """Noisy right-hand side with its noise level.

    If the exact data ``f`` is passed, ``||f_delta - f|| <= delta`` is enforced.
    """

    f_delta: HVector
    delta: float
    f: HVector | None = field(default=None, repr=False)
    seed: int | None = None

    def __post_init__(self):
        if not self.delta > 0:
            raise StructuralError(f"noise level must be positive, got {self.delta}")
        if self.f is not None:
            err = norm(self.f_delta - self.f)
            if err > self.delta * (1.0 + 1e-12) + 1e-14:
                raise StructuralError(
                    f"||f_delta - f|| = {err:.3e} exceeds delta = {self.delta:.3e}")


def _holder_constant(weights, alpha):
    # |s^a - t^a| <= 2^(1-a)|s-t|^a per component, then Jensen over the weights
    return 2.0 ** (1.0 - alpha) * float(np.sum(weights)) ** ((1.0 - alpha) / 2.0)


def _as_weights(n, weights):
    if weights is None:
        return np.ones(n)
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.size != n:
        raise StructuralError(f"expected {n} weights, got {w.size}")
    return w


def _as_vector(y, weights):
    if isinstance(y, HVector):
        if not np.array_equal(y.weights, weights):
            raise StructuralError("y has different weights than the operator")
        return y
    return HVector(y, weights)


def make_identity(n, y=None, weights=None, label="identity"):
    """Problem with ``F = I``; ``y`` defaults to all ones."""
    if n < 1:
        raise StructuralError(f"dimension must be >= 1, got {n}")
    w = _as_weights(n, weights)
    op = MonotoneOperator(lambda x: x.copy(), w, 1.0, 1.0, np.inf, True,
                          np.eye(n), "identity")
    y = _as_vector(np.ones(n) if y is None else y, w)
    return MonotoneProblem(op, y, op.apply(y), label, None,
                           strictly_monotone=True)


def _weighted_spectrum(matrix, weights):
    """Eigenpairs of ``A`` as a self-adjoint map in the weighted space.

    Returns eigenvalues and a weighted-orthonormal eigenbasis (columns).
    """
    s = np.sqrt(weights)
    B = (s[:, None] * matrix) / s[None, :]
    B = 0.5 * (B + B.T)
    lam, Q = np.linalg.eigh(B)
    return lam, Q / s[:, None]


def make_psd_linear(matrix, y, weights=None, label="psd", null_rtol=1e-12):
    """Linear monotone problem ``F(u) = A u``.

    ``A`` must be self-adjoint and positive semidefinite for the weighted
    inner product (for uniform weights: an ordinary symmetric PSD matrix).
    When ``A`` is singular, ``y`` must lie in its range, which makes it the
    minimal-norm solution; the null space is recorded on the problem.
    """
    A = np.array(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise StructuralError(f"matrix must be square, got shape {A.shape}")
    n = A.shape[0]
    w = _as_weights(n, weights)
    WA = w[:, None] * A
    scale = max(np.abs(WA).max(), 1e-300)
    if np.abs(WA - WA.T).max() > 1e-12 * scale:
        raise StructuralError("matrix is not self-adjoint in the weighted inner product")
    lam, E = _weighted_spectrum(A, w)
    rng = np.random.default_rng(12345)
    X = rng.standard_normal((n, 1000))
    rayleigh = np.einsum("ij,ij->j", X, WA @ X) / np.einsum("ij,ij->j", X, w[:, None] * X)
    if min(rayleigh.min(), lam.min()) < -1e-10 * max(1.0, lam.max()):
        raise StructuralError(
            f"matrix is not positive semidefinite (min eigenvalue {lam.min():.3e})")
    null_mask = lam <= null_rtol * max(lam.max(), 1e-300)
    N = E[:, null_mask]
    y = _as_vector(y, w)
    if N.shape[1]:
        comp = N.T @ (w * y.coords)
        if np.linalg.norm(comp) > 1e-10 * (1.0 + norm(y)):
            raise StructuralError("y has a null-space component; it is not minimal-norm")
    lip = float(max(lam.max(), 0.0))
    A.setflags(write=False)
    op = MonotoneOperator(lambda x: A @ x, w, 1.0, lip, np.inf, True, A, label)
    return MonotoneProblem(op, y, op.apply(y), label, N if N.shape[1] else None,
                           strictly_monotone=bool(lam.min() > null_rtol * lam.max()))


def _check_alpha(alpha, strict):
    if strict:
        if not 0.5 < alpha < 1.0:
            raise StructuralError(f"holder exponent must lie in (1/2, 1), got {alpha}")
    elif not 0.0 < alpha <= 1.0:
        raise StructuralError(f"holder exponent must lie in (0, 1], got {alpha}")


def _signed_power(alpha):
    def F(x):
        return np.sign(x) * np.abs(x) ** alpha
    return F


def make_pointwise_holder(n, alpha, y=None, weights=None, label=None, strict=True):
    """``F(u)_i = sign(u_i) |u_i|**alpha``.

    Monotone, globally Hölder of order ``alpha`` and not differentiable at
    zero.  ``strict=False`` admits exponents outside (1/2, 1) for exploratory
    use only.
    """
    _check_alpha(alpha, strict)
    if n < 1:
        raise StructuralError(f"dimension must be >= 1, got {n}")
    w = _as_weights(n, weights)
    F = _signed_power(alpha)
    op = MonotoneOperator(F, w, alpha, _holder_constant(w, alpha), np.inf, False,
                          None, "pointwise_holder")
    y = _as_vector(np.ones(n) if y is None else y, w)
    label = label or f"holder{int(round(alpha * 100)):03d}"
    return MonotoneProblem(op, y, op.apply(y), label, None, strictly_monotone=True)


def make_composite(matrix, alpha, y=None, weights=None, label="composite", strict=True):
    """``F(u) = A u + sign(u) |u|**alpha`` with ``A`` self-adjoint PSD.

    The pointwise term makes the sum strictly monotone, so the solution is
    unique.  The declared Hölder constant is valid on balls of radius 1.
    """
    _check_alpha(alpha, strict)
    A = np.array(matrix, dtype=float)
    n = A.shape[0]
    w = _as_weights(n, weights)
    # reuse the structural checks of the linear constructor
    lin = make_psd_linear(A, np.zeros(n), w, label="_")
    lip = lin.operator.holder_constant
    A.setflags(write=False)
    G = _signed_power(alpha)

    def F(x):
        return A @ x + G(x)

    radius = 1.0
    const = lip * (2.0 * radius) ** (1.0 - alpha) + _holder_constant(w, alpha)
    op = MonotoneOperator(F, w, alpha, const, radius, False, None, label)
    y = _as_vector(np.ones(n) if y is None else y, w)
    return MonotoneProblem(op, y, op.apply(y), label, None, strictly_monotone=True)


def perturb(f, delta, seed=None):
    """Noisy data at distance exactly ``delta`` from ``f``.

    The noise direction is a seeded standard-normal draw normalized in the
    weighted norm, so the same seed gives the same direction for every
    ``delta``.
    """
    if not delta > 0:
        raise StructuralError(f"noise level must be positive, got {delta}")
    if f.n == 1:
        e = np.ones(1)
    else:
        e = np.random.default_rng(seed).standard_normal(f.n)
    e = e / np.sqrt(np.dot(f.weights * e, e))
    f_delta = HVector(f.coords + delta * e, f.weights)
    return NoisyData(f_delta, float(delta), f, seed)


def check_monotone(operator, samples=1000, seed=0, scale=1.0, center=None):
    """Smallest sampled ``<F(u) - F(v), u - v>`` over random pairs.

    Returns the minimum; the operator is accepted as monotone when it is
    ``>= -1e-10``.
    """
    rng = np.random.default_rng(seed)
    n, w = operator.dimension, operator.weights
    c = np.zeros(n) if center is None else center.coords
    worst = np.inf
    for _ in range(samples):
        u = c + scale * rng.standard_normal(n)
        v = c + scale * rng.standard_normal(n)
        d = u - v
        worst = min(worst, float(np.dot(w * (operator(u) - operator(v)), d)))
    return worst


def holder_ratio(operator, center=None, radius=1.0, samples=1000, seed=0):
    """Largest sampled ``||F(u)-F(v)|| / ||u-v||**alpha`` over a ball."""
    rng = np.random.default_rng(seed)
    n, w = operator.dimension, operator.weights
    alpha = operator.holder_exponent
    c = np.zeros(n) if center is None else center.coords

    def draw():
        x = rng.standard_normal(n)
        x /= np.sqrt(np.dot(w * x, x))
        return c + radius * rng.uniform() ** (1.0 / n) * x

    worst = 0.0
    for _ in range(samples):
        u, v = draw(), draw()
        d = u - v
        nd = np.sqrt(np.dot(w * d, d))
        if nd == 0:
            continue
        dF = operator(u) - operator(v)
        worst = max(worst, np.sqrt(np.dot(w * dF, dF)) / nd ** alpha)
    return worst


# -- registry ----------------------------------------------------------------

def hilbert_kernel(n, weights=None):
    """``K_ij = w_j / (i + j - 1)`` (1-based), symmetrized."""
    w = uniform_weights(n) if weights is None else np.asarray(weights, float)
    i = np.arange(1, n + 1)
    K = w[None, :] / (i[:, None] + i[None, :] - 1.0)
    return 0.5 * (K + K.T)


def psd5_matrix():
    """Hilbert-like 5x5 kernel with its smallest eigenpair removed (rank 4)."""
    w = uniform_weights(5)
    K = hilbert_kernel(5, w)
    lam, E = _weighted_spectrum(K, w)
    e = E[:, 0]
    # deflate in the weighted geometry: K <- K - lam_min e (W e)^T
    return K - lam[0] * np.outer(e, w * e)


def _psd5():
    w = uniform_weights(5)
    A = psd5_matrix()
    x = (np.arange(5) + 0.5) / 5
    # y = A z for smooth z: a source-type condition, y in range(A)
    z = 10.0 * (1.0 + x)
    return make_psd_linear(A, A @ z, w, label="psd5")


def _psd2():
    return make_psd_linear(np.diag([1.0, 0.0]), [1.0, 0.0], label="psd2")


def _identity():
    w = uniform_weights(3)
    return make_identity(3, [1.0, -0.5, 0.75], w)


def _holder075():
    w = uniform_weights(6)
    y = np.array([0.9, -0.6, 0.4, -0.8, 0.7, -0.5])
    p = make_pointwise_holder(6, 0.75, y, w, label="holder075")
    # starting on the opposite side forces every component through the kink
    return MonotoneProblem(p.operator, p.y, p.f, p.label, u0=HVector(-0.5 * y, w),
                           strictly_monotone=True)


def _composite():
    w = uniform_weights(5)
    y = np.array([0.8, -0.5, 0.6, -0.7, 0.4])
    p = make_composite(psd5_matrix(), 0.75, y, w, label="composite")
    return MonotoneProblem(p.operator, p.y, p.f, p.label, u0=HVector(-0.5 * y, w),
                           strictly_monotone=True)


def _scalar():
    return make_identity(1, [1.0], label="scalar")


_REGISTRY = {
    "identity": _identity,
    "scalar": _scalar,
    "psd2": _psd2,
    "psd5": _psd5,
    "holder075": _holder075,
    "composite": _composite,
}


def problem_labels():
    return list(_REGISTRY)


def get_problem(label, ubar=None):
    """Build a registered problem by label, optionally with a shift anchor."""
    try:
        problem = _REGISTRY[label]()
    except KeyError:
        raise StructuralError(
            f"unknown problem {label!r}; known: {', '.join(_REGISTRY)}") from None
    if ubar is not None:
        if not isinstance(ubar, HVector):
            ubar = HVector(ubar, problem.weights)
        problem = problem.with_shift(ubar)
    return problem
