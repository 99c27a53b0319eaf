"""Weighted finite-dimensional model of a real Hilbert space.

An :class:`HVector` carries its coordinates together with positive quadrature
weights; the inner product is ``<u, v> = sum_i w_i u_i v_i``.  With uniform
weights ``1/n`` a grid function reproduces the continuum L2 norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StructuralError

__all__ = ["HVector", "inner", "norm", "axpy", "zeros_like", "uniform_weights"]


def uniform_weights(n):
    """Quadrature weights ``1/n`` for an ``n``-point grid on [0, 1]."""
    if n < 1:
        raise StructuralError(f"dimension must be >= 1, got {n}")
    return np.full(n, 1.0 / n)


@dataclass(frozen=True, eq=False)
class HVector:
    """Element of the discretized Hilbert space.

    Parameters
    ----------
    coords : array_like
        Real coordinates, length ``n >= 1``.
    weights : array_like, optional
        Strictly positive quadrature weights of the same length.  Defaults to
        unit weights (plain Euclidean geometry).
    """

    coords: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float).reshape(-1)
        if coords.size < 1:
            raise StructuralError("HVector needs at least one coordinate")
        if self.weights is None:
            weights = np.ones_like(coords)
        else:
            weights = np.array(self.weights, dtype=float).reshape(-1)
        if weights.shape != coords.shape:
            raise StructuralError(
                f"coords has length {coords.size} but weights has length {weights.size}")
        if not np.all(weights > 0):
            raise StructuralError("weights must be strictly positive")
        if not np.all(np.isfinite(coords)):
            raise StructuralError("coords must be finite")
        coords.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self):
        return self.coords.size

    def like(self, coords):
        """New vector with these coordinates and this vector's weights."""
        return HVector(coords, self.weights)

    def __add__(self, other):
        return axpy(1.0, self, other)

    def __sub__(self, other):
        return axpy(-1.0, other, self)

    def __neg__(self):
        return self.like(-self.coords)

    def __mul__(self, scalar):
        return self.like(float(scalar) * self.coords)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, HVector):
            return NotImplemented
        return (np.array_equal(self.coords, other.coords)
                and np.array_equal(self.weights, other.weights))

    def __hash__(self):
        return hash((self.coords.tobytes(), self.weights.tobytes()))

    def __repr__(self):
        return f"HVector({self.coords.tolist()!r}, weights={self.weights.tolist()!r})"


def _check_compatible(u, v):
    if u.n != v.n:
        raise StructuralError(f"dimension mismatch: {u.n} vs {v.n}")
    if not np.array_equal(u.weights, v.weights):
        raise StructuralError("vectors live in spaces with different weights")


def inner(u, v):
    """Weighted inner product ``sum_i w_i u_i v_i``."""
    _check_compatible(u, v)
    return float(np.dot(u.weights * u.coords, v.coords))


def norm(u):
    """Norm induced by :func:`inner`."""
    return float(np.sqrt(np.dot(u.weights * u.coords, u.coords)))


def axpy(alpha, u, v):
    """Return ``alpha * u + v``; weights are carried over."""
    _check_compatible(u, v)
    return HVector(alpha * u.coords + v.coords, v.weights)


def zeros_like(u):
    return u.like(np.zeros(u.n))
