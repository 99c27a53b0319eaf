"""Regularizing schedules a(t) and their admissibility certificates.

The power family ``a(t) = d / (c + t)**b`` has closed forms for everything.
Sampled schedules are interpolated with a monotone cubic (PCHIP) so that the
derivative and the integral come from the same interpolant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import StructuralError

__all__ = ["Schedule", "ConditionCertificate", "certify", "phi_grid", "damped_integral"]

CONDITIONS = ("eq28", "eq26_q", "eq46_q")
_Q_CEILING = {"eq26_q": 0.5, "eq46_q": 1.0 / 3.0}


@dataclass(frozen=True, eq=False)
class Schedule:
    """Positive, decreasing regularizer ``a(t)``.

    Use :meth:`power` or :meth:`from_samples` rather than the raw constructor.
    ``T_max`` is the largest time the validators look at.
    """

    kind: str = "power"
    d: float = 3.0
    c: float = 1.0
    b: float = 0.5
    T_max: float = 1e6
    times: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind == "power":
            if not (self.d > 0 and self.c > 0):
                raise StructuralError("power schedule needs d > 0 and c > 0")
            if not 0.0 < self.b < 1.0:
                raise StructuralError(f"power schedule needs b in (0, 1), got {self.b}")
        elif self.kind == "custom-sampled":
            t = np.asarray(self.times, float)
            a = np.asarray(self.values, float)
            if t.ndim != 1 or t.shape != a.shape or t.size < 2:
                raise StructuralError("need matching 1-d arrays of at least two samples")
            if t[0] != 0.0 or np.any(np.diff(t) <= 0):
                raise StructuralError("sample times must start at 0 and increase")
            if np.any(a <= 0) or np.any(np.diff(a) >= 0):
                raise StructuralError("sampled values must be positive and decreasing")
            interp = PchipInterpolator(t, a, extrapolate=False)
            object.__setattr__(self, "_interp", interp)
            object.__setattr__(self, "_dinterp", interp.derivative())
            object.__setattr__(self, "_iinterp", interp.antiderivative())
            object.__setattr__(self, "T_max", float(t[-1]))
        else:
            raise StructuralError(f"unknown schedule kind {self.kind!r}")
        if not self.T_max > 0:
            raise StructuralError("T_max must be positive")

    @classmethod
    def power(cls, d=3.0, c=1.0, b=0.5, T_max=1e6):
        return cls("power", float(d), float(c), float(b), float(T_max))

    @classmethod
    def from_samples(cls, times, values):
        return cls("custom-sampled", times=np.asarray(times, float),
                   values=np.asarray(values, float))

    def _check_t(self, t):
        if np.any(np.asarray(t) < 0):
            raise StructuralError("schedule evaluated at negative time")
        if self.kind != "power" and np.any(np.asarray(t) > self.T_max):
            raise StructuralError("sampled schedule evaluated beyond its last sample")

    def value(self, t):
        """``a(t)``."""
        self._check_t(t)
        if self.kind == "power":
            return self.d / (self.c + t) ** self.b
        return self._interp(t)[()]

    def derivative(self, t):
        """``a'(t)`` (negative)."""
        self._check_t(t)
        if self.kind == "power":
            return -self.b * self.d / (self.c + t) ** (self.b + 1.0)
        return self._dinterp(t)[()]

    def integral_phi(self, t):
        """``phi(t) = int_0^t a(s) ds``."""
        self._check_t(t)
        if self.kind == "power":
            e = 1.0 - self.b
            return self.d * ((self.c + t) ** e - self.c ** e) / e
        return self._iinterp(t)[()]

    def inverse_phi(self, phi):
        """Time at which :meth:`integral_phi` reaches ``phi``."""
        phi = np.asarray(phi, float)
        if self.kind == "power":
            e = 1.0 - self.b
            return (self.c ** e + phi * e / self.d) ** (1.0 / e) - self.c
        t = np.concatenate([[0.0], np.geomspace(1e-9 * self.T_max, self.T_max, 20000)])
        return np.interp(phi, self.integral_phi(t), t)

    def ratio(self, t):
        """``|a'(t)| / a(t)**2``."""
        if self.kind == "power":
            self._check_t(t)
            return (self.b / self.d) * (self.c + t) ** (self.b - 1.0)
        return np.abs(self.derivative(t)) / self.value(t) ** 2

    def __repr__(self):
        if self.kind == "power":
            return f"Schedule.power(d={self.d!r}, c={self.c!r}, b={self.b!r}, T_max={self.T_max!r})"
        return f"Schedule.from_samples(<{self.times.size} samples on [0, {self.T_max}]>)"


@dataclass(frozen=True)
class ConditionCertificate:
    condition_id: str
    q: float | None
    passed: bool
    witness: float | None = None
    reason: str = ""

    def __bool__(self):
        return self.passed


def _grid(s, resolution):
    if s.kind == "power":
        lo = 1e-6 * s.c
    else:
        lo = 1e-6 * s.times[1]
    t = np.concatenate([[0.0], np.geomspace(lo, s.T_max, resolution)])
    if s.kind != "power":
        t = np.union1d(t, s.times)
    return t


def _first_violation(t, bad):
    idx = np.flatnonzero(bad)
    return None if idx.size == 0 else float(t[idx[0]])


def certify(s, condition_id, q=None, resolution=2000):
    """Check one admissibility condition on a dense grid over ``[0, T_max]``.

    ``eq28``: ``a > 0`` decreasing and ``|a'|/a^2 > 0`` decreasing.
    ``eq26_q`` / ``eq46_q``: additionally ``|a'|/a^2 < q`` with ``q`` in
    (0, 1/2) resp. (0, 1/3); for power schedules the closed-form bound
    ``d > b c**(b-1) / q`` is checked as well.
    """
    if condition_id not in CONDITIONS:
        raise StructuralError(f"unknown condition {condition_id!r}")
    if condition_id != "eq28":
        if q is None:
            raise StructuralError(f"{condition_id} requires q")
        if not 0.0 < q < _Q_CEILING[condition_id]:
            raise StructuralError(
                f"q must lie in (0, {_Q_CEILING[condition_id]:.4g}) for {condition_id}")
    t = _grid(s, resolution)
    a = s.value(t)
    r = s.ratio(t)

    def fail(where, reason):
        return ConditionCertificate(condition_id, q, False, where, reason)

    w = _first_violation(t, a <= 0)
    if w is not None:
        return fail(w, "a(t) not positive")
    w = _first_violation(t[1:], np.diff(a) >= 0)
    if w is not None:
        return fail(w, "a(t) not strictly decreasing")
    w = _first_violation(t, r <= 0)
    if w is not None:
        return fail(w, "|a'|/a^2 not positive")
    w = _first_violation(t[1:], np.diff(r) >= 0)
    if w is not None:
        return fail(w, "|a'|/a^2 not strictly decreasing")
    if condition_id != "eq28":
        w = _first_violation(t, r >= q)
        if w is not None:
            return fail(w, f"|a'|/a^2 >= q = {q}")
        if s.kind == "power":
            bound = s.b * s.c ** (s.b - 1.0) / q
            if not s.d > bound:
                return fail(0.0, f"d = {s.d} <= b c^(b-1)/q = {bound:.6g}")
    return ConditionCertificate(condition_id, q, True)


def phi_grid(s, t_end, dphi=0.02, per_decade=64):
    """Time grid on ``[0, t_end]`` on which ``phi`` moves by at most ``dphi``.

    Geometric points are merged in so that the early transient (where ``a``
    is nearly constant but ``a'`` varies on the scale of ``c``) is resolved.
    """
    if t_end <= 0:
        return np.array([0.0])
    phi_end = float(s.integral_phi(t_end))
    m = max(int(math.ceil(phi_end / dphi)), 1)
    by_phi = s.inverse_phi(np.linspace(0.0, phi_end, m + 1))
    lo = 1e-6 * (s.c if s.kind == "power" else max(s.times[1], 1e-12))
    decades = max(math.log10(t_end / lo), 1.0) if t_end > lo else 1.0
    geo = np.geomspace(lo, t_end, int(decades * per_decade) + 2) if t_end > lo else []
    t = np.union1d(np.clip(by_phi, 0.0, t_end), geo)
    return np.union1d(t, [0.0, t_end])


def damped_integral(phi, t, g, kappa=1.0):
    """``exp(-k phi(t_i)) * int_0^{t_i} exp(k phi(s)) g(s) ds`` on a grid.

    ``phi`` holds the exponent samples (for instance ``integral_phi(t)``),
    ``g >= 0`` the integrand samples.  Trapezoidal rule accumulated in log
    space, so ``exp(phi)`` never has to be formed.
    """
    t = np.asarray(t, float)
    phi = kappa * np.asarray(phi, float)
    g = np.asarray(g, float)
    with np.errstate(divide="ignore"):
        logG = phi + np.log(g)
        half = np.log(0.5 * np.diff(t))
    pieces = half + np.logaddexp(logG[:-1], logG[1:])
    logI = np.concatenate([[-np.inf], np.logaddexp.accumulate(pieces)])
    return np.exp(logI - phi)
