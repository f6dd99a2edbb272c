"""Problem definition and the dense trajectory shared by the solver and analyses.

A pantograph problem is ``x'(t) = F(x(q t))`` with ``0 < q < 1`` and a base
point ``a >= 0``.  For ``a > 0`` the solution is prescribed on ``[q a, a]`` by
an initial profile ``eta``; for ``a = 0`` the history collapses to the single
value ``x(0) = x0``.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field as dc_field
from typing import Callable, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    DomainError,
    InversionBracketError,
    NotInvertibleError,
    ValidationError,
)

__all__ = [
    "Field",
    "Degenerate",
    "Profile",
    "Problem",
    "PiecewiseHermite",
    "StepRecord",
    "Trajectory",
    "trajectory_eval",
    "trajectory_deriv",
    "breakpoints",
    "field_invert",
    "hermite_value",
    "hermite_slope",
]

INVERSION_TOL = 1e-12
INVERSION_MAX_ITER = 200

ScalarFn = Callable[[float], float]


# -- cubic Hermite on one interval -------------------------------------------

def hermite_value(t, t0, t1, x0, x1, d0, d1):
    """Cubic Hermite interpolant through (t0, x0, d0) and (t1, x1, d1).

    Written in the basis-function form so that ``t == t0`` returns ``x0`` and
    ``t == t1`` returns ``x1`` bit for bit.
    """
    h = t1 - t0
    s = (t - t0) / h
    s2 = s * s
    s3 = s2 * s
    h00 = 2.0 * s3 - 3.0 * s2 + 1.0
    h01 = -2.0 * s3 + 3.0 * s2
    h10 = s3 - 2.0 * s2 + s
    h11 = s3 - s2
    return h00 * x0 + h01 * x1 + h * (h10 * d0 + h11 * d1)


def hermite_slope(t, t0, t1, x0, x1, d0, d1):
    """Derivative of :func:`hermite_value` with respect to ``t``."""
    h = t1 - t0
    s = (t - t0) / h
    s2 = s * s
    g00 = 6.0 * s2 - 6.0 * s
    g10 = 3.0 * s2 - 4.0 * s + 1.0
    g11 = 3.0 * s2 - 2.0 * s
    return g00 * (x0 - x1) / h + g10 * d0 + g11 * d1


class PiecewiseHermite:
    """C1 piecewise cubic Hermite interpolant over ascending knots.

    Accepts scalars or arrays.  Outside ``[knots[0], knots[-1]]`` a
    :class:`DomainError` is raised.
    """

    def __init__(self, knots, values, slopes):
        self.knots = np.asarray(knots, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.slopes = np.asarray(slopes, dtype=float)
        n = self.knots.size
        if n < 2 or self.values.size != n or self.slopes.size != n:
            raise ValidationError("need at least two knots with matching values and slopes")
        if not np.all(np.diff(self.knots) > 0):
            raise ValidationError("knots must be strictly increasing")
        self._knot_list = self.knots.tolist()
        self._value_list = self.values.tolist()
        self._slope_list = self.slopes.tolist()

    @property
    def domain(self) -> Tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    def _index(self, t: float) -> int:
        lo, hi = self._knot_list[0], self._knot_list[-1]
        if not lo <= t <= hi:
            raise DomainError(f"t={t!r} outside the interpolant domain [{lo!r}, {hi!r}]")
        i = bisect_right(self._knot_list, t) - 1
        return min(i, len(self._knot_list) - 2)

    def value(self, t: float) -> float:
        i = self._index(t)
        k, v, d = self._knot_list, self._value_list, self._slope_list
        return hermite_value(t, k[i], k[i + 1], v[i], v[i + 1], d[i], d[i + 1])

    def slope(self, t: float) -> float:
        i = self._index(t)
        k, v, d = self._knot_list, self._value_list, self._slope_list
        return hermite_slope(t, k[i], k[i + 1], v[i], v[i + 1], d[i], d[i + 1])

    def _vectorized(self, t, fn):
        t_arr = np.asarray(t, dtype=float)
        if t_arr.ndim == 0:
            return fn(float(t_arr))
        lo, hi = self.domain
        if t_arr.size and (t_arr.min() < lo or t_arr.max() > hi):
            raise DomainError(f"samples outside the interpolant domain [{lo!r}, {hi!r}]")
        i = np.clip(np.searchsorted(self.knots, t_arr, side="right") - 1, 0, self.knots.size - 2)
        k, v, d = self.knots, self.values, self.slopes
        base = hermite_value if fn == self.value else hermite_slope
        return base(t_arr, k[i], k[i + 1], v[i], v[i + 1], d[i], d[i + 1])

    def __call__(self, t):
        return self._vectorized(t, self.value)

    def derivative(self, t):
        return self._vectorized(t, self.slope)


# -- field -------------------------------------------------------------------

def _horner(coeffs: Sequence[float]) -> ScalarFn:
    rev = tuple(reversed(coeffs))

    def poly(x):
        acc = 0.0
        for c in rev:
            acc = acc * x + c
        return acc

    return poly


@dataclass(frozen=True)
class Field:
    """The coefficient function ``F`` with the metadata reconstruction needs.

    ``kind`` is one of ``"linear"``, ``"affine"``, ``"polynomial"`` or
    ``"custom"``; ``params`` carries the defining numbers.  Build instances
    with the class-method constructors rather than directly.
    """

    evaluate: ScalarFn
    kind: str = "custom"
    params: Tuple[float, ...] = ()
    inverse: Optional[ScalarFn] = None
    monotone_bracket: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.monotone_bracket is not None:
            lo, hi = self.monotone_bracket
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValidationError(f"invalid monotone bracket {self.monotone_bracket!r}")

    def __call__(self, x):
        return self.evaluate(x)

    @classmethod
    def linear(cls, lam: float) -> "Field":
        lam = float(lam)
        inverse = (lambda y: y / lam) if lam != 0.0 else None
        return cls(lambda x: lam * x, "linear", (lam,), inverse)

    @classmethod
    def affine(cls, lam: float, c: float) -> "Field":
        lam, c = float(lam), float(c)
        inverse = (lambda y: (y - c) / lam) if lam != 0.0 else None
        return cls(lambda x: lam * x + c, "affine", (lam, c), inverse)

    @classmethod
    def constant(cls, c: float) -> "Field":
        return cls.affine(0.0, c)

    @classmethod
    def polynomial(cls, coeffs: Sequence[float], monotone_bracket=None, inverse=None) -> "Field":
        """``F(x) = sum(coeffs[i] * x**i)``."""
        coeffs = tuple(float(c) for c in coeffs)
        if not coeffs:
            raise ValidationError("polynomial field needs at least one coefficient")
        return cls(_horner(coeffs), "polynomial", coeffs, inverse, monotone_bracket)

    @classmethod
    def from_callable(cls, fn: ScalarFn, inverse=None, monotone_bracket=None) -> "Field":
        return cls(fn, "custom", (), inverse, monotone_bracket)

    @property
    def invertible(self) -> bool:
        return self.inverse is not None or self.monotone_bracket is not None


def field_invert(field: Field, y: float, tol: float = INVERSION_TOL,
                 max_iter: int = INVERSION_MAX_ITER) -> float:
    """Solve ``F(x) = y``.

    Uses the declared inverse when there is one, otherwise bisection on the
    monotone bracket until the bracket is narrower than ``tol * max(1, |x|)``.
    """
    if field.inverse is not None:
        return float(field.inverse(y))
    if field.monotone_bracket is None:
        raise NotInvertibleError(f"{field.kind} field declares neither an inverse nor a monotone bracket")
    lo, hi = field.monotone_bracket
    f_lo, f_hi = field(lo) - y, field(hi) - y
    if f_lo == 0.0:
        return float(lo)
    if f_hi == 0.0:
        return float(hi)
    if f_lo * f_hi > 0.0:
        raise InversionBracketError(
            f"y={y!r} is outside F([{lo!r}, {hi!r}]) = [{min(f_lo, f_hi) + y!r}, {max(f_lo, f_hi) + y!r}]"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = field(mid) - y
        if f_mid == 0.0:
            return mid
        if (f_mid < 0.0) == (f_lo < 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


# -- initial data ------------------------------------------------------------

@dataclass(frozen=True)
class Degenerate:
    """History collapsed to ``x(0) = x0``; only admissible with ``a = 0``."""

    x0: float


@dataclass(frozen=True)
class Profile:
    """Initial function ``eta`` on ``[q a, a]``.

    ``smoothness`` is the declared continuity class of ``eta``; it feeds the
    regularity ladder.  ``eta_deriv`` is optional for solving but required by
    reconstruction.
    """

    eta: ScalarFn
    eta_deriv: Optional[ScalarFn] = None
    smoothness: int = 0

    def __post_init__(self):
        if int(self.smoothness) != self.smoothness or self.smoothness < 0:
            raise ValidationError("smoothness must be a nonnegative integer")


InitialData = Union[Degenerate, Profile]


@dataclass(frozen=True)
class Problem:
    """One instance of ``x'(t) = F(x(q t))`` with its initial data."""

    q: float
    a: float
    field: Field
    initial: InitialData

    def __post_init__(self):
        q, a = self.q, self.a
        if not (math.isfinite(q) and 0.0 < q < 1.0):
            raise ValidationError(f"q must satisfy 0 < q < 1, got {q!r}")
        if not (math.isfinite(a) and a >= 0.0):
            raise ValidationError(f"a must be finite and >= 0, got {a!r}")
        if a == 0.0:
            if not isinstance(self.initial, Degenerate):
                raise ValidationError("a = 0 requires a degenerate initial condition")
            if not math.isfinite(self.initial.x0):
                raise ValidationError("x0 must be finite")
        else:
            if not isinstance(self.initial, Profile):
                raise ValidationError("a > 0 requires an initial profile on [q a, a]")
            for t in np.linspace(q * a, a, 17):
                try:
                    v = float(self.initial.eta(float(t)))
                except (ArithmeticError, ValueError) as exc:
                    raise ValidationError(f"profile fails at t={float(t)!r}: {exc}") from exc
                if not math.isfinite(v):
                    raise ValidationError(f"profile is not finite at t={float(t)!r}")

    @property
    def degenerate(self) -> bool:
        return self.a == 0.0

    @property
    def history_start(self) -> float:
        """Left end of the region where values are known: ``q a``."""
        return self.q * self.a

    @classmethod
    def linear(cls, lam: float, q: float, x0: float) -> "Problem":
        """Degenerate linear problem ``x' = lam x(q t), x(0) = x0``."""
        return cls(q, 0.0, Field.linear(lam), Degenerate(float(x0)))

    def profile_value(self, t: float) -> float:
        return float(self.initial.eta(t))

    def profile_slope(self, t: float) -> float:
        """``eta'(t)``, by fourth-order finite differences if no derivative was given."""
        prof = self.initial
        if prof.eta_deriv is not None:
            return float(prof.eta_deriv(t))
        lo, hi = self.q * self.a, self.a
        h = 1e-3 * (hi - lo)
        # keep the 5-point stencil inside [lo, hi]
        if t - 2 * h < lo:
            f = [prof.eta(t + j * h) for j in range(5)]
            return (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
        if t + 2 * h > hi:
            f = [prof.eta(t - j * h) for j in range(5)]
            return -(-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
        return (prof.eta(t - 2 * h) - 8 * prof.eta(t - h) + 8 * prof.eta(t + h) - prof.eta(t + 2 * h)) / (12 * h)


def breakpoints(problem: Problem, t_max: float) -> list:
    """The ladder ``a q**-k`` for ``k = -1, 0, 1, ...`` inside ``[q a, t_max]``.

    Each rung is the previous one divided by ``q`` (one rounding per rung).
    Degenerate problems have no ladder and return ``[]``.
    """
    if problem.a == 0.0:
        return []
    out = [problem.q * problem.a] if problem.q * problem.a <= t_max else []
    b = problem.a
    while b <= t_max:
        out.append(b)
        b = b / problem.q
    return out


# -- trajectory --------------------------------------------------------------

class StepRecord(NamedTuple):
    t_lo: float
    t_hi: float
    x_lo: float
    x_hi: float
    d_lo: float
    d_hi: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Dense solution on ``[t_start, t_end]`` built from cubic Hermite steps.

    ``knots``, ``x`` and ``dx`` are parallel arrays; step ``i`` spans
    ``knots[i]..knots[i+1]``.  ``dx`` holds ``F(x(q t))`` at each knot, i.e.
    the right derivative (they coincide with the left one except at ``t = a``
    where the left derivative is the profile's).
    """

    problem: Problem
    knots: np.ndarray
    x: np.ndarray
    dx: np.ndarray
    segment_ends: Tuple[float, ...] = ()
    _dense: PiecewiseHermite = dc_field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_dense", PiecewiseHermite(self.knots, self.x, self.dx))

    @property
    def t_start(self) -> float:
        return float(self.knots[0])

    @property
    def t_end(self) -> float:
        return float(self.knots[-1])

    @property
    def domain(self) -> Tuple[float, float]:
        """Interval on which :func:`trajectory_eval` is defined (profile included)."""
        lo = self.problem.q * self.t_start if not self.problem.degenerate else self.t_start
        return lo, self.t_end

    @property
    def steps(self) -> list:
        k, x, d = self.knots, self.x, self.dx
        return [StepRecord(k[i], k[i + 1], x[i], x[i + 1], d[i], d[i + 1]) for i in range(k.size - 1)]

    def __call__(self, t):
        return trajectory_eval(self, t)

    def dense_slope(self, t):
        """Slope of the interpolant itself (not the equation); used for residual checks."""
        return self._dense.derivative(t)


def _check_domain(traj: Trajectory, t: float) -> None:
    lo, hi = traj.domain
    if not lo <= t <= hi:
        raise DomainError(f"t={t!r} outside the computed domain [{lo!r}, {hi!r}]")


def _eval_scalar(traj: Trajectory, t: float) -> float:
    _check_domain(traj, t)
    if t < traj.t_start:
        return traj.problem.profile_value(t)
    return traj._dense.value(t)


def trajectory_eval(traj: Trajectory, t):
    """``x(t)``: the profile on ``[q a, a)``, the Hermite steps beyond."""
    t_arr = np.asarray(t, dtype=float)
    if t_arr.ndim == 0:
        return _eval_scalar(traj, float(t_arr))
    return np.array([_eval_scalar(traj, float(s)) for s in t_arr.ravel()]).reshape(t_arr.shape)


def trajectory_deriv(traj: Trajectory, t: float, side: str = "right") -> float:
    """One-sided ``x'(t)``.

    Beyond the base point both sides equal ``F(x(q t))``.  Inside the profile
    region, and from the left at ``t = a``, the profile derivative is used.
    """
    if side not in ("left", "right"):
        raise ValidationError(f"side must be 'left' or 'right', got {side!r}")
    t = float(t)
    _check_domain(traj, t)
    prob = traj.problem
    if prob.degenerate:
        if t == traj.t_start and side == "left":
            raise DomainError("left derivative undefined at the degenerate start t = 0")
        return float(prob.field(_eval_scalar(traj, prob.q * t)))
    if t < prob.a or (t == prob.a and side == "left"):
        return prob.profile_slope(t)
    return float(prob.field(_eval_scalar(traj, prob.q * t)))
