"""Backward extension of a solution to the left of ``q a``.

On ``[q**2 a, q a]`` the equation can be read backwards as
``x(t) = F^-1(eta'(t / q))``.  This needs a C1 profile, the junction
condition ``eta'(a) = F(eta(q a))`` and an invertible field.  Repeating the
map one interval further to the left needs the derivative of the previous
reconstruction, which is taken numerically; every extra level costs roughly
half of the remaining significant digits.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field
from typing import List, Optional

import numpy as np

from .core import Field, PiecewiseHermite, Problem, Profile, field_invert
from .errors import (
    CompatibilityError,
    DomainError,
    MissingDerivativeError,
    NotInvertibleError,
    ValidationError,
)

__all__ = [
    "COMPAT_TOL",
    "ReconstructedSegment",
    "IteratedReconstruction",
    "check_compatibility",
    "reconstruct_one",
    "reconstruct_iterated",
    "fd_slopes",
]

log = logging.getLogger(__name__)

COMPAT_TOL = 1e-8
SAMPLES = 4 * 64


def fd_slopes(t: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Fourth-order derivative estimates on a uniform grid.

    Central 5-point stencil inside, one-sided stencils over offsets 0..4 at
    the two ends on each side.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    n = v.size
    if n < 5:
        raise ValidationError("need at least 5 samples for fourth-order differences")
    h = (t[-1] - t[0]) / (n - 1)
    d = np.empty(n)
    d[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    # forward/backward one-sided stencils, offsets 0..4
    d[0] = (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12 * h)
    d[1] = (-3 * v[0] - 10 * v[1] + 18 * v[2] - 6 * v[3] + v[4]) / (12 * h)
    d[-1] = (25 * v[-1] - 48 * v[-2] + 36 * v[-3] - 16 * v[-4] + 3 * v[-5]) / (12 * h)
    d[-2] = (3 * v[-1] + 10 * v[-2] - 18 * v[-3] + 6 * v[-4] - v[-5]) / (12 * h)
    return d


@dataclass(frozen=True, eq=False)
class ReconstructedSegment:
    """Samples of the reconstruction on one interval, wrapped in a Hermite interpolant.

    ``junction_residual`` is the compatibility residual that licensed this
    level.  ``slopes`` are finite-difference estimates.
    """

    level: int
    t: np.ndarray
    x: np.ndarray
    slopes: np.ndarray
    junction_residual: float
    _interp: PiecewiseHermite = dc_field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_interp", PiecewiseHermite(self.t, self.x, self.slopes))

    @property
    def domain(self):
        return float(self.t[0]), float(self.t[-1])

    def __call__(self, t):
        return self._interp(t)

    def derivative(self, t):
        return self._interp.derivative(t)

    def as_profile(self, smoothness: int = 0) -> Profile:
        """Use the segment as initial data of a problem based at its right end."""
        return Profile(lambda s: float(self(s)), lambda s: float(self.derivative(s)), smoothness)


@dataclass(eq=False)
class IteratedReconstruction:
    """Result of repeated reconstruction.

    ``segments[0]`` is level 1 (``[q**2 a, q a]``), each following entry one
    interval further left.  ``diagnostic`` is set when a level was refused.
    """

    segments: List[ReconstructedSegment]
    warnings: List[str]
    diagnostic: Optional[str] = None

    @property
    def levels_completed(self) -> int:
        return len(self.segments)

    @property
    def domain(self):
        return self.segments[-1].domain[0], self.segments[0].domain[1]

    def __call__(self, t: float) -> float:
        for seg in self.segments:
            lo, hi = seg.domain
            if lo <= t <= hi:
                return float(seg(t))
        lo, hi = self.domain
        raise DomainError(f"t={t!r} outside the reconstructed domain [{lo!r}, {hi!r}]")


def _require_profile(problem: Problem) -> Profile:
    if problem.degenerate:
        raise ValidationError("reconstruction needs a > 0 and an initial profile")
    prof = problem.initial
    if prof.eta_deriv is None:
        raise MissingDerivativeError("the profile has no derivative; reconstruction needs a C1 profile")
    return prof


def check_compatibility(problem: Problem) -> float:
    """``|eta'(a) - F(eta(q a))|``; compatible when at most the caller's tolerance."""
    prof = _require_profile(problem)
    a, q = problem.a, problem.q
    return abs(float(prof.eta_deriv(a)) - float(problem.field(prof.eta(q * a))))


def _invert_all(field: Field, targets: np.ndarray) -> np.ndarray:
    return np.array([field_invert(field, float(y)) for y in targets])


def reconstruct_one(problem: Problem, tol: float = COMPAT_TOL,
                    samples: int = SAMPLES) -> ReconstructedSegment:
    """Extend the solution to ``[q**2 a, q a]`` through ``x(t) = F^-1(eta'(t / q))``."""
    prof = _require_profile(problem)
    if not problem.field.invertible:
        raise NotInvertibleError("the field must be invertible to reconstruct")
    residual = check_compatibility(problem)
    if residual > tol:
        raise CompatibilityError(
            f"eta'(a) - F(eta(q a)) has magnitude {residual:.3e} > tol {tol:.1e}", residual
        )
    q, a = problem.q, problem.a
    # sample eta' on its own grid so t / q never needs a division
    u = np.linspace(q * a, a, samples + 1)
    t = q * u
    x = _invert_all(problem.field, np.array([float(prof.eta_deriv(s)) for s in u]))
    return ReconstructedSegment(1, t, x, fd_slopes(t, x), residual)


def reconstruct_iterated(problem: Problem, levels: int, tol: float = COMPAT_TOL,
                         samples: int = SAMPLES) -> IteratedReconstruction:
    """Apply the reconstruction ``levels`` times, moving one interval left per level.

    Level 1 failing raises exactly as :func:`reconstruct_one`.  A later level
    whose junction residual exceeds ``tol`` stops the iteration; the levels
    already built are returned with a diagnostic.
    """
    if int(levels) != levels or levels < 1:
        raise ValidationError("levels must be a positive integer")
    first = reconstruct_one(problem, tol, samples)
    segments = [first]
    warnings = [f"level 1 on [{float(first.t[0])!r}, {float(first.t[-1])!r}]: junction residual {first.junction_residual:.3e}"]
    q, field = problem.q, problem.field
    diagnostic = None
    for level in range(2, levels + 1):
        prev = segments[-1]
        # prev acts as a profile on [q b, b] with b = prev.t[-1]
        residual = abs(float(prev.slopes[-1]) - float(field(prev.x[0])))
        if residual > tol:
            diagnostic = (
                f"level {level} refused: junction residual {residual:.3e} at t={float(prev.t[0])!r} "
                f"exceeds tol {tol:.1e}; returning {len(segments)} completed level(s)"
            )
            log.warning(diagnostic)
            break
        t = q * prev.t
        try:
            x = _invert_all(field, prev.slopes)
        except NotInvertibleError as exc:
            diagnostic = f"level {level} refused: {exc}"
            log.warning(diagnostic)
            break
        segments.append(ReconstructedSegment(level, t, x, fd_slopes(t, x), residual))
        warnings.append(
            f"level {level} on [{float(t[0])!r}, {float(t[-1])!r}]: junction residual {residual:.3e}; "
            f"numerically amplified ({level - 1} numerical differentiation(s))"
        )
    return IteratedReconstruction(segments, warnings, diagnostic)
