"""Forward solver: the method of steps for ``x'(t) = F(x(q t))``.

With ``a > 0`` the solution is built rung by rung on ``[a q**-k, a q**-(k+1)]``;
every delayed argument ``q s`` then lies on the previous rung, so the
right-hand side along a step is a known function of ``s`` and the classical
4-stage scheme integrates it with fourth-order accuracy.  Steps never cross a
rung, where higher derivatives jump.

With ``a = 0`` the first steps read ``x(q s)`` from inside the step being
computed.  Those steps are solved by Picard sweeps over a provisional Hermite
record; once ``q (t + h) <= t`` plain stepping takes over.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Problem, Trajectory, breakpoints, hermite_value, trajectory_eval
from .errors import ConvergenceError, SolverOverflowError, ValidationError

__all__ = [
    "SolveConfig",
    "TrajectoryBuilder",
    "solve",
    "advance_segment",
    "bootstrap_degenerate",
    "equation_residual",
]

OVERFLOW_LIMIT = 1e300
# slack for q * (a q**-(k+1)) landing an ulp past a q**-k
_LOOKUP_SLACK = 8 * np.finfo(float).eps


@dataclass(frozen=True)
class SolveConfig:
    """Discretisation settings.

    ``steps_per_segment`` applies when ``a > 0``.  For ``a = 0`` the step starts
    at ``h0`` (default ``1e-3 * max(1, t_end)``), grows by ``growth`` per step
    and never exceeds ``1 / steps_per_unit``.
    """

    steps_per_segment: int = 64
    steps_per_unit: int = 64
    h0: Optional[float] = None
    growth: float = 1.1
    picard_max: int = 12
    picard_tol: float = 1e-13
    residual_tol: float = 1e-9

    def __post_init__(self):
        if int(self.steps_per_segment) != self.steps_per_segment or self.steps_per_segment < 4:
            raise ValidationError("steps_per_segment must be an integer >= 4")
        if int(self.steps_per_unit) != self.steps_per_unit or self.steps_per_unit < 1:
            raise ValidationError("steps_per_unit must be a positive integer")
        if self.h0 is not None and not (math.isfinite(self.h0) and self.h0 > 0):
            raise ValidationError("h0 must be positive")
        if not (math.isfinite(self.growth) and self.growth >= 1.0):
            raise ValidationError("growth must be >= 1")
        if int(self.picard_max) != self.picard_max or self.picard_max < 1:
            raise ValidationError("picard_max must be a positive integer")
        for name in ("picard_tol", "residual_tol"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be positive")

    @property
    def max_step(self) -> float:
        return 1.0 / self.steps_per_unit

    def initial_step(self, t_end: float) -> float:
        h = self.h0 if self.h0 is not None else 1e-3 * max(1.0, t_end)
        return min(h, self.max_step)


class TrajectoryBuilder:
    """Mutable trajectory under construction.

    Knots are appended left to right; ``lookup`` serves delayed values from the
    profile or from finished steps and refuses anything past ``covered_end``.
    """

    def __init__(self, problem: Problem):
        self.problem = problem
        self.field = problem.field
        self.q = problem.q
        a = problem.a
        if problem.degenerate:
            x_start = float(problem.initial.x0)
        else:
            x_start = problem.profile_value(a)
        self.ts = [a]
        self.xs = [x_start]
        self.ds = [self._rhs(a, problem.profile_value(problem.q * a) if a > 0 else x_start)]
        self.segment_ends = [a] if a > 0 else []
        self.lookups = 0

    @property
    def covered_end(self) -> float:
        return self.ts[-1]

    def _rhs(self, t, x_delayed):
        d = self.field(x_delayed)
        if not math.isfinite(d) or abs(d) > OVERFLOW_LIMIT:
            raise SolverOverflowError(f"field value {d!r} is not representable at t={t!r}", t)
        return float(d)

    def lookup(self, s: float) -> float:
        """``x(s)`` for ``s`` in already-covered territory."""
        self.lookups += 1
        end = self.ts[-1]
        if s > end:
            if s - end > _LOOKUP_SLACK * max(1.0, abs(end)):
                raise AssertionError(f"delayed lookup at s={s!r} precedes available data (covered to {end!r})")
            s = end
        if s < self.ts[0]:
            return self.problem.profile_value(s)
        ts = self.ts
        i = bisect_right(ts, s) - 1
        if i == len(ts) - 1:
            return self.xs[-1]
        return hermite_value(s, ts[i], ts[i + 1], self.xs[i], self.xs[i + 1], self.ds[i], self.ds[i + 1])

    def push(self, t: float, x: float, d: float) -> None:
        if not math.isfinite(x) or abs(x) > OVERFLOW_LIMIT:
            raise SolverOverflowError(
                f"|x| exceeded {OVERFLOW_LIMIT:g} after t={self.ts[-1]!r}", self.ts[-1]
            )
        self.ts.append(t)
        self.xs.append(x)
        self.ds.append(d)

    def plain_step(self, t_hi: float) -> None:
        """One 4-stage step whose delayed arguments are all covered."""
        t_lo, x_lo, k1 = self.ts[-1], self.xs[-1], self.ds[-1]
        h = t_hi - t_lo
        q = self.q
        # the two midpoint stages coincide: the RHS does not depend on the current state
        k2 = self._rhs(t_lo, self.lookup(q * (t_lo + 0.5 * h)))
        k3 = k2
        k4 = self._rhs(t_hi, self.lookup(q * t_hi))
        x_hi = x_lo + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        self.push(t_hi, x_hi, k4)

    def picard_step(self, t_hi: float, config: SolveConfig) -> bool:
        """Self-referential step near ``t = 0``; returns False if sweeps did not settle."""
        t_lo, x_lo, d_lo = self.ts[-1], self.xs[-1], self.ds[-1]
        h = t_hi - t_lo
        q = self.q
        x_hi, d_hi = x_lo + h * d_lo, d_lo

        def x_at(s):
            if s <= t_lo:
                return self.lookup(s)
            return hermite_value(s, t_lo, t_hi, x_lo, x_hi, d_lo, d_hi)

        for _ in range(config.picard_max):
            k2 = self._rhs(t_lo, x_at(q * (t_lo + 0.5 * h)))
            k4 = self._rhs(t_hi, x_at(q * t_hi))
            x_new = x_lo + h * (d_lo + 4.0 * k2 + k4) / 6.0
            change = abs(x_new - x_hi)
            x_hi, d_hi = x_new, k4
            if change <= config.picard_tol * max(1.0, abs(x_new)):
                self.push(t_hi, x_hi, d_hi)
                return True
        return False

    def freeze(self) -> Trajectory:
        return Trajectory(
            self.problem,
            np.array(self.ts),
            np.array(self.xs),
            np.array(self.ds),
            tuple(self.segment_ends),
        )


def advance_segment(builder: TrajectoryBuilder, k: int, config: SolveConfig,
                    t_stop: Optional[float] = None) -> TrajectoryBuilder:
    """Cover ``[a q**-k, a q**-(k+1)]`` (truncated at ``t_stop``) with equal steps."""
    prob = builder.problem
    if prob.degenerate:
        raise ValidationError("advance_segment needs a > 0")
    lo = builder.covered_end
    if lo != builder.segment_ends[-1] or len(builder.segment_ends) != k + 1:
        raise ValidationError(f"segment {k} does not start at the covered end {lo!r}")
    hi = lo / prob.q
    n = config.steps_per_segment
    if t_stop is not None and t_stop < hi:
        n = max(1, math.ceil(n * (t_stop - lo) / (hi - lo) - 1e-9))
        hi = t_stop
    for j in range(1, n):
        builder.plain_step(lo + (hi - lo) * j / n)
    builder.plain_step(hi)
    builder.segment_ends.append(hi)
    return builder


def bootstrap_degenerate(builder: TrajectoryBuilder, config: SolveConfig,
                         t_end: float) -> float:
    """Take Picard steps from ``t = 0`` until plain stepping is safe.

    Returns the step size to continue with.  A step whose sweeps do not
    settle within ``picard_max`` is halved and retried.
    """
    prob = builder.problem
    if not prob.degenerate:
        raise ValidationError("bootstrap_degenerate needs a = 0 and a degenerate initial value")
    q = prob.q
    h = config.initial_step(t_end)
    h_min = 1e-12 * max(1.0, t_end)
    while builder.covered_end < t_end:
        t = builder.covered_end
        h = min(h, t_end - t)
        if q * (t + h) <= t:
            break
        if builder.picard_step(t + h, config):
            h = min(h * config.growth, config.max_step)
            continue
        h *= 0.5
        if h < h_min:
            raise ConvergenceError(f"Picard bootstrap did not converge at t={t!r} even with h={h!r}")
    return h


def solve(problem: Problem, t_end: float, config: Optional[SolveConfig] = None) -> Trajectory:
    """Solve ``problem`` forward on ``[a, t_end]``.

    Deterministic: identical inputs produce bit-identical trajectories.
    """
    config = config or SolveConfig()
    t_end = float(t_end)
    if not (math.isfinite(t_end) and t_end > problem.a):
        raise ValidationError(f"t_end must exceed a={problem.a!r}, got {t_end!r}")
    builder = TrajectoryBuilder(problem)
    if problem.degenerate:
        h = bootstrap_degenerate(builder, config, t_end)
        q = problem.q
        while builder.covered_end < t_end:
            t = builder.covered_end
            # cap keeps q (t + h) <= t so stages never read the current step
            h = min(h, config.max_step, t * (1.0 - q) / q)
            remaining = t_end - t
            if remaining <= 1.25 * h and q * t_end <= t:
                h = remaining
            t_hi = t_end if h >= remaining else t + h
            builder.plain_step(t_hi)
            h = h * config.growth
    else:
        ladder = breakpoints(problem, t_end)
        n_full = sum(1 for b in ladder if b > problem.a)
        for k in range(n_full):
            advance_segment(builder, k, config)
        if builder.covered_end < t_end:
            advance_segment(builder, n_full, config, t_stop=t_end)
    return builder.freeze()


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def equation_residual(traj: Trajectory, times) -> np.ndarray:
    """Integral-form residual ``|x(t) - x(t_i) - int_{t_i}^t F(x(q s)) ds|``.

    ``t_i`` is the knot at or left of ``t``; the integral is an 8-point
    Gauss-Legendre rule over the dense right-hand side, independent of the
    stepping formula.
    """
    prob = traj.problem
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.empty(times.size)
    for j, t in enumerate(times):
        i = int(np.clip(np.searchsorted(traj.knots, t, side="right") - 1, 0, traj.knots.size - 2))
        t0 = float(traj.knots[i])
        half = 0.5 * (t - t0)
        s = t0 + half * (_GL_NODES + 1.0)
        g = np.array([prob.field(trajectory_eval(traj, prob.q * si)) for si in s])
        integral = half * float(np.dot(_GL_WEIGHTS, g))
        out[j] = abs(trajectory_eval(traj, t) - traj.x[i] - integral)
    return out
