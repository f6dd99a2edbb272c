"""Qualitative checks on computed trajectories.

Roots and extrema, the growth rate ``(1/t) log|x(t)|``, the ratio
``x(t) / x(q t)``, the regularity ladder and measured derivative jumps at
breakpoints.  Nothing here decides open questions: the oscillation experiment
records magnitudes and leaves interpretation to the reader.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field as dc_field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .core import Problem, Trajectory, trajectory_deriv, trajectory_eval
from .errors import BreakpointError, DomainError, UnsupportedOrderError, ValidationError
from .stepper import SolveConfig, solve

__all__ = [
    "ROOT_TOL",
    "Extremum",
    "AnalysisReport",
    "OscillationReport",
    "find_roots",
    "first_root_bound",
    "local_extrema",
    "lyapunov_curve",
    "ratio_curve",
    "regularity_count",
    "regularity_ladder",
    "derivative_jump",
    "oscillation_experiment",
    "analyze",
]

ROOT_TOL = 1e-12
MAX_JUMP_ORDER = 3
_PROFILE_SCAN_POINTS = 64


@dataclass(frozen=True)
class Extremum:
    t: float
    value: float
    kind: str  # "min" or "max"


@dataclass
class AnalysisReport:
    roots: List[float] = dc_field(default_factory=list)
    extrema: List[Extremum] = dc_field(default_factory=list)
    lyapunov_samples: List[Tuple[float, float]] = dc_field(default_factory=list)
    ratio_samples: List[Tuple[float, float]] = dc_field(default_factory=list)
    regularity: List[Tuple[float, int, float]] = dc_field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "roots": list(self.roots),
            "extrema": [asdict(e) for e in self.extrema],
            "lyapunov": [list(p) for p in self.lyapunov_samples],
            "ratio": [list(p) for p in self.ratio_samples],
            "regularity": [
                {"breakpoint": b, "continuous_derivatives": n, "jump": j} for b, n, j in self.regularity
            ],
        }


@dataclass
class OscillationReport:
    """Raw evidence from ``x' = -lam x(q t)``: no verdict is attached."""

    lambda_abs: float
    q: float
    x0: float
    t_end: float
    roots: List[float]
    extrema: List[Extremum]
    magnitude_ratios: List[float]
    trajectory: Trajectory = dc_field(repr=False)


def _bisect(fn: Callable[[float], float], lo: float, hi: float, f_lo: float,
            tol: float = ROOT_TOL) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = fn(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid < 0.0) == (f_lo < 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _scan_grid(traj: Trajectory, t_from: float, t_to: float) -> np.ndarray:
    lo, hi = traj.domain
    if not (lo <= t_from < t_to <= hi):
        raise DomainError(f"[{t_from!r}, {t_to!r}] is not inside the computed domain [{lo!r}, {hi!r}]")
    pieces = [traj.knots[(traj.knots > t_from) & (traj.knots < t_to)]]
    if t_from < traj.t_start:
        pieces.append(np.linspace(t_from, min(traj.t_start, t_to), _PROFILE_SCAN_POINTS + 1))
    pieces.append(np.array([t_from, t_to]))
    return np.unique(np.concatenate(pieces))


def _sign_changes(fn, grid) -> List[float]:
    values = [fn(float(t)) for t in grid]
    out = []
    for i in range(len(grid) - 1):
        t0, t1, f0, f1 = float(grid[i]), float(grid[i + 1]), values[i], values[i + 1]
        if f0 == 0.0:
            if 0 < i and values[i - 1] * f1 < 0.0:
                out.append(t0)
            continue
        if f0 * f1 < 0.0:
            out.append(_bisect(fn, t0, t1, f0))
    return out


def find_roots(traj: Trajectory, t_from: Optional[float] = None,
               t_to: Optional[float] = None) -> List[float]:
    """Times where ``x`` changes sign, refined by bisection to ``1e-12``.

    Touching zeros without a sign change (including ``x == 0`` identically)
    are not reported.
    """
    lo, hi = traj.domain
    t_from = lo if t_from is None else float(t_from)
    t_to = hi if t_to is None else float(t_to)
    return _sign_changes(lambda t: trajectory_eval(traj, t), _scan_grid(traj, t_from, t_to))


def first_root_bound(lambda_abs: float, q: float) -> float:
    """Guaranteed upper bound ``1 / (lam (1 - q))`` on the first root of ``x' = -lam x(q t)``."""
    if not lambda_abs > 0:
        raise ValidationError("lambda_abs must be positive")
    if not 0.0 < q < 1.0:
        raise ValidationError("q must satisfy 0 < q < 1")
    return 1.0 / (lambda_abs * (1.0 - q))


def local_extrema(traj: Trajectory) -> List[Extremum]:
    """Zeros of ``x'(t) = F(x(q t))`` after the base point, classified by the sign change.

    The scan uses knots and step midpoints; a sign change from + to - is a
    maximum.
    """
    prob = traj.problem
    knots = traj.knots
    grid = np.unique(np.concatenate([knots, 0.5 * (knots[1:] + knots[:-1])]))
    grid = grid[grid > traj.t_start]

    def slope(t):
        return float(prob.field(trajectory_eval(traj, prob.q * t)))

    values = [slope(float(t)) for t in grid]
    out = []
    for i in range(len(grid) - 1):
        f0, f1 = values[i], values[i + 1]
        if f0 == 0.0 or f0 * f1 >= 0.0:
            if f0 == 0.0 and 0 < i and values[i - 1] * f1 < 0.0:
                t = float(grid[i])
                out.append(Extremum(t, float(trajectory_eval(traj, t)), "max" if values[i - 1] > 0 else "min"))
            continue
        t = _bisect(slope, float(grid[i]), float(grid[i + 1]), f0)
        out.append(Extremum(t, float(trajectory_eval(traj, t)), "max" if f0 > 0 else "min"))
    return out


def lyapunov_curve(traj: Trajectory, sample_times: Sequence[float]) -> List[Tuple[float, float]]:
    """``(t, log|x(t)| / t)`` pairs; samples where ``x`` vanishes are skipped with a warning."""
    out = []
    for t in sample_times:
        t = float(t)
        if t <= 0:
            raise ValidationError(f"sample times must be positive, got {t!r}")
        x = trajectory_eval(traj, t)
        if x == 0.0:
            warnings.warn(f"x({t!r}) = 0; Lyapunov sample skipped", RuntimeWarning, stacklevel=2)
            continue
        out.append((t, math.log(abs(x)) / t))
    return out


def ratio_curve(traj: Trajectory, sample_times: Sequence[float]) -> List[Tuple[float, float]]:
    """``(t, x(t) / x(q t))`` pairs; samples with ``x(q t) = 0`` are skipped with a warning."""
    q = traj.problem.q
    out = []
    for t in sample_times:
        t = float(t)
        denom = trajectory_eval(traj, q * t)
        if denom == 0.0:
            warnings.warn(f"x({q * t!r}) = 0; ratio sample skipped", RuntimeWarning, stacklevel=2)
            continue
        out.append((t, trajectory_eval(traj, t) / denom))
    return out


def _ladder_position(a: float, q: float, t: float) -> float:
    return (math.log(t) - math.log(a)) / math.log(1.0 / q)


def regularity_count(l: int, a: float, q: float, t: float) -> int:
    """Number of continuous derivatives at ``t``: ``l + 1 + floor(log(t/a) / log(1/q))``.

    Breakpoints ``a q**-k`` are excluded and raise :class:`BreakpointError`.
    """
    if int(l) != l or l < 0:
        raise ValidationError("l must be a nonnegative integer")
    if not a > 0:
        raise ValidationError("a must be positive")
    if not 0.0 < q < 1.0:
        raise ValidationError("q must satisfy 0 < q < 1")
    if not t > a * q:
        raise DomainError(f"t={t!r} must exceed q a = {a * q!r}")
    pos = _ladder_position(a, q, t)
    k = round(pos)
    if math.isclose(t, a * q ** (-k), rel_tol=1e-12):
        raise BreakpointError(f"t={t!r} is the breakpoint a q^-{k}")
    return int(l) + 1 + math.floor(pos)


def derivative_jump(traj: Trajectory, b: float, order: int = 1) -> float:
    """Jump (right minus left) of the ``order``-th derivative of ``x`` at the knot ``b``.

    Order 1 compares the stored one-sided slopes.  Orders 2 and 3
    differentiate the one-sided slope ``x'`` numerically with 5-point
    one-sided stencils at offsets ``j * delta`` (``j = 0..4``), where
    ``delta`` is one eighth of the adjacent step on that side.
    """
    if int(order) != order or order < 1:
        raise ValidationError("order must be a positive integer")
    if order > MAX_JUMP_ORDER:
        raise UnsupportedOrderError(
            f"order {order} > {MAX_JUMP_ORDER}: one-sided differences of order >= 4 are dominated by rounding"
        )
    b = float(b)
    idx = np.flatnonzero(traj.knots == b)
    if idx.size == 0:
        raise ValidationError(f"{b!r} is not a knot of the trajectory")
    i = int(idx[0])
    if i == 0 or i == traj.knots.size - 1:
        if traj.problem.degenerate or i == traj.knots.size - 1:
            raise DomainError(f"need trajectory on both sides of {b!r}")
    if order == 1:
        return trajectory_deriv(traj, b, "right") - trajectory_deriv(traj, b, "left")

    h_right = float(traj.knots[i + 1] - traj.knots[i])
    if i > 0:
        h_left = float(traj.knots[i] - traj.knots[i - 1])
    else:
        h_left = h_right * traj.problem.q
    d_right = h_right / 8
    d_left = h_left / 8
    g_right = [trajectory_deriv(traj, b + j * d_right, "right") for j in range(5)]
    g_left = [trajectory_deriv(traj, b - j * d_left, "left") for j in range(5)]
    return _one_sided(g_right, d_right, order - 1) - _one_sided(g_left, -d_left, order - 1)


def _one_sided(g: Sequence[float], delta: float, order: int) -> float:
    # 5-point one-sided stencils (Richardson-combined differences), offsets 0..4
    if order == 1:
        return (-25 * g[0] + 48 * g[1] - 36 * g[2] + 16 * g[3] - 3 * g[4]) / (12 * delta)
    return (35 * g[0] - 104 * g[1] + 114 * g[2] - 56 * g[3] + 11 * g[4]) / (12 * delta * delta)


def regularity_ladder(traj: Trajectory, max_order: int = 2) -> List[Tuple[float, int, float]]:
    """For each interior breakpoint: ``(b, continuous derivatives, measured jump)``.

    At ``b = a q**-k`` derivatives up to order ``k`` are continuous and the
    ``(k+1)``-th generically jumps.  The jump is measured when that order is
    at most ``max_order``, else reported as ``nan``.
    """
    prob = traj.problem
    if prob.degenerate:
        return []
    out = []
    for b in traj.segment_ends[:-1]:
        k = round(_ladder_position(prob.a, prob.q, b))
        order = k + 1
        jump = derivative_jump(traj, b, order) if order <= min(max_order, MAX_JUMP_ORDER) else float("nan")
        out.append((float(b), k, jump))
    return out


def oscillation_experiment(lambda_abs: float, q: float, x0: float, t_end: float,
                           config: Optional[SolveConfig] = None) -> OscillationReport:
    """Solve ``x' = -lambda_abs x(q t)`` and collect roots, extrema and magnitude ratios."""
    if not lambda_abs > 0:
        raise ValidationError("lambda_abs must be positive")
    traj = solve(Problem.linear(-lambda_abs, q, x0), t_end, config)
    roots = find_roots(traj)
    extrema = local_extrema(traj)
    ratios = [
        abs(extrema[i + 1].value) / abs(extrema[i].value)
        for i in range(len(extrema) - 1)
        if extrema[i].value != 0.0
    ]
    return OscillationReport(float(lambda_abs), float(q), float(x0), float(t_end), roots, extrema, ratios, traj)


def analyze(traj: Trajectory, sample_times: Optional[Sequence[float]] = None) -> AnalysisReport:
    """Run every analysis that applies to ``traj`` and collect an :class:`AnalysisReport`."""
    lo, hi = traj.domain
    if sample_times is None:
        start = max(traj.t_start, 1.0)
        sample_times = np.geomspace(start, hi, 16) if hi > start else []
    samples = [float(t) for t in sample_times if t > 0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        lyap = lyapunov_curve(traj, samples)
        ratio = ratio_curve(traj, [t for t in samples if traj.problem.q * t >= lo])
    return AnalysisReport(
        roots=find_roots(traj),
        extrema=local_extrema(traj),
        lyapunov_samples=lyap,
        ratio_samples=ratio,
        regularity=regularity_ladder(traj),
    )
