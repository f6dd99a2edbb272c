"""Exit criteria for the package, one test per criterion.

Run ``pytest tests/test_acceptance.py -v`` to see a PASS/FAIL line for each in
the terminal summary.
"""

import subprocess
import sys

import numpy as np

from pantograph import (
    Degenerate,
    Field,
    Problem,
    Profile,
    SolveConfig,
    check_compatibility,
    derivative_jump,
    find_roots,
    first_root_bound,
    local_extrema,
    lyapunov_curve,
    oscillation_experiment,
    phi_series,
    ratio_curve,
    reconstruct_iterated,
    reconstruct_one,
    regularity_count,
    solve,
    trajectory_deriv,
    trajectory_eval,
)

SERIES_TOL = 1e-15


def max_scaled_series_error(lam, q, steps_per_unit, h0=None):
    traj = solve(Problem.linear(lam, q, 1.0), 5.0, SolveConfig(steps_per_unit=steps_per_unit, h0=h0))
    worst = 0.0
    for t in np.linspace(0.0, 5.0, 201):
        x = trajectory_eval(traj, t)
        err = abs(x - phi_series(lam, q, t, SERIES_TOL)) / max(1.0, abs(x))
        worst = max(worst, err)
    return worst


def test_criterion_1_series_agreement(criterion):
    errors = {(lam, q): max_scaled_series_error(lam, q, 64) for lam in (-1.0, 1.0) for q in (0.25, 0.5, 0.9)}
    worst = max(errors.values())
    criterion(1, "series-integrator agreement", worst <= 1e-7,
              f"max scaled error {worst:.3e} over {len(errors)} (lambda, q) pairs (tol 1e-7)")


def test_criterion_2_fourth_order(criterion):
    # uniform meshes (h0 = 1/steps_per_unit) so doubling the count halves every step
    coarse = max_scaled_series_error(1.0, 0.5, 64, h0=1 / 64)
    fine = max_scaled_series_error(1.0, 0.5, 128, h0=1 / 128)
    ratio = coarse / fine
    criterion(2, "fourth-order convergence", 12 <= ratio <= 20,
              f"error {coarse:.3e} -> {fine:.3e}, ratio {ratio:.2f} (want [12, 20])")


def test_criterion_3_first_root(criterion):
    failures = []
    for lam in (0.5, 1.0, 2.0):
        for q in (0.25, 0.5, 0.75):
            bound = first_root_bound(lam, q)
            traj = solve(Problem.linear(-lam, q, 1.0), bound / q + 1.0)
            roots = find_roots(traj)
            if not roots:
                failures.append(f"no root for lambda={lam}, q={q}")
                continue
            r1 = roots[0]
            if r1 > bound + 1e-9:
                failures.append(f"r1={r1} > bound {bound} (lambda={lam}, q={q})")
            before = traj.knots[traj.knots <= r1]
            dense = np.linspace(0.0, r1, 2001)
            if not (np.all(np.diff(traj.x[: before.size]) < 0) and np.all(np.diff(trajectory_eval(traj, dense)) < 0)):
                failures.append(f"not strictly decreasing on [0, r1] (lambda={lam}, q={q})")
            later = [e for e in local_extrema(traj) if e.t > r1]
            if not later or abs(later[0].t - r1 / q) > 1e-6 * (r1 / q) or later[0].kind != "min":
                failures.append(f"first extremum after r1 not a minimum at r1/q (lambda={lam}, q={q})")
    criterion(3, "first root bound and minimum at r1/q", not failures,
              "; ".join(failures) or "9 (lambda, q) cases")


def test_criterion_4_growth(criterion):
    traj = solve(Problem.linear(1.0, 0.5, 1.0), 512.0)
    ratios = [v for _, v in ratio_curve(traj, [2.0 ** k for k in range(10)])]
    monotone = all(b >= a - 1e-9 for a, b in zip(ratios, ratios[1:]))
    lyap = dict(lyapunov_curve(traj, [50.0, 500.0]))
    trend = lyap[50.0] > 0 and lyap[500.0] > 0 and lyap[500.0] < lyap[50.0]
    criterion(4, "ratio monotone, growth rate decreasing", monotone and trend,
              f"ratios {ratios[0]:.3f}..{ratios[-1]:.3f}; (1/t)log x: t=50 {lyap[50.0]:.4f}, t=500 {lyap[500.0]:.4f}")


def test_criterion_5_regularity(criterion):
    prob = Problem(0.5, 1.0, Field.linear(1.0), Profile(lambda t: 1.0, lambda t: 0.0))
    traj = solve(prob, 4.0)
    j1 = derivative_jump(traj, 1.0, 1)
    j2 = derivative_jump(traj, 2.0, 1)
    j2b = derivative_jump(traj, 2.0, 2)
    c15 = regularity_count(0, 1.0, 0.5, 1.5)
    c5 = regularity_count(0, 1.0, 0.5, 5.0)
    ok = abs(j1 - 1) <= 1e-6 and abs(j2) <= 1e-6 and abs(j2b) > 1e-3 and c15 == 1 and c5 == 3
    criterion(5, "regularity ladder", ok,
              f"jump1@1={j1:.3g}, jump1@2={j2:.3g}, jump2@2={j2b:.3g}, count(1.5)={c15}, count(5)={c5}")


def test_criterion_6_reconstruction(criterion):
    forward = solve(Problem.linear(1.0, 0.5, 1.0), 2.0)
    prob = Problem(0.5, 2.0, Field.linear(1.0), Profile(
        lambda t: float(trajectory_eval(forward, t)),
        lambda t: trajectory_deriv(forward, t, "right"),
        smoothness=1,
    ))
    residual = check_compatibility(prob)
    one = reconstruct_one(prob)
    ts1 = np.linspace(0.5, 1.0, 501)
    err1 = float(np.max(np.abs(one(ts1) - trajectory_eval(forward, ts1))))
    two = reconstruct_iterated(prob, 2)
    ts2 = np.linspace(0.25, 0.5, 501)
    err2 = float(np.max(np.abs(two.segments[1](ts2) - trajectory_eval(forward, ts2)))) if two.levels_completed == 2 else np.inf
    ok = residual <= 1e-7 and err1 <= 1e-6 and err2 <= 1e-4
    criterion(6, "reconstruction round trip", ok,
              f"compat residual {residual:.2e}, level-1 sup err {err1:.2e}, level-2 sup err {err2:.2e}")


def test_criterion_7_constant_field(criterion):
    worst = 0.0
    for c, x0 in ((1.0, 0.0), (-3.7, 2.5), (0.125, -40.0)):
        traj = solve(Problem(0.5, 0.0, Field.constant(c), Degenerate(x0)), 100.0)
        ts = np.concatenate([traj.knots, np.linspace(0.0, 100.0, 1001)])
        xs = trajectory_eval(traj, ts)
        exact = x0 + c * ts
        worst = max(worst, float(np.max(np.abs(xs - exact) / np.maximum(1.0, np.abs(xs)))))
    criterion(7, "constant field exactness", worst <= 1e-12, f"max scaled error {worst:.2e} (tol 1e-12)")


def test_criterion_8_oscillation(criterion):
    rep = oscillation_experiment(1.0, 0.5, 1.0, 200.0)
    kinds = [e.kind for e in rep.extrema]
    alternate = all(a != b for a, b in zip(kinds, kinds[1:]))
    recorded = len(rep.magnitude_ratios) == len(rep.extrema) - 1
    criterion(8, "oscillation evidence", len(rep.roots) >= 3 and alternate and recorded,
              f"{len(rep.roots)} sign changes, {len(rep.extrema)} alternating extrema, "
              f"magnitude ratios {[round(r, 3) for r in rep.magnitude_ratios]}")


def test_criterion_9_determinism(criterion):
    argv = [sys.executable, "-m", "pantograph", "solve", "--q", "0.5", "--a", "0", "--x0", "1",
            "--field", "linear:-1", "--t-end", "10", "--format", "csv"]
    first = subprocess.run(argv, capture_output=True, check=True).stdout
    second = subprocess.run(argv, capture_output=True, check=True).stdout
    criterion(9, "byte-identical CLI output", first == second and len(first) > 0,
              f"{len(first)} bytes, identical={first == second}")
