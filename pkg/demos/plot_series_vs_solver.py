"""
Series solution against the step-by-step solver
================================================

For a linear field the solution is a power series that converges everywhere.
Here we compare it with the numerical solver and watch the error shrink by
about 16 each time the step is halved.
"""

import numpy as np

from pantograph import Problem, SolveConfig, phi_series, solve, trajectory_eval

lam, q = 1.0, 0.5
ts = np.linspace(0.0, 5.0, 201)
exact = np.array([phi_series(lam, q, t) for t in ts])

# halve the step a few times on a uniform mesh
previous = None
for spu in (16, 32, 64, 128):
    traj = solve(Problem.linear(lam, q, 1.0), 5.0, SolveConfig(steps_per_unit=spu, h0=1 / spu))
    err = np.max(np.abs(trajectory_eval(traj, ts) - exact) / np.maximum(1.0, np.abs(exact)))
    ratio = "" if previous is None else f"  (ratio {previous / err:.1f})"
    print(f"steps per unit {spu:4d}: max scaled error {err:.3e}{ratio}")
    previous = err
