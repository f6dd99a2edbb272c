"""
Running the equation backwards
==============================

Given a compatible C1 profile on ``[q a, a]`` and an invertible field, the
solution can be rebuilt on earlier intervals.  Each level needs one more
numerical derivative, so the error grows quickly with depth.
"""

import numpy as np

from pantograph import (Field, Problem, Profile, check_compatibility, reconstruct_iterated,
                        solve, trajectory_deriv, trajectory_eval)

# a known solution to test against
forward = solve(Problem.linear(1.0, 0.5, 1.0), 2.0)
prob = Problem(0.5, 2.0, Field.linear(1.0), Profile(
    lambda t: float(trajectory_eval(forward, t)),
    lambda t: trajectory_deriv(forward, t, "right"),
    smoothness=1,
))
print("compatibility residual:", check_compatibility(prob))

rec = reconstruct_iterated(prob, 3)
for seg in rec.segments:
    lo, hi = seg.domain
    ts = np.linspace(lo, hi, 201)
    err = np.max(np.abs(seg(ts) - trajectory_eval(forward, ts)))
    print(f"level {seg.level} on [{lo:g}, {hi:g}]: max error {err:.2e}")
for w in rec.warnings:
    print("  ", w)
if rec.diagnostic:
    print("stopped:", rec.diagnostic)
