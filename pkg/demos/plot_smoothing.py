"""
Smoothing along the breakpoints
===============================

Start from a constant profile with ``F(x) = x``.  The derivative jumps at
``t = a`` but each later breakpoint pushes the jump one derivative higher.
"""

from pantograph import Field, Problem, Profile, derivative_jump, regularity_count, regularity_ladder, solve

prob = Problem(0.5, 1.0, Field.linear(1.0), Profile(lambda t: 1.0, lambda t: 0.0))
traj = solve(prob, 8.0)

for b, k, jump in regularity_ladder(traj, max_order=3):
    print(f"breakpoint {b:g}: derivative of order {k + 1} jumps by {jump:.6f}")

print("first derivative jump at t=2:", derivative_jump(traj, 2.0, 1))
for t in (1.5, 3.0, 5.0):
    print(f"guaranteed continuous derivatives at t={t}: {regularity_count(0, 1.0, 0.5, t)}")
