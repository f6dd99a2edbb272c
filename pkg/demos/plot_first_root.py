"""
Decay and the first zero
========================

With ``x' = -lam x(q t)`` and ``x(0) = 1`` the solution falls, crosses zero
before a computable bound, and has its first minimum exactly at ``r1 / q``.
"""

from pantograph import Problem, find_roots, first_root_bound, local_extrema, solve

for lam in (0.5, 1.0, 2.0):
    for q in (0.25, 0.5, 0.75):
        bound = first_root_bound(lam, q)
        traj = solve(Problem.linear(-lam, q, 1.0), bound / q + 1.0)
        r1 = find_roots(traj)[0]
        minimum = next(e for e in local_extrema(traj) if e.t > r1)
        print(f"lam={lam:<4} q={q:<5} r1={r1:.6f} <= {bound:.6f}   "
              f"minimum at {minimum.t:.6f}, r1/q = {r1 / q:.6f}")
