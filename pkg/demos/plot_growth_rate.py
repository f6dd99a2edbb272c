"""
How fast does the growing solution grow?
========================================

For ``lam > 0`` the solution increases forever, yet more slowly than any
exponential: ``log(x) / t`` keeps falling while ``t x'(t) / x(t)`` keeps rising.
"""

from pantograph import Problem, lyapunov_curve, ratio_curve, solve

traj = solve(Problem.linear(1.0, 0.5, 1.0), 512.0)
times = [2.0 ** k for k in range(10)]
for (t, lyap), (_, ratio) in zip(lyapunov_curve(traj, times), ratio_curve(traj, times)):
    print(f"t={t:6.0f}   log(x)/t={lyap:.5f}   t x'/x={ratio:.4f}")
