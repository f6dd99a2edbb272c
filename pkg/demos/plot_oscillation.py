"""
Oscillation of the decaying solution
====================================

For ``x' = -x(t/2)`` the solution changes sign again and again.  The extrema
alternate and their magnitudes grow.
"""

from pantograph import oscillation_experiment

rep = oscillation_experiment(1.0, 0.5, 1.0, 200.0)
print("sign changes:", [round(r, 4) for r in rep.roots])
for e in rep.extrema:
    print(f"{e.kind:3s} at t={e.t:9.4f}   x={e.value: .6e}")
print("magnitude ratios:", [round(r, 3) for r in rep.magnitude_ratios])
