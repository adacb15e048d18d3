"""Straight segments: irrational normals average, rational normals select.

A unit segment whose normal (1, sqrt 2)/sqrt 3 is irrational sweeps the whole
torus, so the oscillating integral tends to the cell average 4/pi^2. A
horizontal segment at height a is a closed loop; the limit depends on the
loop phase hit by eps, and an eps chosen so that a/eps = phase mod 1 gives
(2/pi)|sin(pi * phase)|.
"""

import math

from oscihom import PeriodicField, segment, surface_integral
from oscihom.oscillatory_integral import phase_epsilons

g = PeriodicField("abs(sin(pi*y1)*sin(pi*y2))")
tilted = segment((0.0, 0.0), (-math.sqrt(2 / 3), math.sqrt(1 / 3)))

print("irrational normal, target 4/pi^2 =", round(4 / math.pi**2, 6))
for eps in (1e-2, 1e-3, 1e-4):
    print(f"  eps={eps:.0e}  integral={surface_integral(tilted, g, eps):.6f}")

print("\nhorizontal segment at height 1/2")
flat = segment((0.0, 0.5), (1.0, 0.5))
for phase in (0.0, 0.25, 0.5):
    eps = phase_epsilons(0.5, (0, 1), phase, 1e-3, 1)[0]
    want = 2 * abs(math.sin(math.pi * phase)) / math.pi
    print(f"  phase={phase:.2f}  eps={eps:.6e}  integral={surface_integral(flat, g, eps):.6f}  limit={want:.6f}")
