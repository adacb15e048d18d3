"""Dirichlet problems with oscillating boundary data.

On the disk the centre value tends to the cell average. On the stadium the
flat sides remember the phase: two eps subsequences that put g at its
maximum or at its mean on the flats give different interior limits, each
matched by a boundary solve with the corresponding constant data.
"""

import math

import numpy as np

from oscihom import Bem, DirichletProblem, Disk, PeriodicField, solve, stadium
from oscihom.oscillatory_integral import phase_epsilons
from oscihom.pde import solve_bem, solve_with_datum

g = PeriodicField("abs(sin(pi*y1)*sin(pi*y2))")
print("disk, target 4/pi^2 =", round(4 / math.pi**2, 6))
for eps in (1e-2, 1e-3, 1e-4):
    print(f"  eps={eps:.0e}  u(0)={solve(DirichletProblem(Disk(), g, eps), (0.0, 0.0)):.6f}")

s2 = PeriodicField("sin(2*pi*y1)^2")
dom = Bem(stadium(2.0))
print("\nstadium, g = sin^2(2 pi y1)")
for label, phase, flat in (("max", 0.25, 1.0), ("mean", 0.125, 0.5)):
    eps = phase_epsilons(2.0, (1, 0), phase, 1e-3, 1)[0]
    u = solve_bem(DirichletProblem(dom, s2, eps), (0.0, 0.0))
    datum = [lambda p, v=flat: np.full(len(p), v), lambda p: np.full(len(p), 0.5)] * 2
    ref = solve_with_datum(dom, datum, (0.0, 0.0))
    print(f"  flats at g={label:<4}  eps={eps:.6e}  u(0)={u:.5f}  constant-data solve={ref:.5f}")
