"""Lattice sums along an irrational rotation.

Averages of h(k * nu' mod 1) over |k| <= N approach the integral of h when
nu' is irrational, and stick to a finite orbit average when it is rational.
"""

import math

from oscihom import PeriodicField, weyl_average

nu = math.sqrt(2) - 1
for text in ("sin(2*pi*y1)^2", "abs(sin(pi*y1))", "cos(4*pi*y1)"):
    h = PeriodicField(text)
    for N in (10, 1000, 100_000):
        w = weyl_average(h, [nu], N)
        print(f"{text:<18} N={N:>6}  sum={w.value:+.6f}  integral={w.target:+.6f}  error={w.error:.1e}")

w = weyl_average(PeriodicField("cos(4*pi*y1)"), [0.5], 1000)
print(f"\nrational nu'=1/2: cos(4 pi t) sum={w.value:.3f}, integral={w.target:.3f}")
