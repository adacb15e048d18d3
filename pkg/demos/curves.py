"""Closed curves: curvature averages, flat pieces leave a band.

On the unit circle every normal direction is visited, so eps-sweeps settle
near perimeter * cell average. The stadium has two vertical flats with a
rational normal; the sweep band sits inside the interval spanned by the
homogenized lower and upper bounds, whose width comes only from the flats.
"""

from oscihom import PeriodicField, circle, homogenized_bounds, sandwich_check, stadium
from oscihom.oscillatory_integral import Geometric, epsilon_sweep

g = PeriodicField("abs(sin(pi*y1))^3+0.5*cos(2*pi*y1)")
sched = Geometric.ending_at(1e-3, 0.7, 10)

for name, c in (("circle", circle()), ("stadium R=2", stadium(2.0))):
    sw = epsilon_sweep(c, g, sched, W=6)
    b = homogenized_bounds(c, g)
    v = sandwich_check(sw, b)
    lo, hi = sw.band
    print(f"{name}: band [{lo:.5f}, {hi:.5f}]  bounds [{b.lower:.5f}, {b.upper:.5f}]"
          f"  mean {b.mean:.5f}  sandwich {'holds' if v.passed else 'fails'}")
    for p in b.parts:
        print(f"    {p.kind:>14}  length {p.length:.4f}  [{p.lower:.4f}, {p.upper:.4f}]")
