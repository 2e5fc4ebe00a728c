"""
Small divisors and leafwise primitives
======================================

A badly approximable slope against a Liouville slope, at growing truncation.
"""

import math

from adiabatic_ss import LIOUVILLE10
from adiabatic_ss.towers import liouville_diagnostic

Ns = [4, 8, 16, 32, 64]
for name, alpha in (("sqrt2", math.sqrt(2)), ("liouville10", LIOUVILLE10)):
    rep = liouville_diagnostic(alpha, Ns)
    print(f"{name}: fitted log-log slope of g(N) = {rep.g_slope:.2e}")
    for row in rep.rows:
        print(f"  N={row['N']:3d}  s(N)={row['s']:.3e}  g(N)={row['g']:.6f}")

# the Liouville slope only reveals its tiny divisors at |n| ~ 10^6 and beyond,
# far outside any desk-scale truncation, so both columns look alike here
