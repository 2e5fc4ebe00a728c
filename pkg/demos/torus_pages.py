"""
Spectral-sequence pages of a linear foliation of the torus
==========================================================

Rational and irrational slopes give the same de Rham cohomology but very
different first pages.
"""

import math

import numpy as np

from adiabatic_ss import KroneckerSpec, betti_numbers, kronecker_t2, pages

golden = (1 + math.sqrt(5)) / 2

for alpha in (0.0, golden):
    C = kronecker_t2(KroneckerSpec(alpha=alpha, N=4))
    P = pages(C)
    print(f"slope {alpha:.4f}: betti {betti_numbers(C)}")
    for k in sorted(P, key=lambda k: (k == math.inf, k)):
        # rows are transverse degree u, columns leafwise degree v
        print(f"  E_{k}:", np.array2string(P[k].dims_table()).replace("\n", ""))

# with slope 0 every leaf is closed, so E_1 keeps one mode per circle of leaves;
# the irrational slope already collapses to cohomology at E_1
