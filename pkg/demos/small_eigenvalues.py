"""
Small eigenvalues in the adiabatic limit
========================================

Sweep the rescaled Laplacian over h and count branches that vanish like h^(2k).
"""

import numpy as np

from adiabatic_ss import RandomSpec, pages, random_complex
from adiabatic_ss.adiabatic import default_grid, sweep, theorem_a_report

C = random_complex(RandomSpec(seed=7, q=2))
grid = default_grid()
sw = sweep(C, grid)

# the sorted branches of degree 1; each column is one λ_i(h)
np.set_printoptions(precision=3, linewidth=120)
print("h grid:", grid)
print("degree 1, first branches:\n", sw.values[1][:, :6])

# fitted log-log slopes over the small-h half of the grid (nan for zero branches)
print("slopes:", sw.slopes(1))

P = pages(C)
rep = theorem_a_report(C, sw, P)
for row in rep.rows:
    print(row)
print("counts match page dimensions:", rep.all_match)
