"""
Hodge and jet towers
====================

Three nested families of harmonic-type subspaces, compared level by level.
"""

from adiabatic_ss import RandomSpec, random_complex
from adiabatic_ss.adiabatic import sweep
from adiabatic_ss.towers import (
    FORMAN, MAZZEO_MELROSE, eigenspace_convergence, hodge_degree_subspace, hodge_tower,
    inclusion_report, jet_tower,
)

C = random_complex(RandomSpec(seed=11, q=2))
H = hodge_tower(C)
F = jet_tower(C, FORMAN)
M = jet_tower(C, MAZZEO_MELROSE)

for k in range(1, H.k_max + 1):
    print(f"level {k}: hodge {H.dims_table(k).tolist()}")

rep = inclusion_report(C, H, F, M)
for rel in ("forman_in_mm", "mm_in_forman_half", "forman_in_hodge", "forman_eq_hodge"):
    print(f"{rel:20s} max residual {rep.max_residual(rel):.2e}")

# eigenvectors of the small eigenvalues approach the level-2 harmonic space as h -> 0
sw = sweep(C, keep_vectors=True)
for r in range(C.top_degree + 1):
    if hodge_degree_subspace(C, H, 2, r).dim == 0:
        continue
    a = eigenspace_convergence(C, sw, H, 2, r, 1e-1).max_angle
    b = eigenspace_convergence(C, sw, H, 2, r, 1e-4).max_angle
    print(f"degree {r}: max angle {a:.2e} at h=1e-1, {b:.2e} at h=1e-4")
