"""Spectral sequences and adiabatic limits of finite bigraded complexes."""
from .errors import InternalCheckFailed, InvalidInput, PreconditionViolated
from .linalg import (
    DEFAULT_TOL, Subspace, Tolerances, min_norm_solve, ortho_complement_in, orthonormalize,
    principal_angles, rank_kernel, subspace_intersect, subspace_sum, sym_eig,
)
from .complex import (
    BigradedComplex, adjoint_components, betti, betti_numbers, euler_characteristic,
    filtration_subspace, total_d, validate,
)
from .spectral import (
    INF, CountingTable, DecompositionUVW, SpectralPage, compute_Bk, compute_Zk, decompose,
    gromov_shubin, m_counts, page, pages, projected_page,
)
from .models import (
    LIOUVILLE10, KroneckerSpec, ProductSpec, RandomSpec, kronecker_t2, product_bundle, random_complex,
)

__version__ = "0.1.0"
