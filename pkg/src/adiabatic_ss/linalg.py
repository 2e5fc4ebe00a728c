"""Dense linear algebra with an explicit tolerance policy.

Every rank decision in the package goes through :func:`rank_kernel` or
:func:`orthonormalize`, both of which use a singular-value cutoff relative to
the largest singular value.  Subspaces always carry an orthonormal basis, and
quotients are represented by orthogonal complements.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidInput, PreconditionViolated


@dataclass(frozen=True)
class Tolerances:
    tol_rank: float = 1e-10
    tol_orth: float = 1e-9
    tol_eq: float = 1e-9
    tol_eig: float = 1e-9

    def __post_init__(self):
        for name in ("tol_rank", "tol_orth", "tol_eq", "tol_eig"):
            if not getattr(self, name) > 0:
                raise InvalidInput(f"{name} must be strictly positive")


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True, eq=False)
class Subspace:
    """Column span of an orthonormal ``basis`` inside R^ambient_dim."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2:
            raise InvalidInput("subspace basis must be a 2-d array")
        object.__setattr__(self, "basis", b)

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(np.zeros((ambient_dim, 0)))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(np.eye(ambient_dim))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def project(self, x: np.ndarray) -> np.ndarray:
        return self.basis @ (self.basis.T @ x)

    def orthonormality_residual(self) -> float:
        if self.dim == 0:
            return 0.0
        return float(np.linalg.norm(self.basis.T @ self.basis - np.eye(self.dim), 2))

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def _check_finite(M: np.ndarray, what: str = "matrix") -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise InvalidInput(f"{what} has non-finite entries")
    return M


def _numerical_rank(s: np.ndarray, tol_rank: float, ref: float = 0.0) -> int:
    top = max(s[0], ref) if s.size else ref
    if s.size == 0 or top == 0.0:
        return 0
    return int(np.count_nonzero(s > tol_rank * top))


def rank_kernel(M, tol: Tolerances = DEFAULT_TOL, ref: float = 0.0) -> tuple[int, Subspace]:
    """Numerical rank of ``M`` and an orthonormal basis of its kernel.

    The cutoff is ``tol_rank`` times the largest singular value, or times
    ``ref`` when that is larger (used when ``M`` is a block of a bigger map).
    """
    M = _check_finite(M)
    if M.ndim != 2:
        raise InvalidInput("expected a 2-d matrix")
    n = M.shape[1]
    if M.shape[0] == 0 or n == 0:
        return 0, Subspace.full(n)
    _, s, vt = np.linalg.svd(M, full_matrices=True)
    rank = _numerical_rank(s, tol.tol_rank, ref)
    return rank, Subspace(vt[rank:].T.copy())


def rank(M, tol: Tolerances = DEFAULT_TOL, ref: float = 0.0) -> int:
    M = _check_finite(M)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return _numerical_rank(s, tol.tol_rank, ref)


def orthonormalize(V, tol: Tolerances = DEFAULT_TOL, ref: float = 0.0) -> Subspace:
    """Orthonormal basis for the column span of ``V`` (rank-revealing, via SVD)."""
    V = _check_finite(V)
    if V.ndim == 1:
        V = V[:, None]
    if V.shape[1] == 0 or V.shape[0] == 0:
        return Subspace.zero(V.shape[0])
    u, s, _ = np.linalg.svd(V, full_matrices=False)
    r = _numerical_rank(s, tol.tol_rank, ref)
    return Subspace(u[:, :r].copy())


def image(M, tol: Tolerances = DEFAULT_TOL, ref: float = 0.0) -> Subspace:
    return orthonormalize(M, tol, ref)


def _same_ambient(A: Subspace, B: Subspace):
    if A.ambient_dim != B.ambient_dim:
        raise InvalidInput(f"ambient dimension mismatch: {A.ambient_dim} vs {B.ambient_dim}")


def subspace_sum(A: Subspace, B: Subspace, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    _same_ambient(A, B)
    return orthonormalize(np.hstack([A.basis, B.basis]), tol)


def subspace_intersect(A: Subspace, B: Subspace, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    """A ∩ B as the common kernel of the complementary projections."""
    _same_ambient(A, B)
    n = A.ambient_dim
    if A.dim == 0 or B.dim == 0:
        return Subspace.zero(n)
    eye = np.eye(n)
    stacked = np.vstack([eye - A.projector(), eye - B.projector()])
    # the stacked projector's singular values live in [0, sqrt(2)], so use an
    # absolute cutoff instead of one relative to a possibly-zero maximum
    _, s, vt = np.linalg.svd(stacked, full_matrices=True)
    s_full = np.zeros(n)
    s_full[: s.size] = s
    keep = s_full <= tol.tol_rank ** 0.5 * 1e-2
    return Subspace(vt[keep].T.copy())


def inclusion_residual(A: Subspace, B: Subspace) -> float:
    """max over unit a in A of the distance from a to B (0 iff A ⊆ B)."""
    _same_ambient(A, B)
    if A.dim == 0:
        return 0.0
    resid = A.basis - B.project(A.basis)
    return float(np.linalg.norm(resid, 2))


def span_equal(A: Subspace, B: Subspace, tol: float) -> bool:
    return A.dim == B.dim and inclusion_residual(A, B) <= tol and inclusion_residual(B, A) <= tol


def ortho_complement_in(A: Subspace, B: Subspace, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    """Orthogonal complement C of A inside B, so that B = A ⊕ C orthogonally."""
    _same_ambient(A, B)
    res = inclusion_residual(A, B)
    if res > tol.tol_orth:
        raise PreconditionViolated(f"A is not contained in B (projection residual {res:.3e})")
    if B.dim == 0:
        return Subspace.zero(B.ambient_dim)
    # work in B's coordinates: complement of the coordinates of A
    coords = B.basis.T @ A.basis
    if coords.shape[1] == 0:
        return Subspace(B.basis.copy())
    u, s, _ = np.linalg.svd(coords, full_matrices=True)
    r = _numerical_rank(s, tol.tol_rank)
    return Subspace(B.basis @ u[:, r:])


def sym_eig(S, tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors of a symmetric matrix."""
    S = _check_finite(S)
    if S.shape[0] != S.shape[1]:
        raise InvalidInput("sym_eig needs a square matrix")
    if S.size == 0:
        return np.zeros(0), np.zeros((0, 0))
    scale = max(np.linalg.norm(S, 2), 1.0)
    if np.linalg.norm(S - S.T, 2) > tol.tol_eq * scale:
        raise InvalidInput("matrix is not symmetric within tol_eq")
    vals, vecs = scipy.linalg.eigh(0.5 * (S + S.T))
    return vals, vecs


def gram_eig(M) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of M Mᵀ through the SVD of M.

    Small eigenvalues come out with absolute error ~ eps·‖M‖·σ instead of the
    eps·‖M‖² a direct symmetric solve would give, which matters for branches
    that scale like high powers of the adiabatic parameter.
    """
    M = _check_finite(M)
    n = M.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0))
    if M.shape[1] == 0:
        return np.zeros(n), np.eye(n)
    u, s, _ = np.linalg.svd(M, full_matrices=True)
    vals = np.zeros(n)
    vals[: s.size] = s[:n] ** 2
    order = np.argsort(vals, kind="stable")
    return vals[order], u[:, order]


def min_norm_solve(A, b, tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, float]:
    """Minimum-norm least-squares solution of A x = b, with its residual norm."""
    A = _check_finite(A)
    b = _check_finite(b, "right-hand side")
    if A.shape[0] != b.shape[0]:
        raise InvalidInput(f"incompatible shapes {A.shape} and {b.shape}")
    if A.size == 0:
        x = np.zeros((A.shape[1],) + b.shape[1:])
        return x, float(np.linalg.norm(b))
    x, *_ = np.linalg.lstsq(A, b, rcond=tol.tol_rank)
    return x, float(np.linalg.norm(A @ x - b))


def principal_angles(A: Subspace, B: Subspace) -> np.ndarray:
    """Principal angles (ascending) between two subspaces; empty if either is zero."""
    _same_ambient(A, B)
    if A.dim == 0 or B.dim == 0:
        return np.zeros(0)
    return np.sort(scipy.linalg.subspace_angles(A.basis, B.basis))
