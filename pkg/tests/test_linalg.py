import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from adiabatic_ss import (
    DEFAULT_TOL, InvalidInput, PreconditionViolated, Subspace, Tolerances, min_norm_solve,
    ortho_complement_in, orthonormalize, principal_angles, rank_kernel, subspace_intersect,
    subspace_sum, sym_eig,
)
from adiabatic_ss.linalg import inclusion_residual, rank, span_equal

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def matrices(max_side=6):
    return st.tuples(st.integers(0, max_side), st.integers(0, max_side)).flatmap(
        lambda s: arrays(np.float64, s, elements=finite))


def low_rank(seed, m, n, k):
    g = np.random.default_rng(seed)
    return g.standard_normal((m, k)) @ g.standard_normal((k, n))


def test_tolerances_defaults_and_validation():
    t = Tolerances()
    assert t.tol_rank == 1e-10 and t.tol_eq == 1e-9
    with pytest.raises(InvalidInput):
        Tolerances(tol_rank=0.0)
    with pytest.raises(InvalidInput):
        Tolerances(tol_eq=-1.0)


def test_rank_kernel_known():
    M = np.array([[1.0, 2.0], [2.0, 4.0]])
    r, K = rank_kernel(M)
    assert r == 1
    assert K.dim == 1
    assert np.allclose(M @ K.basis, 0, atol=1e-12)
    assert np.isclose(abs(K.basis[:, 0] @ np.array([2.0, -1.0])) / np.sqrt(5), 1.0)


def test_rank_matches_matrix_rank_oracle():
    for seed in range(10):
        M = low_rank(seed, 7, 5, 3)
        assert rank(M) == np.linalg.matrix_rank(M) == 3


def test_rank_rejects_nonfinite():
    with pytest.raises(InvalidInput):
        rank_kernel(np.array([[np.nan]]))


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rank_transpose_invariant(M):
    assert rank(M) == rank(M.T)


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rank_nullity(M):
    r, K = rank_kernel(M)
    assert r + K.dim == M.shape[1]
    assert K.orthonormality_residual() < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 6), st.integers(0, 4), st.integers(0, 4))
def test_sum_intersect_dimension_formula(seed, n, a, b):
    g = np.random.default_rng(seed)
    a, b = min(a, n), min(b, n)
    A = orthonormalize(g.standard_normal((n, a)))
    B = orthonormalize(np.hstack([A.basis[:, : min(1, A.dim)], g.standard_normal((n, max(b - 1, 0)))]))
    S, I = subspace_sum(A, B), subspace_intersect(A, B)
    assert S.dim + I.dim == A.dim + B.dim
    assert inclusion_residual(I, A) < 1e-8 and inclusion_residual(I, B) < 1e-8
    assert inclusion_residual(A, S) < 1e-8


def test_intersect_known():
    e = np.eye(3)
    A = Subspace(e[:, :2])
    B = Subspace(e[:, 1:])
    I = subspace_intersect(A, B)
    assert I.dim == 1
    assert np.isclose(abs(I.basis[1, 0]), 1.0)
    assert subspace_sum(A, B).dim == 3


def test_ortho_complement():
    e = np.eye(4)
    A = Subspace(e[:, :3])
    B = Subspace(e[:, :1])
    Cpl = ortho_complement_in(B, A)
    assert Cpl.dim == 2
    assert np.allclose(B.basis.T @ Cpl.basis, 0)
    assert inclusion_residual(Cpl, A) < 1e-12
    with pytest.raises(PreconditionViolated):
        ortho_complement_in(A, B)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 7))
def test_sym_eig_reconstruction(seed, n):
    g = np.random.default_rng(seed)
    X = g.standard_normal((n, n))
    S = X + X.T
    w, V = sym_eig(S)
    assert np.all(np.diff(w) >= -1e-12)
    assert np.allclose(V @ np.diag(w) @ V.T, S, atol=1e-10 * max(1, np.abs(S).max()))
    assert np.allclose(w, scipy.linalg.eigvalsh(S))


def test_sym_eig_rejects_nonsymmetric():
    with pytest.raises(InvalidInput):
        sym_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_sym_eig_deterministic():
    g = np.random.default_rng(3)
    X = g.standard_normal((6, 6))
    S = X + X.T
    w1, V1 = sym_eig(S)
    w2, V2 = sym_eig(S.copy())
    assert np.array_equal(w1, w2) and np.array_equal(V1, V2)


def test_min_norm_solve_matches_pinv():
    A = low_rank(5, 6, 4, 2)
    b = np.random.default_rng(6).standard_normal(6)
    x, res = min_norm_solve(A, b)
    assert np.allclose(x, np.linalg.pinv(A) @ b, atol=1e-10)
    assert np.isclose(res, np.linalg.norm(A @ x - b))


def test_principal_angles():
    e = np.eye(3)
    A = Subspace(e[:, :1])
    t = 0.3
    B = Subspace(np.array([[np.cos(t)], [np.sin(t)], [0.0]]))
    assert np.allclose(principal_angles(A, B), [t])
    assert span_equal(A, A, 1e-12)
    assert not span_equal(A, B, 1e-8)


def test_default_tol_is_frozen():
    with pytest.raises(Exception):
        DEFAULT_TOL.tol_rank = 1.0
