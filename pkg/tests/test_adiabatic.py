import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from adiabatic_ss import (
    BigradedComplex, InvalidInput, KroneckerSpec, RandomSpec, betti_numbers, kronecker_t2, page,
    pages, random_complex,
)
from adiabatic_ss.adiabatic import (
    default_grid, dirac_inequality_check, h_norm, laplacian_spectrum, metric_equivalence_check,
    rescaled_d, rescaled_ops, sweep, theorem_a_report, theta, thread_count,
)
from adiabatic_ss.complex import adjoint_components, total_d_matrix

from oracles import torus_eigenvalues

GOLDEN = (1 + math.sqrt(5)) / 2


def leafwise_only(seed=0):
    """Random complex with D10 = D2m1 = 0 (pure leafwise differential)."""
    C = random_complex(RandomSpec(seed=seed, q=2, eps=0.0))
    return BigradedComplex(C.p, C.q, C.dims, d01=C.d01)


def hodge_laplacian_spectrum(C, r, metric_scale=None):
    """Spectrum of dδ + δd with gram adjoints, optionally with per-piece metric weights."""
    def gram(s):
        blocks = []
        for u, v, _, n in C.pieces(s):
            w = 1.0 if metric_scale is None else metric_scale(u)
            blocks.append(w * C.gram[(u, v)])
        return scipy.linalg.block_diag(*blocks) if blocks else np.zeros((0, 0))

    n = C.degree_dim(r)
    G = gram(r)
    L = np.zeros((n, n))
    d_out = total_d_matrix(C, r)
    if d_out.size:
        L += np.linalg.solve(G, d_out.T @ gram(r + 1) @ d_out)
    d_in = total_d_matrix(C, r - 1)
    if d_in.size:
        L += d_in @ np.linalg.solve(gram(r - 1), d_in.T @ G)
    return np.sort(np.linalg.eigvals(L).real)


def test_default_grid():
    g = default_grid()
    assert g.size == 12 and math.isclose(g[0], 1e-1) and math.isclose(g[-1], 1e-4)
    assert np.all(np.diff(g) < 0)


def test_theta_identity_and_degree_one_block():
    C = kronecker_t2(KroneckerSpec(alpha=0.5, N=1))
    for r, T in theta(C, 1.0).items():
        assert np.array_equal(T, np.eye(C.degree_dim(r)))
    a, b = C.dim(0, 1), C.dim(1, 0)
    h = 0.3
    assert np.allclose(np.diag(theta(C, h)[1]), [1.0] * a + [h] * b)
    with pytest.raises(InvalidInput):
        theta(C, 0.0)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 100_000), st.sampled_from([1.0, 0.3, 1e-2]))
def test_theta_conjugation(seed, h):
    C = random_complex(RandomSpec(seed=seed, q=2))
    T = theta(C, h)
    for r in range(C.top_degree):
        D = total_d_matrix(C, r)
        if not D.size:
            continue
        lhs = T[r + 1] @ D @ np.linalg.inv(T[r])
        assert np.allclose(lhs, rescaled_d(C, r, h), atol=1e-9 * max(1, np.abs(D).max()))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 100_000), st.sampled_from([1.0, 0.5, 0.05]))
def test_dh_squares_to_zero(seed, h):
    C = random_complex(RandomSpec(seed=seed, q=2))
    ops = rescaled_ops(C, h)
    for r in range(C.top_degree):
        prod = ops.dh[r + 1] @ ops.dh[r]
        if prod.size:
            assert np.linalg.norm(prod, 2) <= 1e-9 * max(1.0, np.linalg.norm(ops.dh[r], 2)) ** 2
    assert ops.dirac_square_residual() <= 1e-9 * max(1.0, np.linalg.norm(ops.Dh, 2) ** 2)


def test_h_one_is_hodge_laplacian():
    C = random_complex(RandomSpec(seed=21, q=2, gram_noise=0.3))
    for r in range(C.top_degree + 1):
        got = laplacian_spectrum(C, r, 1.0)
        want = hodge_laplacian_spectrum(C, r)
        assert np.allclose(got, want, atol=1e-8 * max(1, want.max()))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 100_000), st.sampled_from([0.5, 0.1]))
def test_isospectral_to_adiabatic_metric_laplacian(seed, h):
    # Δ_h is conjugate to the Laplacian of d for the metric with weight h^{-q} h^{2u} on transverse degree u
    C = random_complex(RandomSpec(seed=seed, q=2, gram_noise=0.2))
    for r in range(C.top_degree + 1):
        got = laplacian_spectrum(C, r, h)
        want = hodge_laplacian_spectrum(C, r, metric_scale=lambda u: h ** (-C.q) * h ** (2 * u))
        if not want.size:
            continue
        assert np.allclose(got, want, atol=1e-7 * max(1, want.max()), rtol=1e-7)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 100_000), st.sampled_from([1.0, 0.1, 1e-3]))
def test_zero_eigenvalues_count_betti(seed, h):
    C = random_complex(RandomSpec(seed=seed, q=2))
    beta = betti_numbers(C)
    for r in range(C.top_degree + 1):
        vals = laplacian_spectrum(C, r, h)
        if vals.size:
            # genuine small branches are O(h^6) >= 1e-18 here; rounding zeros sit near (eps·‖d_h‖)²
            assert np.count_nonzero(vals <= 1e-24 * max(1.0, vals.max())) == beta[r]


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 100_000), st.sampled_from([1.0, 0.1]))
def test_supersymmetric_pairing(seed, h):
    C = random_complex(RandomSpec(seed=seed, q=2))
    ops = rescaled_ops(C, h)
    for r in range(C.top_degree):
        d = ops.dh[r]
        if not d.size:
            continue
        a = np.linalg.eigvalsh(d.T @ d)
        b = np.linalg.eigvalsh(d @ d.T)
        cut = 1e-9 * max(1.0, a.max(initial=0), b.max(initial=0))
        assert np.allclose(np.sort(a[a > cut]), np.sort(b[b > cut]), rtol=1e-8)


def test_sweep_zero_complex_is_empty():
    C = BigradedComplex(1, 1, np.zeros((2, 2), dtype=int))
    sw = sweep(C)
    assert all(sw.values[r].size == 0 for r in sw.degrees)


def test_sweep_rejects_bad_grid():
    C = kronecker_t2(KroneckerSpec(alpha=0.5, N=1))
    with pytest.raises(InvalidInput):
        sweep(C, [1e-1, 1e-2])
    with pytest.raises(InvalidInput):
        sweep(C, [1e-1, 5e-2, 2e-2, 1.5e-2])


def test_sweep_matches_mode_oracle():
    C = kronecker_t2(KroneckerSpec(alpha=GOLDEN, N=4))
    sw = sweep(C, degrees=[0])
    for j, h in enumerate(sw.h_grid):
        want = torus_eigenvalues(GOLDEN, 4, h)
        got = sw.values[0][j]
        big = want > 1e-12
        assert np.allclose(got[big], want[big], rtol=1e-9)


def test_sweep_thread_determinism():
    C = random_complex(RandomSpec(seed=3, q=2))
    a = sweep(C, threads=1)
    b = sweep(C, threads=4)
    for r in a.degrees:
        assert np.array_equal(a.values[r], b.values[r])


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("ADIABATIC_SS_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("ADIABATIC_SS_THREADS", "many")
    with pytest.raises(InvalidInput):
        thread_count()


def test_sweep_eigenvalues_nonnegative_sorted():
    C = random_complex(RandomSpec(seed=12, q=2))
    sw = sweep(C)
    for r in sw.degrees:
        V = sw.values[r]
        assert np.all(np.diff(V, axis=1) >= 0)
        assert np.all(V >= -1e-9 * max(1.0, V.max(initial=0)))


def test_product_case_counts_small():
    C = kronecker_t2(KroneckerSpec(alpha=0.0, N=4))
    sw = sweep(C, degrees=[0, 1])
    assert sw.count(0, 1) == 9
    assert sw.count(0, 2) == 1
    assert sw.zero_branches(1).sum() == 2


def test_kronecker_irrational_branches():
    C = kronecker_t2(KroneckerSpec(alpha=GOLDEN, N=4))
    sw = sweep(C, degrees=[1])
    zero = sw.zero_branches(1)
    assert zero.sum() == 2
    slopes = sw.slopes(1)[~zero]
    assert np.all(np.abs(slopes) < 0.25)


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 100_000))
def test_counts_monotone_and_match_pages(seed):
    C = random_complex(RandomSpec(seed=seed, q=2))
    sw = sweep(C)
    P = pages(C)
    beta = betti_numbers(C)
    for r in sw.degrees:
        counts = [sw.count(r, k) for k in range(1, 6)]
        assert all(b <= a for a, b in zip(counts, counts[1:]))
        assert sw.count(r, 8) == beta[r]
        assert sw.count(r, 2) == P[2].degree_dims()[r]
    assert theorem_a_report(C, sw, P).all_match


def test_dirac_leafwise_only_passes_with_zero_constant():
    res = dirac_inequality_check(leafwise_only())
    assert res.passed and res.C_const == 0.0


def test_dirac_kronecker_passes():
    res = dirac_inequality_check(kronecker_t2(KroneckerSpec(alpha=GOLDEN, N=4)))
    assert res.passed and np.isfinite(res.C_const)


def test_dirac_adversarial_large_second_order_component():
    C = random_complex(RandomSpec(seed=7, q=2))
    # Θ-type rescaling keeps the structure identities: D01, t·D10, t²·D2m1
    big = C.scaled(1.0, 10.0, 100.0)
    base, res = dirac_inequality_check(C), dirac_inequality_check(big)
    assert res.passed
    assert res.C_const >= base.C_const


def test_h_norm_examples():
    C = random_complex(RandomSpec(seed=2, q=2, p=1))
    r = 1
    for h in (1.0, 0.1):
        for u, v, off, n in C.pieces(r):
            w = np.zeros(C.degree_dim(r))
            w[off:off + n] = np.arange(1, n + 1)
            want = h ** (-C.q / 2) * h ** u * np.linalg.norm(w)
            assert math.isclose(h_norm(C, w, h, r), want, rel_tol=1e-12)
    w = np.ones(C.degree_dim(r))
    assert math.isclose(h_norm(C, w, 1.0, r), np.linalg.norm(w), rel_tol=1e-12)


def test_metric_scaled_by_four_gives_ratio_two():
    C = random_complex(RandomSpec(seed=2, q=2))
    C4 = C.with_gram({k: 4 * G for k, G in C.gram.items()})
    res = metric_equivalence_check(C, C4, samples=4)
    assert np.allclose(res.ratio_min, 2.0) and np.allclose(res.ratio_max, 2.0)
    assert res.passed


def test_metric_equivalence_random_gram():
    C = random_complex(RandomSpec(seed=2, q=2))
    C2 = random_complex(RandomSpec(seed=2, q=2, gram_noise=0.4))
    res = metric_equivalence_check(C, C2, samples=8)
    assert res.passed and res.constant >= 1.0
