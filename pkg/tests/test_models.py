import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adiabatic_ss import (
    LIOUVILLE10, InvalidInput, KroneckerSpec, ProductSpec, RandomSpec, betti_numbers, kronecker_t2,
    page, product_bundle, random_complex, validate,
)
from adiabatic_ss.adiabatic import laplacian_spectrum
from adiabatic_ss.models import parse_alpha

from oracles import torus_eigenvalues

GOLDEN = (1 + math.sqrt(5)) / 2


def test_parse_alpha_literals():
    assert parse_alpha("golden") == GOLDEN
    assert parse_alpha("sqrt2") == math.sqrt(2)
    assert parse_alpha("liouville10") == LIOUVILLE10
    assert parse_alpha("0.25") == 0.25
    assert math.isclose(LIOUVILLE10, sum(10.0 ** -math.factorial(j) for j in range(1, 9)))
    with pytest.raises(InvalidInput):
        parse_alpha("pi-ish")


def test_kronecker_shape():
    C = kronecker_t2(KroneckerSpec(alpha=GOLDEN, N=3))
    assert (C.p, C.q) == (1, 1)
    assert np.all(C.dims == 49)
    assert not any(np.any(M) for M in C.d2m1.values())
    assert C.has_identity_gram()
    with pytest.raises(InvalidInput):
        kronecker_t2(KroneckerSpec(alpha=1.0, N=0))


@pytest.mark.parametrize("alpha", [0.0, GOLDEN, math.sqrt(2), LIOUVILLE10])
def test_kronecker_validates_exactly(alpha):
    rep = validate(kronecker_t2(KroneckerSpec(alpha=alpha, N=4)))
    assert rep.passed and rep.max_residual <= 1e-12


@pytest.mark.parametrize("alpha", [0.0, GOLDEN, 0.37])
@pytest.mark.parametrize("h", [1.0, 0.1, 1e-3])
def test_kronecker_function_spectrum_matches_mode_formula(alpha, h):
    N = 4
    C = kronecker_t2(KroneckerSpec(alpha=alpha, N=N))
    got = laplacian_spectrum(C, 0, h)
    want = torus_eigenvalues(alpha, N, h)
    scale = want.max()
    assert np.allclose(got, want, rtol=1e-9, atol=1e-9 * scale)


def test_product_mode_formula_alpha_zero():
    # 4π²(m² + h²n²) per mode
    C = kronecker_t2(KroneckerSpec(alpha=0.0, N=2))
    h = 0.5
    got = laplacian_spectrum(C, 0, h)
    want = sorted([0.0] + [4 * math.pi ** 2 * (m * m + h * h * n * n)
                           for m in range(0, 3) for n in range(-2, 3) if m > 0 or n > 0] * 2)
    assert np.allclose(got, want, rtol=1e-12, atol=1e-9)


def test_kronecker_degree_one_zero_modes():
    C = kronecker_t2(KroneckerSpec(alpha=GOLDEN, N=4))
    for h in (1.0, 1e-2):
        vals = laplacian_spectrum(C, 1, h)
        assert np.count_nonzero(vals <= 1e-9 * vals.max()) == 2


@pytest.mark.parametrize("h", [1.0, 0.3, 1e-2])
def test_product_matches_kronecker_alpha_zero(h):
    P = product_bundle(ProductSpec(N_leaf=2, N_base=2))
    K = kronecker_t2(KroneckerSpec(alpha=0.0, N=2))
    assert validate(P).passed
    for r in range(3):
        a, b = laplacian_spectrum(P, r, h), laplacian_spectrum(K, r, h)
        # same mode box, different basis order
        assert a.shape == b.shape
        assert np.allclose(np.sort(a), np.sort(b), rtol=1e-9, atol=1e-9 * a.max())


def test_product_pages_degenerate_at_two():
    P = product_bundle(N=3)
    assert betti_numbers(P) == [1, 2, 1]
    E2 = page(P, 2)
    assert E2.dims_table().tolist() == [[1, 1], [1, 1]]
    for k in (2, 3):
        Ek = page(P, k)
        assert all(Ek.dk_rank(u, v) == 0 for u, v in P.bidegrees())
    assert not any(np.any(M) for M in P.d2m1.values())


def test_product_graded_commutation():
    P = product_bundle(N=2)
    # D10 D01 + D01 D10 = 0 on Ω^{0,0}
    lhs = P.d10[(0, 1)] @ P.d01[(0, 0)] + P.d01[(1, 0)] @ P.d10[(0, 0)]
    assert np.allclose(lhs, 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000), st.integers(0, 2), st.integers(0, 3))
def test_random_complex_validates(seed, q, p):
    C = random_complex(RandomSpec(seed=seed, q=q, p=p))
    rep = validate(C)
    assert rep.passed and rep.max_residual <= 1e-12 * max(1.0, rep.scale)


def test_random_complex_rejects_large_q():
    with pytest.raises(InvalidInput):
        random_complex(RandomSpec(seed=0, q=3))


def test_random_complex_deterministic():
    a = random_complex(RandomSpec(seed=11, q=2))
    b = random_complex(RandomSpec(seed=11, q=2))
    for name in ("d01", "d10", "d2m1"):
        for key in a.bidegrees():
            assert np.array_equal(getattr(a, name)[key], getattr(b, name)[key])


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 100_000))
def test_random_eps_invariance(seed):
    C0 = random_complex(RandomSpec(seed=seed, q=2, eps=0.0))
    C1 = random_complex(RandomSpec(seed=seed, q=2, eps=0.3))
    assert betti_numbers(C0) == betti_numbers(C1)
    for k in (0, 1, 2, 3, math.inf):
        assert np.array_equal(page(C0, k).dims_table(), page(C1, k).dims_table())


def test_random_eps_zero_page_one_is_ker_mod_im_of_d01():
    C = random_complex(RandomSpec(seed=4, q=2, eps=0.0))
    E1 = page(C, 1).dims_table()
    for u, v in C.bidegrees():
        out = C.d01[(u, v)]
        inc = C.d01[(u, v - 1)] if v >= 1 else np.zeros((C.dim(u, v), 0))
        ker = C.dim(u, v) - (np.linalg.matrix_rank(out) if out.size else 0)
        im = np.linalg.matrix_rank(inc) if inc.size else 0
        assert E1[u, v] == ker - im
