"""Concrete bigraded complexes.

* :func:`kronecker_t2` -- linear foliation of the flat torus by lines of slope
  ``alpha``, Fourier-truncated to modes |m|, |n| <= N in a real cos/sin basis.
* :func:`product_bundle` -- product of a leaf circle and a base circle.
* :func:`random_complex` -- direct sums of elementary two-term complexes,
  conjugated by a random filtration-raising automorphism.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .complex import COMPONENTS, BigradedComplex, total_d_matrix, validate
from .errors import InternalCheckFailed, InvalidInput
from .linalg import DEFAULT_TOL

LIOUVILLE10 = sum(10.0 ** -math.factorial(j) for j in range(1, 9))


def parse_alpha(alpha) -> float:
    """Slope from a number or one of the literals ``golden``, ``sqrt2``, ``liouville10``."""
    if isinstance(alpha, str):
        named = {
            "golden": (1 + math.sqrt(5)) / 2,
            "sqrt2": math.sqrt(2),
            "liouville10": LIOUVILLE10,
        }
        if alpha in named:
            return named[alpha]
        try:
            return float(alpha)
        except ValueError:
            raise InvalidInput(f"unknown slope {alpha!r}") from None
    return float(alpha)


@dataclass(frozen=True)
class KroneckerSpec:
    alpha: float = 0.0
    N: int = 4


@dataclass(frozen=True)
class ProductSpec:
    N_leaf: int = 4
    N_base: int = 4


@dataclass(frozen=True)
class RandomSpec:
    seed: int = 0
    q: Optional[int] = None
    p: Optional[int] = None
    max_dim: int = 8
    eps: float = 0.3
    gram_noise: float = 0.0


def torus_modes(N: int):
    """Canonical representatives (m, n) > 0 of the mode pairs ±(m, n) with |m|, |n| <= N."""
    return [(m, n) for m in range(0, N + 1) for n in range(-N, N + 1) if m > 0 or n > 0]


def torus_basis_dim(N: int) -> int:
    return (2 * N + 1) ** 2


def _rotation_operator(multipliers) -> np.ndarray:
    """Real form of multiplication by i·c on (constant, cos, sin, cos, sin, ...)."""
    n = 1 + 2 * len(multipliers)
    A = np.zeros((n, n))
    for j, c in enumerate(multipliers):
        i = 1 + 2 * j
        A[i, i + 1] = c
        A[i + 1, i] = -c
    return A


def kronecker_operators(alpha: float, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Leafwise (X) and transverse (Y) unit-frame derivatives on truncated functions."""
    s = math.sqrt(1 + alpha * alpha)
    modes = torus_modes(N)
    X = _rotation_operator([2 * math.pi * (m + alpha * n) / s for m, n in modes])
    Y = _rotation_operator([2 * math.pi * (n - alpha * m) / s for m, n in modes])
    return X, Y


def kronecker_multipliers(alpha: float, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-basis-function (a, b) multipliers, in basis order; zero for the constant."""
    s = math.sqrt(1 + alpha * alpha)
    a, b = [0.0], [0.0]
    for m, n in torus_modes(N):
        a += [2 * math.pi * (m + alpha * n) / s] * 2
        b += [2 * math.pi * (n - alpha * m) / s] * 2
    return np.array(a), np.array(b)


def kronecker_t2(spec: KroneckerSpec | None = None, *, alpha=None, N=None) -> BigradedComplex:
    """Truncated de Rham complex of T² foliated by lines of slope ``alpha``.

    Coframe: χ dual to the leafwise unit field X, ν dual to the transverse
    unit field Y.  Pieces are Ω^{0,0} = f, Ω^{0,1} = fχ, Ω^{1,0} = fν and
    Ω^{1,1} = f ν∧χ, each of dimension (2N+1)².
    """
    spec = spec or KroneckerSpec()
    alpha = parse_alpha(spec.alpha if alpha is None else alpha)
    N = spec.N if N is None else int(N)
    if N < 1:
        raise InvalidInput("truncation N must be >= 1")
    X, Y = kronecker_operators(alpha, N)
    n = X.shape[0]
    return BigradedComplex(
        p=1, q=1, dims=[[n, n], [n, n]],
        d01={(0, 0): X, (1, 0): -X},
        d10={(0, 0): Y, (0, 1): Y},
    )


def circle_derivative(N: int) -> np.ndarray:
    return _rotation_operator([2 * math.pi * k for k in range(1, N + 1)])


def product_bundle(spec: ProductSpec | None = None, *, N=None) -> BigradedComplex:
    """Product S¹_base × S¹_leaf; Ω^{u,v} = Ω^u(base) ⊗ Ω^v(leaf).

    D10 = d_base ⊗ id and D01 = (-1)^u id ⊗ d_leaf (Koszul sign), D2m1 = 0.
    """
    spec = spec or ProductSpec()
    Nl, Nb = (spec.N_leaf, spec.N_base) if N is None else (int(N), int(N))
    if Nl < 1 or Nb < 1:
        raise InvalidInput("truncations must be >= 1")
    dl, db = circle_derivative(Nl), circle_derivative(Nb)
    il, ib = np.eye(dl.shape[0]), np.eye(db.shape[0])
    n = dl.shape[0] * db.shape[0]
    return BigradedComplex(
        p=1, q=1, dims=[[n, n], [n, n]],
        d01={(0, 0): np.kron(ib, dl), (1, 0): -np.kron(ib, dl)},
        d10={(0, 0): np.kron(db, il), (0, 1): np.kron(db, il)},
    )


def _random_orthogonal(rng, n):
    if n == 0:
        return np.zeros((0, 0))
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_complex(spec: RandomSpec | None = None, **overrides) -> BigradedComplex:
    """Seeded random filtered complex with q <= 2.

    Normal form: isolated vectors plus elementary pairs x -> c·y whose shift
    is one of (0,1), (1,0), (2,-1), each piece rotated by a random orthogonal
    matrix.  The total differential is then conjugated by exp(eps·S), where S
    has bihomogeneous components of bidegree (1,-1) and (2,-2); S is strictly
    filtration-raising, so every page dimension is preserved.
    """
    spec = spec or RandomSpec()
    if overrides:
        spec = RandomSpec(**{**spec.__dict__, **overrides})
    rng = np.random.default_rng(spec.seed)
    q = spec.q if spec.q is not None else int(rng.integers(1, 3))
    p = spec.p if spec.p is not None else int(rng.integers(1, 4))
    if not 0 <= q <= 2:
        raise InvalidInput("random complexes need q <= 2")
    if p < 0:
        raise InvalidInput("p must be non-negative")
    cap = spec.max_dim
    dims = np.zeros((q + 1, p + 1), dtype=int)
    entries = {name: [] for name in COMPONENTS}  # (src, src_idx, tgt_idx, weight)

    for u in range(q + 1):
        for v in range(p + 1):
            dims[u, v] += int(rng.integers(0, 2))
    shifts = [s for s in COMPONENTS.items() if s[1][0] <= q]
    n_pairs = int(rng.integers(2, 3 + 2 * (p + 1) * (q + 1)))
    # with q = 2 always place one (2,-1) pair first, so that d_2 is nonzero
    forced = [("d2m1", COMPONENTS["d2m1"])] if q == 2 and p >= 1 else []
    for i in range(n_pairs + len(forced)):
        if i < len(forced):
            name, (du, dv) = forced[i]
        else:
            name, (du, dv) = shifts[int(rng.integers(len(shifts)))]
        sources = [(u, v) for u in range(q + 1) for v in range(p + 1)
                   if 0 <= u + du <= q and 0 <= v + dv <= p]
        if not sources:
            continue
        u, v = sources[int(rng.integers(len(sources)))]
        if dims[u, v] >= cap or dims[u + du, v + dv] >= cap:
            continue
        w = float(rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0]))
        entries[name].append(((u, v), int(dims[u, v]), int(dims[u + du, v + dv]), w))
        dims[u, v] += 1
        dims[u + du, v + dv] += 1

    rot = {(u, v): _random_orthogonal(rng, int(dims[u, v])) for u in range(q + 1) for v in range(p + 1)}
    comps = {}
    for name, (du, dv) in COMPONENTS.items():
        comps[name] = {}
        for (u, v), si, ti, w in entries[name]:
            key = (u, v)
            if key not in comps[name]:
                comps[name][key] = np.zeros((dims[u + du, v + dv], dims[u, v]))
            comps[name][key][ti, si] = w
        for (u, v), M in comps[name].items():
            comps[name][(u, v)] = rot[(u + du, v + dv)] @ M @ rot[(u, v)].T
    base = BigradedComplex(p, q, dims, comps["d01"], comps["d10"], comps["d2m1"])
    C = _conjugate_filtered(base, rng, spec.eps)

    if spec.gram_noise > 0:
        gram = {}
        for key in C.bidegrees():
            n = C.dim(*key)
            A = rng.standard_normal((n, n))
            gram[key] = np.eye(n) + spec.gram_noise * A @ A.T / max(n, 1)
        C = C.with_gram(gram)
    rep = validate(C, DEFAULT_TOL)
    if not rep.passed:
        raise InternalCheckFailed(f"random complex failed validation: {rep.failures()[:3]}")
    return C


def _conjugate_filtered(C: BigradedComplex, rng, eps: float) -> BigradedComplex:
    if eps == 0:
        return C
    # S_r on Ω^r with blocks (u,v) -> (u+1,v-1) and (u+2,v-2)
    E, Einv = {}, {}
    for r in range(-1, C.top_degree + 2):
        n = C.degree_dim(r)
        S = np.zeros((n, n))
        for u, v, off, m in C.pieces(r):
            for du in (1, 2):
                a, b = C.offset(r, u + du)
                if b > a and m:
                    S[a:b, off:off + m] = rng.standard_normal((b - a, m)) / max(1.0, math.sqrt(m))
        # S is nilpotent of order <= 3 because q <= 2
        S2 = S @ S
        E[r] = np.eye(n) + eps * S + 0.5 * eps * eps * S2
        Einv[r] = np.eye(n) - eps * S + 0.5 * eps * eps * S2
    comps = {name: {} for name in COMPONENTS}
    for r in range(C.top_degree + 1):
        D = E[r + 1] @ total_d_matrix(C, r) @ Einv[r]
        for u, v, off, m in C.pieces(r):
            for tu in range(C.q + 1):
                a, b = C.offset(r + 1, tu)
                block = D[a:b, off:off + m]
                shift = tu - u
                name = {0: "d01", 1: "d10", 2: "d2m1"}.get(shift)
                if name is None:
                    if block.size and np.abs(block).max() > 1e-12:
                        raise InternalCheckFailed("conjugated differential has a component of forbidden bidegree")
                    continue
                if block.size:
                    comps[name][(u, v)] = block
    return BigradedComplex(C.p, C.q, C.dims, comps["d01"], comps["d10"], comps["d2m1"], C.gram)
