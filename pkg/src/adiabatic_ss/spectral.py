"""Spectral sequence of the filtration by transverse degree.

With Ω_k = ⊕_{u>=k} Ω^{u,·}:

    Z_k^{u,v} = Ω_u ∩ d⁻¹(Ω_{u+k}),   B_k^{u,v} = Ω_u ∩ d(Ω_{u-k}),
    E_k^{u,v} = Z_k^{u,v} / (Z_{k-1}^{u+1,v-1} + B_{k-1}^{u,v}).

Quotients are realized as orthogonal complements, so E_k representatives
are honest vectors of Ω^{u+v}.  Everything is computed on the whitened copy
``C.orthonormal_form``; subspace bases are in those coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .complex import BigradedComplex, betti_numbers, filtration_columns, total_d_matrix
from .errors import InternalCheckFailed, InvalidInput, PreconditionViolated
from .linalg import (
    DEFAULT_TOL, Subspace, Tolerances, min_norm_solve, orthonormalize,
    ortho_complement_in, rank, rank_kernel, subspace_sum,
)

INF = math.inf


def _page_key(k):
    return "inf" if k == INF else str(int(k))


class _Filtered:
    """Cached preimage/image computations for one complex and tolerance."""

    def __init__(self, C: BigradedComplex, tol: Tolerances):
        self.C = C
        self.W = C.orthonormal_form
        self.tol = tol
        self.D = {r: total_d_matrix(self.W, r) for r in range(-1, self.W.top_degree + 2)}
        self.ref = max([0.0] + [np.linalg.norm(M, 2) for M in self.D.values() if M.size])
        self._pre = {}
        self._Z = {}
        self._B = {}

    def d(self, r):
        if r in self.D:
            return self.D[r]
        return np.zeros((self.W.degree_dim(r + 1), self.W.degree_dim(r)))

    def _clamp(self, s):
        return min(max(s, 0), self.W.q + 1)

    def preimage(self, r, s, t) -> Subspace:
        """{x in Ω_s^r : d x in Ω_t^{r+1}}."""
        s, t = self._clamp(s), self._clamp(t)
        key = (r, s, t)
        if key in self._pre:
            return self._pre[key]
        n = self.W.degree_dim(r)
        cols = filtration_columns(self.W, s, r)
        eye = np.eye(n)
        if t <= s or not cols.any():
            out = Subspace(eye[:, cols])
        else:
            rows = ~filtration_columns(self.W, t, r + 1)
            sub = self.d(r)[np.ix_(rows, cols)]
            _, ker = rank_kernel(sub, self.tol, self.ref)
            out = Subspace(eye[:, cols] @ ker.basis)
        self._pre[key] = out
        return out

    def Z(self, k, u, v) -> Subspace:
        r = u + v
        if k == INF or k > self.W.q + 1:
            return self.preimage(r, u, self.W.q + 1)
        return self.preimage(r, u, u + max(int(k), 0))

    def B(self, k, u, v) -> Subspace:
        key = (k, u, v)
        if key in self._B:
            return self._B[key]
        r = u + v
        n = self.W.degree_dim(r)
        if k != INF and k < 0:
            out = Subspace.zero(n)
        else:
            src = 0 if k == INF else u - int(k)
            pre = self.preimage(r - 1, src, u)
            out = orthonormalize(self.d(r - 1) @ pre.basis, self.tol, self.ref)
        self._B[key] = out
        return out


_CACHE_ATTR = "_spectral_cache"


def _filtered(C: BigradedComplex, tol: Tolerances) -> _Filtered:
    cache = C.__dict__.setdefault(_CACHE_ATTR, {})
    if tol not in cache:
        cache[tol] = _Filtered(C, tol)
    return cache[tol]


def _check_bidegree(C, u, v):
    if not (0 <= u <= C.q and 0 <= v <= C.p):
        raise InvalidInput(f"bidegree ({u},{v}) outside the grid")


def _check_k(k):
    if k != INF and (not float(k).is_integer() or k < -1):
        raise InvalidInput(f"page index must be an integer >= -1 or INF, got {k}")


def compute_Zk(C: BigradedComplex, k, u: int, v: int, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    """Z_k^{u,v} inside (whitened) Ω^{u+v}; k <= 0 gives the whole Ω_u."""
    _check_k(k)
    _check_bidegree(C, u, v)
    return _filtered(C, tol).Z(k, u, v)


def compute_Bk(C: BigradedComplex, k, u: int, v: int, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    """B_k^{u,v} = d(Z_k^{u-k, v+k-1}); B_{-1} = 0 and B_∞ = Ω_u ∩ im d."""
    _check_k(k)
    _check_bidegree(C, u, v)
    return _filtered(C, tol).B(k, u, v)


@dataclass
class PageEntry:
    Z: Subspace
    Bkm1: Subspace
    reps: Subspace

    @property
    def dim(self) -> int:
        return self.reps.dim


@dataclass
class SpectralPage:
    """Page k: per-bidegree Z_k, B_{k-1}, E_k representatives and d_k blocks.

    ``dk[(u, v)]`` maps reps(u, v) coordinates to reps(u+k, v-k+1)
    coordinates; it is absent when the target is off the grid or k = ∞.
    """

    k: float
    p: int
    q: int
    entries: dict = field(default_factory=dict)
    dk: dict = field(default_factory=dict)
    ref: float = 1.0  # norm of d, the scale for rank decisions on d_k

    def dim(self, u, v) -> int:
        e = self.entries.get((u, v))
        return e.dim if e else 0

    def dims_table(self) -> np.ndarray:
        T = np.zeros((self.q + 1, self.p + 1), dtype=int)
        for (u, v), e in self.entries.items():
            T[u, v] = e.dim
        return T

    def degree_dims(self) -> list[int]:
        out = [0] * (self.p + self.q + 1)
        for (u, v), e in self.entries.items():
            out[u + v] += e.dim
        return out

    def dk_rank(self, u, v, tol: Tolerances = DEFAULT_TOL) -> int:
        M = self.dk.get((u, v))
        if M is None or M.size == 0:
            return 0
        return rank(M, tol, self.ref)

    def to_dict(self):
        return {
            "k": _page_key(self.k),
            "dims": {f"{u},{v}": e.dim for (u, v), e in sorted(self.entries.items())},
            "dk_ranks": {f"{u},{v}": self.dk_rank(u, v) for (u, v) in sorted(self.dk)},
        }


def page(C: BigradedComplex, k, tol: Tolerances = DEFAULT_TOL) -> SpectralPage:
    """E_k as orthogonal complements of Z_{k-1}^{u+1,v-1} + B_{k-1}^{u,v} in Z_k^{u,v}."""
    _check_k(k)
    if k != INF and k < 0:
        raise InvalidInput("pages start at k = 0")
    F = _filtered(C, tol)
    W = F.W
    out = SpectralPage(k=k, p=W.p, q=W.q, ref=F.ref)
    for u, v in W.bidegrees():
        Z = F.Z(k, u, v)
        km1 = INF if k == INF else k - 1
        Bm = F.B(km1, u, v)
        if u + 1 <= W.q:
            Zlow = F.Z(km1, u + 1, v - 1)
        else:
            Zlow = Subspace.zero(W.degree_dim(u + v))
        den = subspace_sum(Zlow, Bm, tol)
        try:
            reps = ortho_complement_in(den, Z, tol)
        except PreconditionViolated as exc:
            raise InternalCheckFailed(f"E_{_page_key(k)}^{u},{v}: denominator not inside Z_k ({exc})") from exc
        out.entries[(u, v)] = PageEntry(Z, Bm, reps)
    if k != INF:
        kk = int(k)
        for (u, v), e in out.entries.items():
            tgt = (u + kk, v - kk + 1)
            if tgt not in out.entries:
                continue
            R = out.entries[tgt].reps
            out.dk[(u, v)] = R.basis.T @ F.d(u + v) @ e.reps.basis
    return out


def pages(C: BigradedComplex, k_max: Optional[int] = None, tol: Tolerances = DEFAULT_TOL) -> dict:
    """Pages 0..k_max (default q+2, past stabilization) plus the ∞-page."""
    k_max = C.q + 2 if k_max is None else int(k_max)
    out = {k: page(C, k, tol) for k in range(0, k_max + 1)}
    out[INF] = page(C, INF, tol)
    return out


@dataclass
class ProjectedPage:
    """Projected page: z_k, b_k, b_{k-1}, e_k in piece coordinates, plus d_k on e_k."""

    k: float
    z: dict = field(default_factory=dict)
    b: dict = field(default_factory=dict)
    bkm1: dict = field(default_factory=dict)
    e: dict = field(default_factory=dict)
    dk: dict = field(default_factory=dict)

    def dim(self, u, v) -> int:
        return self.e[(u, v)].dim if (u, v) in self.e else 0

    def dims_table(self, C) -> np.ndarray:
        T = np.zeros((C.q + 1, C.p + 1), dtype=int)
        for (u, v), s in self.e.items():
            T[u, v] = s.dim
        return T


def _project_piece(F: _Filtered, S: Subspace, u, v) -> Subspace:
    a, b = F.W.offset(u + v, u)
    return orthonormalize(S.basis[a:b], F.tol, 1.0)


def projected_page(C: BigradedComplex, k, tol: Tolerances = DEFAULT_TOL) -> ProjectedPage:
    """z_k = π(Z_k), b_k = π(B_k), e_k = z_k ⊖ b_{k-1}.

    d_k on e_k: lift ω to x in Z_k with π x = ω (min-norm), then project
    π_{u+k}(d x) onto e_k at the target.  The lift ambiguity lies in
    Z_{k-1}^{u+1,v-1}, whose image projects into b_{k-1}, orthogonal to e_k.
    """
    _check_k(k)
    if k != INF and k < 0:
        raise InvalidInput("pages start at k = 0")
    F = _filtered(C, tol)
    W = F.W
    km1 = INF if k == INF else k - 1
    out = ProjectedPage(k=k)
    for u, v in W.bidegrees():
        z = _project_piece(F, F.Z(k, u, v), u, v)
        out.z[(u, v)] = z
        out.b[(u, v)] = _project_piece(F, F.B(k, u, v), u, v)
        bm = _project_piece(F, F.B(km1, u, v), u, v)
        out.bkm1[(u, v)] = bm
        try:
            out.e[(u, v)] = ortho_complement_in(bm, z, tol)
        except PreconditionViolated as exc:
            raise InternalCheckFailed(f"b_{{k-1}}^{u},{v} not inside z_k ({exc})") from exc
    if k == INF:
        return out
    kk = int(k)
    for u, v in W.bidegrees():
        tgt = (u + kk, v - kk + 1)
        if tgt not in out.e:
            continue
        E_src, E_tgt = out.e[(u, v)], out.e[tgt]
        r = u + v
        Zb = F.Z(k, u, v).basis
        a, b = W.offset(r, u)
        coeffs, res = min_norm_solve(Zb[a:b], E_src.basis, tol)
        if E_src.dim and res > 1e3 * tol.tol_orth * max(1.0, np.sqrt(E_src.dim)):
            raise InternalCheckFailed(f"e_k^{u},{v} representatives do not lift into Z_k (residual {res:.2e})")
        dx = F.d(r) @ (Zb @ coeffs)
        ta, tb = W.offset(r + 1, tgt[0])
        out.dk[(u, v)] = E_tgt.basis.T @ dx[ta:tb]
    return out


# -- Gromov–Shubin counting ------------------------------------------------------


def tie_guard(lam: float) -> float:
    return lam + 1e-8 * max(1.0, abs(lam))


@dataclass
class GromovShubinResult:
    r: int
    lam: float
    h: float
    N: int
    F_rm1: int
    F_r: int
    beta: int

    @property
    def identity_residual(self) -> int:
        return self.N - (self.F_rm1 + self.beta + self.F_r)

    def to_dict(self):
        return {"r": self.r, "lambda": self.lam, "h": self.h, "N": self.N, "F_rm1": self.F_rm1,
                "F_r": self.F_r, "beta": self.beta, "identity_residual": self.identity_residual}


def _rescaled_d(W, r, h):
    return total_d_matrix(W, r, 1.0, h, h * h)


def small_singular_count(M, lam, tol: Tolerances = DEFAULT_TOL, ref: float = 0.0) -> int:
    """#{nonzero singular values σ of M with σ² <= λ}."""
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    r = rank(M, tol, ref)
    nz = s[:r]
    return int(np.count_nonzero(nz ** 2 <= tie_guard(lam)))


def gromov_shubin(C: BigradedComplex, r: int, lam: float, h: float = 1.0,
                  tol: Tolerances = DEFAULT_TOL) -> GromovShubinResult:
    """N^r(λ) and F^{r-1}(λ), F^r(λ) for the rescaled differential d_h.

    F^r counts nonzero singular values of d_h on degree r with σ² <= λ; on
    (ker d_h)^⊥ the quadratic form ‖d_h ζ‖² is diagonalized by the right
    singular vectors, so this is the maximal dimension of a subspace where
    ‖d_h ζ‖ <= √λ ‖ζ‖.
    """
    from .linalg import gram_eig

    if not lam >= 0:
        raise InvalidInput("lambda must be >= 0")
    if not h > 0:
        raise InvalidInput("h must be > 0")
    W = C.orthonormal_form
    dm, dr = _rescaled_d(W, r - 1, h), _rescaled_d(W, r, h)
    ref = max([0.0] + [np.linalg.norm(_rescaled_d(W, s, h), 2) for s in range(W.top_degree + 1)
                       if W.degree_dim(s) and W.degree_dim(s + 1)])
    n = W.degree_dim(r)
    vals, _ = gram_eig(np.hstack([dm, dr.T]))
    N = int(np.count_nonzero(vals <= tie_guard(lam)))
    beta = n - rank(dm, tol, ref) - rank(dr, tol, ref) if n else 0
    return GromovShubinResult(
        r=r, lam=float(lam), h=float(h), N=N,
        F_rm1=small_singular_count(dm, lam, tol, ref),
        F_r=small_singular_count(dr, lam, tol, ref),
        beta=beta,
    )


# -- UVW decomposition and the m-counts ---------------------------------------


@dataclass
class DecompositionUVW:
    """U_ℓ ⊆ B_ℓ, V ⊆ Z_∞, W_ℓ ⊆ Z_ℓ with d(W_ℓ^{u,v}) = U_ℓ^{u+ℓ,v-ℓ+1}."""

    p: int
    q: int
    ell_max: int
    U: dict = field(default_factory=dict)  # (ell, u, v) -> Subspace
    V: dict = field(default_factory=dict)  # (u, v) -> Subspace
    W: dict = field(default_factory=dict)  # (ell, u, v) -> Subspace

    def dim_U(self, ell, u, v):
        s = self.U.get((ell, u, v))
        return s.dim if s else 0

    def dim_W(self, ell, u, v):
        s = self.W.get((ell, u, v))
        return s.dim if s else 0

    def dim_V(self, u, v):
        s = self.V.get((u, v))
        return s.dim if s else 0

    def Ek_dim(self, k, u, v) -> int:
        """dim E_k^{u,v} = dim V + Σ_{ℓ>=k} (dim U_ℓ + dim W_ℓ)."""
        top = self.ell_max
        lo = top + 1 if k == INF else int(k)
        return self.dim_V(u, v) + sum(self.dim_U(l, u, v) + self.dim_W(l, u, v) for l in range(lo, top + 1))


def decompose(C: BigradedComplex, tol: Tolerances = DEFAULT_TOL) -> DecompositionUVW:
    """Choose the complements W_ℓ, then U_ℓ := d(W_ℓ), then V; check they span Ω^r."""
    F = _filtered(C, tol)
    Wc = F.W
    ell_max = Wc.q + 1
    dec = DecompositionUVW(p=Wc.p, q=Wc.q, ell_max=ell_max)
    for u, v in Wc.bidegrees():
        r = u + v
        for ell in range(0, ell_max + 1):
            Z = F.Z(ell, u, v)
            if u + 1 <= Wc.q:
                low = F.Z(ell - 1, u + 1, v - 1)
            else:
                low = Subspace.zero(Wc.degree_dim(r))
            den = subspace_sum(low, F.Z(ell + 1, u, v), tol)
            try:
                Wl = ortho_complement_in(den, Z, tol)
            except PreconditionViolated as exc:
                raise InternalCheckFailed(f"W_{ell}^{u},{v}: {exc}") from exc
            if Wl.dim:
                dec.W[(ell, u, v)] = Wl
                img = orthonormalize(F.d(r) @ Wl.basis, tol, F.ref)
                if img.dim != Wl.dim:
                    raise InternalCheckFailed(f"d is not injective on W_{ell}^{u},{v}")
                dec.U[(ell, u + ell, v - ell + 1)] = img
        den = subspace_sum(F.Z(INF, u + 1, v - 1) if u + 1 <= Wc.q else Subspace.zero(Wc.degree_dim(r)),
                           F.B(INF, u, v), tol)
        try:
            dec.V[(u, v)] = ortho_complement_in(den, F.Z(INF, u, v), tol)
        except PreconditionViolated as exc:
            raise InternalCheckFailed(f"V^{u},{v}: {exc}") from exc
    for r in range(Wc.top_degree + 1):
        n = Wc.degree_dim(r)
        blocks = [S.basis for key, S in list(dec.U.items()) + list(dec.W.items()) if key[1] + key[2] == r]
        blocks += [S.basis for (u, v), S in dec.V.items() if u + v == r]
        stacked = np.hstack(blocks) if blocks else np.zeros((n, 0))
        if stacked.shape[1] != n or rank(stacked, tol) != n:
            raise InternalCheckFailed(
                f"U/V/W bases in degree {r} do not form a basis: {stacked.shape[1]} vectors, rank "
                f"{rank(stacked, tol) if stacked.size else 0}, dim {n}")
    return dec


@dataclass
class CountingTable:
    """m[k][r] = Σ_{ℓ>=k, u+v=r} rank(d_ℓ on E_ℓ^{u,v}), with the witnesses L_k."""

    m: dict  # k -> list over r
    beta: list
    Ek: dict  # k -> list over r of dim E_k^r
    L: dict = field(default_factory=dict)  # (k, u, v) -> Subspace
    C: Optional[BigradedComplex] = None

    def corollary_residuals(self) -> dict:
        """dim E_k^r - (m_k^{r-1} + β^r + m_k^r) for every k, r; all zero when it holds."""
        out = {}
        for k, dims in self.Ek.items():
            mk = self.m[k]
            out[k] = [dims[r] - ((mk[r - 1] if r >= 1 else 0) + self.beta[r] + mk[r]) for r in range(len(dims))]
        return out

    def N(self, r, lam, h=1.0):
        return gromov_shubin(self.C, r, lam, h).N

    def F(self, r, lam, h=1.0):
        return gromov_shubin(self.C, r + 1, lam, h).F_rm1 if r >= 0 else 0


def m_counts(C: BigradedComplex, all_pages: Optional[dict] = None, tol: Tolerances = DEFAULT_TOL,
             dec: Optional[DecompositionUVW] = None) -> CountingTable:
    all_pages = all_pages or pages(C, tol=tol)
    dec = dec or decompose(C, tol)
    nr = C.top_degree + 1
    finite = sorted(k for k in all_pages if k != INF)
    m = {}
    for k in finite:
        row = [0] * nr
        for ell in finite:
            if ell < k:
                continue
            P = all_pages[ell]
            for (u, v) in P.dk:
                row[u + v] += P.dk_rank(u, v, tol)
        m[k] = row
    L = {}
    for k in finite:
        for u, v in C.bidegrees():
            blocks = [dec.W[(l, u, v)].basis for l in range(k, dec.ell_max + 1) if (l, u, v) in dec.W]
            n = C.degree_dim(u + v)
            L[(k, u, v)] = Subspace(np.hstack(blocks)) if blocks else Subspace.zero(n)
    Ek = {k: all_pages[k].degree_dims() for k in finite}
    return CountingTable(m=m, beta=betti_numbers(C, tol), Ek=Ek, L=L, C=C)
