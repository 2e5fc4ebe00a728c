"""Nested towers of harmonic-type spaces.

* Hodge tower 𝓗_k: 𝓗_1 = ker Δ_0, d_k on 𝓗_k via the filtration lift,
  𝓗_{k+1} = ker(d_k δ_k + δ_k d_k).
* Forman tower 𝕳_k: forms with a jet ω̃(h) = Σ_{j<k} h^j ω_j, ω_0 = ω, such that
  d_h ω̃ and δ_h ω̃ vanish modulo h^k.
* Mazzeo–Melrose tower 𝖍_k: the same with the single condition on Δ_h ω̃.

Subspaces live in whitened piece coordinates of Ω^{u,v}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .complex import BigradedComplex, total_d_matrix
from .errors import InternalCheckFailed, InvalidInput
from .linalg import (
    DEFAULT_TOL, Subspace, Tolerances, inclusion_residual, min_norm_solve, orthonormalize,
    principal_angles, rank_kernel, span_equal,
)
from .spectral import INF, projected_page

FORMAN = "forman"
MAZZEO_MELROSE = "mazzeo-melrose"


def _ref(W: BigradedComplex) -> float:
    return max([0.0] + [np.linalg.norm(total_d_matrix(W, r), 2) for r in range(W.top_degree)
                        if W.degree_dim(r) and W.degree_dim(r + 1)])


# -- leafwise Hodge decomposition ---------------------------------------------


@dataclass
class HodgeProjectors:
    Pi: dict
    P: dict
    Q: dict
    H1: dict  # (u, v) -> Subspace, ker Δ_0
    kernel_check: dict  # (u, v) -> bool: ker Δ_0 = ker D01 ∩ ker δ_{0,-1}

    def sum_residual(self) -> float:
        out = 0.0
        for key in self.Pi:
            n = self.Pi[key].shape[0]
            if n:
                out = max(out, float(np.linalg.norm(self.Pi[key] + self.P[key] + self.Q[key] - np.eye(n), 2)))
        return out

    def cross_residual(self) -> float:
        out = 0.0
        for key in self.Pi:
            if self.Pi[key].size:
                for A, B in ((self.Pi, self.P), (self.Pi, self.Q), (self.P, self.Q)):
                    out = max(out, float(np.linalg.norm(A[key] @ B[key], 2)))
        return out


def hodge_projectors(C: BigradedComplex, tol: Tolerances = DEFAULT_TOL) -> HodgeProjectors:
    """Π onto ker Δ_0, P onto im D01, Q onto im δ_{0,-1}, per bidegree."""
    W = C.orthonormal_form
    ref = _ref(W)
    Pi, P, Q, H1, chk = {}, {}, {}, {}, {}
    for u, v in W.bidegrees():
        n = W.dim(u, v)
        out_map = W.component("d01", u, v)  # Ω^{u,v} -> Ω^{u,v+1}
        in_map = W.component("d01", u, v - 1)  # Ω^{u,v-1} -> Ω^{u,v}
        lap = in_map @ in_map.T + out_map.T @ out_map
        _, ker_lap = rank_kernel(lap, tol, ref * ref)
        _, ker_both = rank_kernel(np.vstack([out_map, in_map.T]), tol, ref)
        chk[(u, v)] = ker_lap.dim == ker_both.dim and span_equal(ker_lap, ker_both, math.sqrt(tol.tol_rank))
        H1[(u, v)] = ker_both
        Pi[(u, v)] = ker_both.projector()
        P[(u, v)] = orthonormalize(in_map, tol, ref).projector() if in_map.size else np.zeros((n, n))
        Q[(u, v)] = orthonormalize(out_map.T, tol, ref).projector() if out_map.size else np.zeros((n, n))
    return HodgeProjectors(Pi, P, Q, H1, chk)


# -- Hodge tower ----------------------------------------------------------------


@dataclass
class HodgeTower:
    p: int
    q: int
    levels: dict = field(default_factory=dict)  # k -> {(u, v): Subspace}
    dk: dict = field(default_factory=dict)  # k -> {(u, v): Matrix}
    lift_residual: float = 0.0
    page_agreement: dict = field(default_factory=dict)  # k -> bool (k >= 2: 𝓗_k = e_k)

    @property
    def k_max(self) -> int:
        return max(self.levels)

    def level(self, k):
        if k == INF or k > self.k_max:
            return self.levels[self.k_max]
        return self.levels[int(k)]

    def dim(self, k, u, v) -> int:
        return self.level(k)[(u, v)].dim

    def dims_table(self, k) -> np.ndarray:
        T = np.zeros((self.q + 1, self.p + 1), dtype=int)
        for (u, v), S in self.level(k).items():
            T[u, v] = S.dim
        return T

    def deltak(self, k) -> dict:
        """δ_k keyed by its source (u+k, v-k+1): the transpose of d_k."""
        return {(u + k, v - k + 1): M.T for (u, v), M in self.dk[k].items()}

    def laplacian(self, k, u, v) -> np.ndarray:
        n = self.dim(k, u, v)
        L = np.zeros((n, n))
        out = self.dk[k].get((u, v))
        if out is not None:
            L += out.T @ out
        inc = self.dk[k].get((u - k, v + k - 1))
        if inc is not None:
            L += inc @ inc.T
        return L

    def dk_squared_residual(self) -> float:
        res = 0.0
        for k, blocks in self.dk.items():
            for (u, v), M in blocks.items():
                nxt = blocks.get((u + k, v - k + 1))
                if nxt is not None and M.size and nxt.size:
                    res = max(res, float(np.linalg.norm(nxt @ M, 2)))
        return res

    def to_dict(self):
        return {
            "kind": "hodge",
            "levels": {str(k): {f"{u},{v}": S.dim for (u, v), S in sorted(lv.items())}
                       for k, lv in sorted(self.levels.items())},
            "page_agreement": {str(k): bool(v) for k, v in sorted(self.page_agreement.items())},
            "lift_residual": self.lift_residual,
            "dk_squared_residual": self.dk_squared_residual(),
        }


def embed(W: BigradedComplex, u: int, v: int, basis: np.ndarray) -> np.ndarray:
    """Piece coordinates of Ω^{u,v} -> coordinates of Ω^{u+v}."""
    r = u + v
    out = np.zeros((W.degree_dim(r), basis.shape[1]))
    a, b = W.offset(r, u)
    out[a:b] = basis
    return out


def _lift_dk(W, D, u, v, k, omega_piece, tol):
    """γ = π_{u+k} d(ω + α) with π_{u+a} d(ω + α) = 0 for 0 < a < k, α in Ω^{u+1..u+k-1}."""
    r = u + v
    x = embed(W, u, v, omega_piece)
    dx = D @ x
    if k == 1:
        a, b = W.offset(r + 1, u + 1)
        return dx[a:b], 0.0
    cols = np.zeros(W.degree_dim(r), dtype=bool)
    rows = np.zeros(W.degree_dim(r + 1), dtype=bool)
    for a in range(1, k):
        s0, s1 = W.offset(r, u + a)
        cols[s0:s1] = True
        t0, t1 = W.offset(r + 1, u + a)
        rows[t0:t1] = True
    A = D[np.ix_(rows, cols)]
    alpha, _ = min_norm_solve(A, -dx[rows], tol)
    resid = np.linalg.norm(A @ alpha + dx[rows], axis=0) if alpha.size else np.linalg.norm(dx[rows], axis=0)
    full = x.copy()
    full[cols] += alpha
    g = D @ full
    a0, b0 = W.offset(r + 1, u + k)
    return g[a0:b0], float(resid.max()) if resid.size else 0.0


def hodge_tower(C: BigradedComplex, k_max: Optional[int] = None, tol: Tolerances = DEFAULT_TOL,
                cross_check: bool = True) -> HodgeTower:
    """𝓗_1..𝓗_{k_max} (default q+2) with d_k from the constructive lift."""
    W = C.orthonormal_form
    k_max = W.q + 2 if k_max is None else int(k_max)
    if k_max < 1:
        raise InvalidInput("k_max must be >= 1")
    ref = _ref(W)
    D = {r: total_d_matrix(W, r) for r in range(W.top_degree + 1)}
    proj = hodge_projectors(C, tol)
    tower = HodgeTower(p=W.p, q=W.q)
    tower.levels[1] = dict(proj.H1)
    lift_res = 0.0
    for k in range(1, k_max + 1):
        Hk = tower.levels[k]
        dk = {}
        for (u, v), S in Hk.items():
            tgt = (u + k, v - k + 1)
            if tgt not in Hk:
                continue
            if S.dim == 0 or Hk[tgt].dim == 0:
                dk[(u, v)] = np.zeros((Hk[tgt].dim, S.dim))
                continue
            gamma, res = _lift_dk(W, D[u + v], u, v, k, S.basis, tol)
            lift_res = max(lift_res, res)
            if res > 1e3 * tol.tol_orth * max(1.0, ref):
                raise InternalCheckFailed(f"d_{k} lift on H_{k}^{u},{v} is inconsistent (residual {res:.2e})")
            dk[(u, v)] = Hk[tgt].basis.T @ gamma
        tower.dk[k] = dk
        if k == k_max:
            break
        nxt = {}
        for (u, v), S in Hk.items():
            out = dk.get((u, v))
            inc = dk.get((u - k, v + k - 1))
            blocks = [M for M in (out, inc.T if inc is not None else None) if M is not None and M.size]
            if S.dim == 0:
                nxt[(u, v)] = S
                continue
            stacked = np.vstack(blocks) if blocks else np.zeros((0, S.dim))
            _, ker = rank_kernel(stacked, tol, ref)
            nxt[(u, v)] = Subspace(S.basis @ ker.basis)
        tower.levels[k + 1] = nxt
    tower.lift_residual = lift_res
    if cross_check:
        for k in range(2, k_max + 1):
            pp = projected_page(C, k, tol)
            ok = all(span_equal(tower.levels[k][key], pp.e[key], 1e3 * tol.tol_orth) for key in W.bidegrees())
            tower.page_agreement[k] = ok
            if not ok:
                raise InternalCheckFailed(f"H_{k} differs from z_k ⊖ b_(k-1)")
    return tower


def hodge_degree_subspace(C: BigradedComplex, tower: HodgeTower, k, r: int) -> Subspace:
    """𝓗_k^r = ⊕_u 𝓗_k^{u,r-u} inside (whitened) Ω^r."""
    W = C.orthonormal_form
    blocks = [embed(W, u, v, S.basis) for (u, v), S in tower.level(k).items() if u + v == r]
    n = W.degree_dim(r)
    return Subspace(np.hstack(blocks)) if blocks else Subspace.zero(n)


# -- jet towers -------------------------------------------------------------------


@dataclass
class PolynomialJet:
    """ω̃(h) = Σ_{j<order} h^j coeffs[j]; coeffs[0] lies in a single bidegree."""

    coeffs: list

    @property
    def order(self) -> int:
        return len(self.coeffs)

    def __call__(self, h):
        return sum(h ** j * c for j, c in enumerate(self.coeffs))


@dataclass
class JetTower:
    kind: str
    p: int
    q: int
    jet_length_extra: int = 0
    levels: dict = field(default_factory=dict)  # k -> {(u, v): Subspace}
    witnesses: dict = field(default_factory=dict)  # (k, u, v) -> list[PolynomialJet]

    def level(self, k):
        k = int(k)
        if k <= 0:
            return self.levels[0]
        return self.levels[min(k, max(self.levels))]

    def dim(self, k, u, v) -> int:
        return self.level(k)[(u, v)].dim

    def to_dict(self):
        return {
            "kind": self.kind,
            "levels": {str(k): {f"{u},{v}": S.dim for (u, v), S in sorted(lv.items())}
                       for k, lv in sorted(self.levels.items())},
        }


def _graded_parts(W: BigradedComplex, r: int):
    """d^{(a)} on degree r: the part of d_h of order h^a (a = 0, 1, 2)."""
    return [total_d_matrix(W, r, *w) for w in ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))]


def _operator_coefficients(W: BigradedComplex, r: int, kind: str):
    """Coefficients T_a (a = 0..) of the h-expansion of the operator applied to Ω^r."""
    if kind == FORMAN:
        d_out = _graded_parts(W, r)  # Ω^r -> Ω^{r+1}
        d_in = _graded_parts(W, r - 1)  # Ω^{r-1} -> Ω^r, so δ parts are transposes
        return [np.vstack([do, di.T]) for do, di in zip(d_out, d_in)]
    if kind == MAZZEO_MELROSE:
        d_out = _graded_parts(W, r)
        d_in = _graded_parts(W, r - 1)
        n = W.degree_dim(r)
        L = [np.zeros((n, n)) for _ in range(5)]
        for a in range(3):
            for b in range(3):
                L[a + b] += d_in[a] @ d_in[b].T + d_out[a].T @ d_out[b]
        return L
    raise InvalidInput(f"unknown jet tower kind {kind!r}")


def jet_admissible(W: BigradedComplex, u: int, v: int, k: int, kind: str, length: Optional[int] = None,
                   tol: Tolerances = DEFAULT_TOL, ref: float = 1.0):
    """Admissible ω_0 in Ω^{u,v} at level k and one witness jet per basis vector.

    Coefficient i < k of T(h) ω̃(h) is Σ_{a+j=i} T_a ω_j.  With A0 the block
    acting on ω_0 and A1 the blocks on ω_1.., ω_0 is admissible iff A0 ω_0 lies
    in im A1, i.e. ω_0 ∈ ker((I - P_{im A1}) A0).
    """
    r = u + v
    n0, n = W.dim(u, v), W.degree_dim(r)
    length = k if length is None else int(length)
    if k <= 0 or n0 == 0:
        return Subspace.full(n0), []
    T = _operator_coefficients(W, r, kind)
    m = T[0].shape[0]
    E0 = embed(W, u, v, np.eye(n0))
    A0 = np.zeros((k * m, n0))
    A1 = np.zeros((k * m, (length - 1) * n))
    for i in range(k):
        if i < len(T):
            A0[i * m:(i + 1) * m] = T[i] @ E0
        for j in range(1, length):
            a = i - j
            if 0 <= a < len(T):
                A1[i * m:(i + 1) * m, (j - 1) * n:j * n] = T[a]
    if A1.shape[1]:
        Q = orthonormalize(A1, tol, ref).basis
        M = A0 - Q @ (Q.T @ A0)
    else:
        M = A0
    _, adm = rank_kernel(M, tol, ref)
    witnesses = []
    for c in range(adm.dim):
        w0 = adm.basis[:, c]
        rest = min_norm_solve(A1, -A0 @ w0, tol)[0] if A1.shape[1] else np.zeros(0)
        coeffs = [E0 @ w0] + [rest[(j - 1) * n:j * n] for j in range(1, length)]
        witnesses.append(PolynomialJet(coeffs))
    return adm, witnesses


def jet_tower(C: BigradedComplex, kind: str = FORMAN, k_max: Optional[int] = None, extra_length: int = 0,
              tol: Tolerances = DEFAULT_TOL) -> JetTower:
    """Levels 0..k_max (default 2(q+1)); level 0 is the whole space."""
    if kind not in (FORMAN, MAZZEO_MELROSE):
        raise InvalidInput(f"unknown jet tower kind {kind!r}")
    W = C.orthonormal_form
    k_max = 2 * (W.q + 1) if k_max is None else int(k_max)
    if k_max > 2 * (W.q + 1):
        raise InvalidInput(f"k_max must be <= 2(q+1) = {2 * (W.q + 1)}")
    ref = _ref(W)
    if kind == MAZZEO_MELROSE:
        ref = ref * ref
    tower = JetTower(kind=kind, p=W.p, q=W.q, jet_length_extra=int(extra_length))
    tower.levels[0] = {(u, v): Subspace.full(W.dim(u, v)) for u, v in W.bidegrees()}
    for k in range(1, k_max + 1):
        lv = {}
        for u, v in W.bidegrees():
            adm, wit = jet_admissible(W, u, v, k, kind, k + extra_length, tol, max(ref, 1e-300))
            lv[(u, v)] = adm
            tower.witnesses[(k, u, v)] = wit
        tower.levels[k] = lv
    return tower


def jet_residual(C: BigradedComplex, jet: PolynomialJet, r: int, kind: str, k: int) -> float:
    """Largest coefficient of h^0..h^{k-1} in T(h) ω̃(h), for witness verification."""
    W = C.orthonormal_form
    T = _operator_coefficients(W, r, kind)
    res = 0.0
    for i in range(k):
        c = sum(T[i - j] @ jet.coeffs[j] for j in range(min(i + 1, jet.order)) if 0 <= i - j < len(T))
        if not np.isscalar(c):
            res = max(res, float(np.linalg.norm(c)))
    return res


# -- inclusion report -----------------------------------------------------------------


@dataclass
class InclusionReport:
    rows: list  # dicts: relation, k, u, v, residual, dims
    tol: float

    @property
    def passed(self) -> bool:
        return all(row["ok"] for row in self.rows)

    def max_residual(self, relation=None) -> float:
        return max((row["residual"] for row in self.rows if relation in (None, row["relation"])), default=0.0)

    def to_dict(self):
        relations = sorted({row["relation"] for row in self.rows})
        return {
            "pass": self.passed,
            "tol": self.tol,
            "max_residuals": {rel: self.max_residual(rel) for rel in relations},
            "rows": self.rows,
        }


def inclusion_report(C: BigradedComplex, hodge: HodgeTower, forman: JetTower, mm: JetTower,
                     tol: float = 1e-8) -> InclusionReport:
    """𝕳_k ⊆ 𝖍_k ⊆ 𝕳_{⌊k/2⌋}, 𝕳_k ⊆ 𝓗_k and 𝕳_k = 𝓗_k, by projection residuals."""
    rows = []

    def add(rel, k, key, A, B, equal=False):
        res = inclusion_residual(A, B)
        if equal:
            res = max(res, inclusion_residual(B, A))
        ok = res <= tol and (not equal or A.dim == B.dim)
        rows.append({"relation": rel, "k": k, "u": key[0], "v": key[1], "residual": res,
                     "dims": [A.dim, B.dim], "ok": bool(ok)})

    k_max = min(max(forman.levels), max(mm.levels))
    for k in range(1, k_max + 1):
        for key in forman.levels[k]:
            Fk, Mk = forman.level(k)[key], mm.level(k)[key]
            add("forman_in_mm", k, key, Fk, Mk)
            add("mm_in_forman_half", k, key, Mk, forman.level(k // 2)[key])
            add("forman_in_hodge", k, key, Fk, hodge.level(k)[key])
            add("forman_eq_hodge", k, key, Fk, hodge.level(k)[key], equal=True)
    return InclusionReport(rows, tol)


def jet_length_robustness(C: BigradedComplex, kind: str, k_max: Optional[int] = None, extra: int = 3,
                          tol: Tolerances = DEFAULT_TOL, base: Optional[JetTower] = None) -> float:
    """Largest projection residual between admissible spaces at jet length k and k + extra.

    Returns inf when a dimension changes.
    """
    a = base or jet_tower(C, kind, k_max, 0, tol)
    b = jet_tower(C, kind, max(a.levels), extra, tol)
    worst = 0.0
    for k in a.levels:
        for key, S in a.levels[k].items():
            T = b.levels[k][key]
            if S.dim != T.dim:
                return math.inf
            worst = max(worst, inclusion_residual(S, T), inclusion_residual(T, S))
    return worst


# -- eigenspace convergence -----------------------------------------------------------


@dataclass
class EigenspaceAngles:
    k: float
    r: int
    h: float
    angles: np.ndarray
    warning: Optional[str] = None

    @property
    def max_angle(self) -> float:
        return float(self.angles.max()) if self.angles.size else 0.0


def eigenspace_convergence(C: BigradedComplex, sw, hodge: HodgeTower, k, r: int, h: float) -> EigenspaceAngles:
    """Principal angles between the span of the m smallest Δ_h eigenvectors and 𝓗_k^r, m = dim 𝓗_k^r."""
    H = hodge_degree_subspace(C, hodge, k, r)
    m = H.dim
    if m == 0:
        raise InvalidInput(f"dim H_k^{r} is zero; nothing to compare")
    j = int(np.argmin(np.abs(np.log(sw.h_grid) - np.log(h))))
    if (j, r) not in sw.vectors:
        raise InvalidInput("sweep was run without eigenvectors (keep_vectors=True)")
    vecs = sw.vectors[(j, r)]
    if vecs.shape[1] < m:
        raise InvalidInput(f"sweep kept {vecs.shape[1]} branches but dim H_k^{r} = {m}")
    warning = None
    lam = sw.values[r][j]
    if lam.size > m:
        gap = lam[m] - lam[m - 1]
        if gap <= 1e-8 * max(lam[m], 1e-300):
            warning = f"degenerate eigenvalue at cut index {m}; enlarge num_branches"
    V = Subspace(vecs[:, :m])
    return EigenspaceAngles(k=k, r=r, h=float(sw.h_grid[j]), angles=principal_angles(V, H), warning=warning)


# -- Liouville conditioning diagnostic -------------------------------------------------


def _default_bump(N: int) -> np.ndarray:
    """Zero-mean smooth profile with cos-coefficient e^{-(|m|+|n|)} on every mode."""
    from .models import torus_modes

    f = np.zeros(1 + 2 * len(torus_modes(N)))
    for j, (m, n) in enumerate(torus_modes(N)):
        f[1 + 2 * j] = math.exp(-(abs(m) + abs(n)))
    return f


@dataclass
class LiouvilleReport:
    alpha: float
    rows: list  # dicts N, s, g, residual, rational
    g_slope: float

    def to_dict(self):
        return {"alpha": self.alpha, "rows": self.rows, "g_slope": self.g_slope}


def small_divisor(alpha: float, N: int) -> float:
    """s(N) = min |m + αn| over nonzero modes with |m|, |n| <= N."""
    n = np.arange(-N, N + 1)
    m = np.arange(-N, N + 1)[:, None]
    vals = np.abs(m + alpha * n[None, :])
    vals[N, N] = np.inf
    return float(vals.min())


def _primitive_norm_dense(a: float, N: int, eps: float, tol: Tolerances):
    from .models import kronecker_t2

    C = kronecker_t2(alpha=a, N=N)
    chi = np.zeros(C.dim(0, 1))
    chi[0] = 1.0
    chi = chi + eps * _default_bump(N)
    rhs = C.component("d10", 0, 1) @ chi
    X = C.component("d01", 1, 0)
    Q = orthonormalize(X, tol, np.linalg.norm(X, 2)).basis
    beta, res = min_norm_solve(X, Q @ (Q.T @ rhs), tol)
    return float(np.linalg.norm(beta)), res


def _primitive_norm_modes(a: float, N: int, eps: float, tol: Tolerances):
    """Same solve, mode by mode: every operator is a 2x2 rotation block per Fourier mode.

    D01 on Ω^{1,0} is -X, with block [[0, -a_mn], [a_mn, 0]] on (cos, sin); the
    right-hand side D10 χ′ has sin-coefficient -b_mn·ε·f_mn.  Modes with
    |a_mn| below the global rank cutoff are outside im D01 and are dropped by P.
    """
    from .models import kronecker_multipliers

    am, bm = kronecker_multipliers(a, N)
    am, bm = am[1::2], bm[1::2]  # one entry per canonical mode
    f = _default_bump(N)[1::2]
    rhs_sin = -bm * eps * f
    cutoff = tol.tol_rank * np.abs(am).max()
    live = np.abs(am) > cutoff
    # [[0, -a], [a, 0]] (x_c, x_s) = (0, rhs_sin)  =>  x_c = rhs_sin / a, x_s = 0
    beta_cos = np.where(live, rhs_sin / np.where(live, am, 1.0), 0.0)
    return float(np.linalg.norm(beta_cos)), 0.0


def liouville_diagnostic(alpha, N_list, eps: float = 0.5, tol: Tolerances = DEFAULT_TOL,
                         dense: bool = False) -> LiouvilleReport:
    """Small divisors s(N) and the min-norm leafwise primitive size g(N).

    g(N) = ‖β‖ for the min-norm solution of D01 β = P(D10 χ′) on Ω^{1,0} -> Ω^{1,1},
    where χ′ = (1 + εf) χ, P projects onto im D01 and f is a fixed smooth
    zero-mean profile.  For the flat χ itself D10 χ = 0 and g vanishes.
    ``dense=True`` assembles the full truncated complex instead of solving
    mode by mode (identical result, feasible only for small N).
    """
    from .models import parse_alpha

    a = parse_alpha(alpha)
    Ns = [int(N) for N in N_list]
    if any(N < 1 for N in Ns) or Ns != sorted(Ns):
        raise InvalidInput("N_list must be ascending truncations >= 1")
    solve = _primitive_norm_dense if dense else _primitive_norm_modes
    rows = []
    for N in Ns:
        s = small_divisor(a, N)
        g, res = solve(a, N, eps, tol)
        rows.append({"N": N, "s": s, "g": g, "residual": res, "rational": bool(s <= 1e-14)})
    g = np.array([row["g"] for row in rows])
    slope = float("nan")
    if len(rows) >= 2 and np.all(g > 0):
        slope = float(np.polyfit(np.log(Ns), np.log(g), 1)[0])
    return LiouvilleReport(alpha=a, rows=rows, g_slope=slope)
