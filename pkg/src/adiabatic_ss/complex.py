"""Finite-dimensional bigraded cochain complexes.

A :class:`BigradedComplex` is a collection of pieces Ω^{u,v} (``u`` transverse
degree, ``v`` tangential degree) with the three differential components

    D01  : Ω^{u,v} -> Ω^{u,v+1}
    D10  : Ω^{u,v} -> Ω^{u+1,v}
    D2m1 : Ω^{u,v} -> Ω^{u+2,v-1}

and one SPD gram matrix per piece.  The total differential of degree r is
assembled by stacking pieces of Ω^r = ⊕_u Ω^{u,r-u} in ascending ``u``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidInput
from .linalg import DEFAULT_TOL, Subspace, Tolerances, rank

COMPONENTS = {"d01": (0, 1), "d10": (1, 0), "d2m1": (2, -1)}


class BigradedComplex:
    """Bigraded complex with block-diagonal inner product.

    ``dims`` is a (q+1) x (p+1) integer table.  Component dictionaries are
    keyed by the source bidegree ``(u, v)``; missing keys are zero maps, and
    maps into pieces outside the grid are empty ``(0, n)`` matrices.
    """

    def __init__(self, p: int, q: int, dims, d01=None, d10=None, d2m1=None, gram=None):
        self.p = int(p)
        self.q = int(q)
        if self.p < 0 or self.q < 0:
            raise InvalidInput("p and q must be non-negative")
        dims = np.asarray(dims, dtype=int)
        if dims.shape != (self.q + 1, self.p + 1):
            raise InvalidInput(f"dims table must have shape {(self.q + 1, self.p + 1)}, got {dims.shape}")
        if np.any(dims < 0):
            raise InvalidInput("piece dimensions must be non-negative")
        self.dims = dims
        self._comp = {}
        for name, given in (("d01", d01), ("d10", d10), ("d2m1", d2m1)):
            self._comp[name] = self._normalize_component(name, given or {})
        self.gram = self._normalize_gram(gram or {})

    # -- construction helpers -------------------------------------------------

    def bidegrees(self):
        """All in-range bidegrees in canonical order (u ascending, then v)."""
        return [(u, v) for u in range(self.q + 1) for v in range(self.p + 1)]

    def dim(self, u: int, v: int) -> int:
        if 0 <= u <= self.q and 0 <= v <= self.p:
            return int(self.dims[u, v])
        return 0

    def _normalize_component(self, name, given):
        du, dv = COMPONENTS[name]
        out = {}
        for key in given:
            if tuple(key) not in self.bidegrees():
                raise InvalidInput(f"{name}: source bidegree {tuple(key)} outside the grid")
        for u, v in self.bidegrees():
            shape = (self.dim(u + du, v + dv), self.dim(u, v))
            M = given.get((u, v))
            if M is None:
                M = np.zeros(shape)
            M = np.asarray(M, dtype=float)
            if M.size == 0 and shape[0] * shape[1] == 0:
                M = M.reshape(shape)
            if M.shape != shape:
                raise InvalidInput(f"{name}[{u},{v}] has shape {M.shape}, expected {shape}")
            if not np.all(np.isfinite(M)):
                raise InvalidInput(f"{name}[{u},{v}] has non-finite entries")
            out[(u, v)] = M
        return out

    def _normalize_gram(self, given):
        out = {}
        for u, v in self.bidegrees():
            n = self.dim(u, v)
            G = given.get((u, v))
            G = np.eye(n) if G is None else np.asarray(G, dtype=float)
            if G.shape != (n, n):
                raise InvalidInput(f"gram[{u},{v}] has shape {G.shape}, expected {(n, n)}")
            if not np.all(np.isfinite(G)):
                raise InvalidInput(f"gram[{u},{v}] has non-finite entries")
            if (u, v) in given and n:
                _check_spd(G, (u, v))
            out[(u, v)] = G
        return out

    # -- accessors -----------------------------------------------------------

    def component(self, name: str, u: int, v: int) -> np.ndarray:
        """Component ``name`` with source Ω^{u,v}; zero-size outside the grid."""
        du, dv = COMPONENTS[name]
        if (u, v) in self._comp[name]:
            return self._comp[name][(u, v)]
        return np.zeros((self.dim(u + du, v + dv), self.dim(u, v)))

    @property
    def d01(self):
        return self._comp["d01"]

    @property
    def d10(self):
        return self._comp["d10"]

    @property
    def d2m1(self):
        return self._comp["d2m1"]

    @property
    def top_degree(self) -> int:
        return self.p + self.q

    def has_identity_gram(self) -> bool:
        return all(np.array_equal(G, np.eye(G.shape[0])) for G in self.gram.values())

    def pieces(self, r: int):
        """(u, v, offset, size) for the pieces of Ω^r, ascending in u."""
        out, off = [], 0
        for u in range(self.q + 1):
            v = r - u
            if 0 <= v <= self.p:
                n = self.dim(u, v)
                out.append((u, v, off, n))
                off += n
        return out

    def degree_dim(self, r: int) -> int:
        return sum(n for *_, n in self.pieces(r))

    def offset(self, r: int, u: int) -> tuple[int, int]:
        """Slice bounds of piece (u, r-u) inside Ω^r (empty slice if absent)."""
        for uu, _, off, n in self.pieces(r):
            if uu == u:
                return off, off + n
        start = sum(n for uu, _, _, n in self.pieces(r) if uu < u)
        return start, start

    def piece_projection(self, r: int, u: int) -> np.ndarray:
        """Coordinate projection π_{u,r-u}: Ω^r -> Ω^{u,r-u} as a matrix."""
        a, b = self.offset(r, u)
        P = np.zeros((b - a, self.degree_dim(r)))
        P[:, a:b] = np.eye(b - a)
        return P

    def with_gram(self, gram) -> "BigradedComplex":
        return BigradedComplex(self.p, self.q, self.dims, self.d01, self.d10, self.d2m1, gram)

    def scaled(self, s01=1.0, s10=1.0, s2m1=1.0) -> "BigradedComplex":
        """Same complex with each component multiplied by a scalar."""
        return BigradedComplex(
            self.p, self.q, self.dims,
            {k: s01 * M for k, M in self.d01.items()},
            {k: s10 * M for k, M in self.d10.items()},
            {k: s2m1 * M for k, M in self.d2m1.items()},
            self.gram,
        )

    @cached_property
    def orthonormal_form(self) -> "BigradedComplex":
        """Isometric copy whose gram matrices are identities.

        With G = L Lᵀ per piece, coordinates y = Lᵀx turn the gram inner
        product into the Euclidean one; components transform as L_tᵀ·M·L_s⁻ᵀ.
        """
        if self.has_identity_gram():
            return self
        frames = {}
        for key, G in self.gram.items():
            if G.shape[0] == 0:
                frames[key] = G
                continue
            _check_spd(G, key)
            frames[key] = np.linalg.cholesky(G)
        comps = {}
        for name, (du, dv) in COMPONENTS.items():
            comps[name] = {}
            for (u, v), M in self._comp[name].items():
                tgt = (u + du, v + dv)
                if M.size == 0:
                    comps[name][(u, v)] = M
                    continue
                Ls, Lt = frames[(u, v)], frames[tgt]
                comps[name][(u, v)] = Lt.T @ np.linalg.solve(Ls, M.T).T
        return BigradedComplex(self.p, self.q, self.dims, comps["d01"], comps["d10"], comps["d2m1"])

    def __repr__(self):
        return f"BigradedComplex(p={self.p}, q={self.q}, dims={self.dims.tolist()})"


def _check_spd(G, key):
    if np.linalg.norm(G - G.T) > 1e-12 * max(1.0, np.linalg.norm(G)):
        raise InvalidInput(f"gram{key} is not symmetric")
    if G.shape[0] and np.linalg.eigvalsh(G)[0] <= 0:
        raise InvalidInput(f"gram{key} is not positive definite")


def total_d_matrix(C: BigradedComplex, r: int, s01=1.0, s10=1.0, s2m1=1.0) -> np.ndarray:
    """Block assembly Ω^r -> Ω^{r+1}, each component scaled by its factor.

    Degrees outside [0, p+q] are zero spaces, so this never fails.
    """
    n_src, n_tgt = C.degree_dim(r), C.degree_dim(r + 1)
    D = np.zeros((n_tgt, n_src))
    for u, v, off, n in C.pieces(r):
        for name, scale in (("d01", s01), ("d10", s10), ("d2m1", s2m1)):
            du, dv = COMPONENTS[name]
            M = C.component(name, u, v)
            if M.size == 0 or scale == 0.0:
                continue
            a, b = C.offset(r + 1, u + du)
            D[a:b, off:off + n] += scale * M
    return D


def total_d(C: BigradedComplex, r: int) -> np.ndarray:
    if not 0 <= r <= C.top_degree:
        raise InvalidInput(f"degree {r} outside [0, {C.top_degree}]")
    return total_d_matrix(C, r)


def adjoint_components(C: BigradedComplex) -> dict[str, dict]:
    """Gram adjoints δ_{-i,-j} = G_src⁻¹·d_{i,j}ᵀ·G_tgt, keyed by source of δ.

    Keys: ``"delta0m1"`` (Ω^{u,v} -> Ω^{u,v-1}), ``"deltam10"``
    (Ω^{u,v} -> Ω^{u-1,v}) and ``"deltam21"`` (Ω^{u,v} -> Ω^{u-2,v+1}).
    """
    for key, G in C.gram.items():
        if G.shape[0]:
            _check_spd(G, key)
    names = {"d01": "delta0m1", "d10": "deltam10", "d2m1": "deltam21"}
    out = {}
    for name, (du, dv) in COMPONENTS.items():
        comp = {}
        for u, v in C.bidegrees():
            src = (u - du, v - dv)  # source of d, i.e. target of δ
            n_tgt, n_src = C.dim(*src), C.dim(u, v)
            if n_tgt == 0 or n_src == 0:
                comp[(u, v)] = np.zeros((n_tgt, n_src))
                continue
            M = C.component(name, *src)
            comp[(u, v)] = np.linalg.solve(C.gram[src], M.T @ C.gram[(u, v)])
        out[names[name]] = comp
    return out


@dataclass
class ValidationReport:
    entries: list = field(default_factory=list)  # (identity, (u, v) or degree, residual)
    tol: float = 0.0
    scale: float = 1.0

    @property
    def passed(self) -> bool:
        return all(res <= self.tol * self.scale for _, _, res in self.entries)

    @property
    def max_residual(self) -> float:
        return max((res for _, _, res in self.entries), default=0.0)

    def failures(self):
        return [e for e in self.entries if e[2] > self.tol * self.scale]

    def to_dict(self):
        return {
            "passed": self.passed,
            "tol": self.tol,
            "scale": self.scale,
            "max_residual": self.max_residual,
            "entries": [
                {"identity": name, "where": list(where) if isinstance(where, tuple) else where, "residual": res}
                for name, where, res in self.entries
            ],
        }


def _norm(M) -> float:
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


def validate(C: BigradedComplex, tol: Tolerances = DEFAULT_TOL) -> ValidationReport:
    """Check the five bihomogeneous identities implied by d² = 0, plus d² = 0 itself.

    Residuals are spectral norms; the pass threshold is ``tol_eq`` times the
    squared largest component norm (at least 1).
    """
    c = C.component
    scale = max([1.0] + [_norm(M) ** 2 for name in COMPONENTS for M in C._comp[name].values()])
    rep = ValidationReport(tol=tol.tol_eq, scale=scale)
    for u, v in C.bidegrees():
        ids = {
            "d01_squared": c("d01", u, v + 1) @ c("d01", u, v),
            "d2m1_squared": c("d2m1", u + 2, v - 1) @ c("d2m1", u, v),
            "d01_d10_anticommute": c("d01", u + 1, v) @ c("d10", u, v) + c("d10", u, v + 1) @ c("d01", u, v),
            "d10_d2m1_anticommute": c("d10", u + 2, v - 1) @ c("d2m1", u, v) + c("d2m1", u + 1, v) @ c("d10", u, v),
            "d10_squared_plus": c("d10", u + 1, v) @ c("d10", u, v)
            + c("d01", u + 2, v - 1) @ c("d2m1", u, v)
            + c("d2m1", u, v + 1) @ c("d01", u, v),
        }
        for name, M in ids.items():
            rep.entries.append((name, (u, v), _norm(M)))
    for r in range(C.top_degree):
        rep.entries.append(("total_d_squared", r, _norm(total_d_matrix(C, r + 1) @ total_d_matrix(C, r))))
    return rep


def filtration_subspace(C: BigradedComplex, k: int, r: int) -> Subspace:
    """Coordinate subspace Ω_k^r spanned by the pieces of Ω^r with u >= k."""
    n = C.degree_dim(r)
    cols = [np.eye(n)[:, off:off + m] for u, _, off, m in C.pieces(r) if u >= k]
    if not cols:
        return Subspace.zero(n)
    return Subspace(np.hstack(cols))


def filtration_columns(C: BigradedComplex, k: int, r: int) -> np.ndarray:
    """Boolean mask of the coordinates of Ω^r lying in Ω_k^r."""
    mask = np.zeros(C.degree_dim(r), dtype=bool)
    for u, _, off, m in C.pieces(r):
        if u >= k:
            mask[off:off + m] = True
    return mask


def betti(C: BigradedComplex, r: int, tol: Tolerances = DEFAULT_TOL) -> int:
    W = C.orthonormal_form
    n = W.degree_dim(r)
    return n - rank(total_d_matrix(W, r), tol) - rank(total_d_matrix(W, r - 1), tol)


def betti_numbers(C: BigradedComplex, tol: Tolerances = DEFAULT_TOL) -> list[int]:
    return [betti(C, r, tol) for r in range(C.top_degree + 1)]


def euler_characteristic(C: BigradedComplex) -> int:
    return sum((-1) ** r * C.degree_dim(r) for r in range(C.top_degree + 1))
