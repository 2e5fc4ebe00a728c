"""Rescaled operators and the adiabatic eigenvalue sweep.

With Θ_h ω = h^u ω on transverse degree u, the conjugated differential is

    d_h = Θ_h d Θ_h⁻¹ = D01 + h D10 + h² D2m1,

and Δ_h = d_h δ_h + δ_h d_h is isospectral to the Laplacian of the metric
family that blows up transverse directions by 1/h.  All operators here are
expressed in the orthonormal (whitened) frame of the complex, so adjoints are
transposes and Δ_h is symmetric.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .complex import BigradedComplex, total_d_matrix
from .errors import InvalidInput
from .linalg import DEFAULT_TOL, Tolerances, gram_eig, rank, sym_eig

THREADS_ENV = "ADIABATIC_SS_THREADS"
SLOPE_TOL = 0.25
ZERO_TOL = 1e-12


def default_grid(h_max=1e-1, h_min=1e-4, points=12) -> np.ndarray:
    return np.logspace(np.log10(h_max), np.log10(h_min), int(points))


def _check_h(h):
    if not (np.isfinite(h) and h > 0):
        raise InvalidInput(f"h must be positive, got {h}")


def theta(C: BigradedComplex, h: float) -> dict:
    """Θ_h per degree: diagonal matrix with h^u on the piece of transverse degree u."""
    _check_h(h)
    out = {}
    for r in range(C.top_degree + 1):
        diag = np.concatenate([np.full(n, float(h) ** u) for u, _, _, n in C.pieces(r)] or [np.zeros(0)])
        out[r] = np.diag(diag)
    return out


def rescaled_d(C: BigradedComplex, r: int, h: float) -> np.ndarray:
    """d_h on degree r in the coordinates of ``C`` (no whitening)."""
    return total_d_matrix(C, r, 1.0, h, h * h)


def laplacian_factor(W: BigradedComplex, r: int, h: float) -> np.ndarray:
    """M with M Mᵀ = Δ_h on degree r: the columns of d_{h,r-1} next to those of d_{h,r}ᵀ."""
    return np.hstack([rescaled_d(W, r - 1, h), rescaled_d(W, r, h).T])


def laplacian_spectrum(C: BigradedComplex, r: int, h: float, vectors: bool = False):
    """Ascending eigenvalues (and eigenvectors) of Δ_h on degree r, via an SVD."""
    _check_h(h)
    vals, vecs = gram_eig(laplacian_factor(C.orthonormal_form, r, h))
    return (vals, vecs) if vectors else vals


@dataclass
class RescaledOps:
    h: float
    dh: dict
    deltah: dict
    Lap: dict
    D0: np.ndarray
    Dperp: np.ndarray
    F: np.ndarray
    Dh: np.ndarray
    offsets: list

    def dirac_square_residual(self) -> float:
        """‖D_h² − ⊕_r Δ_h[r]‖ (spectral norm)."""
        n = self.Dh.shape[0]
        L = np.zeros((n, n))
        for r, M in self.Lap.items():
            a, b = self.offsets[r], self.offsets[r + 1]
            L[a:b, a:b] = M
        return float(np.linalg.norm(self.Dh @ self.Dh - L, 2)) if n else 0.0


def _total_space_op(W: BigradedComplex, s01, s10, s2m1):
    """d + δ on ⊕_r Ω^r for one choice of component weights."""
    offs = [0]
    for r in range(W.top_degree + 1):
        offs.append(offs[-1] + W.degree_dim(r))
    n = offs[-1]
    D = np.zeros((n, n))
    for r in range(W.top_degree):
        M = total_d_matrix(W, r, s01, s10, s2m1)
        D[offs[r + 1]:offs[r + 2], offs[r]:offs[r + 1]] = M
    return D + D.T, offs


def rescaled_ops(C: BigradedComplex, h: float) -> RescaledOps:
    _check_h(h)
    W = C.orthonormal_form
    dh, deltah, lap = {}, {}, {}
    for r in range(W.top_degree + 1):
        dh[r] = rescaled_d(W, r, h)
        deltah[r] = dh[r].T
    for r in range(W.top_degree + 1):
        M = laplacian_factor(W, r, h)
        lap[r] = M @ M.T
    D0, offs = _total_space_op(W, 1.0, 0.0, 0.0)
    Dperp, _ = _total_space_op(W, 0.0, 1.0, 0.0)
    F, _ = _total_space_op(W, 0.0, 0.0, 1.0)
    return RescaledOps(h=float(h), dh=dh, deltah=deltah, Lap=lap, D0=D0, Dperp=Dperp, F=F,
                       Dh=D0 + h * Dperp + h * h * F, offsets=offs)


# -- sweep ---------------------------------------------------------------------


def thread_count(threads: Optional[int] = None) -> int:
    if threads is not None:
        return max(1, int(threads))
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InvalidInput(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


@dataclass
class AdiabaticSweep:
    """Branches λ_i^r(h), matched across h by sorted index.

    ``values[r]`` has shape (len(h_grid), branches); ``scale[r][j]`` is
    ‖Δ_h‖ at h_grid[j], used for the identically-zero test.
    """

    h_grid: np.ndarray
    degrees: list
    values: dict
    scale: dict
    vectors: dict = field(default_factory=dict)  # (j, r) -> eigenvectors (whitened)
    slope_tol: float = SLOPE_TOL
    zero_tol: float = ZERO_TOL

    def tail(self) -> slice:
        n = len(self.h_grid)
        return slice(n - (n + 1) // 2, n)

    def zero_branches(self, r) -> np.ndarray:
        """Branches that stay below zero_tol·‖Δ_h‖ at every grid point."""
        lam = self.values[r]
        if lam.size == 0:
            return np.zeros(lam.shape[1], dtype=bool)
        return np.all(lam <= self.zero_tol * self.scale[r][:, None], axis=0)

    def slopes(self, r) -> np.ndarray:
        """log-log slope of each branch over the smallest-h half of the grid."""
        lam = self.values[r]
        sl = self.tail()
        x = np.log(self.h_grid[sl])
        out = np.full(lam.shape[1], np.nan)
        for i in range(lam.shape[1]):
            y = lam[sl, i]
            if np.all(y > 0):
                out[i] = np.polyfit(x, np.log(y), 1)[0]
        return out

    def count(self, r, k) -> int:
        """n_k^r = #{i : λ_i^r ∈ O(h^{2k})}."""
        kappa = self.slopes(r)
        zero = self.zero_branches(r)
        ok = zero | (np.nan_to_num(kappa, nan=-np.inf) >= 2 * k - self.slope_tol)
        return int(np.count_nonzero(ok))

    def counts(self, k_max) -> dict:
        return {r: {k: self.count(r, k) for k in range(1, k_max + 1)} for r in self.degrees}

    def csv_rows(self):
        for r in self.degrees:
            lam = self.values[r]
            for i in range(lam.shape[1]):
                for j, h in enumerate(self.h_grid):
                    yield r, i, float(h), float(lam[j, i])

    def summary(self, k_max) -> dict:
        return {
            str(r): {
                "counts": {str(k): self.count(r, k) for k in range(1, k_max + 1)},
                "zero_branches": int(np.count_nonzero(self.zero_branches(r))),
                "branches": int(self.values[r].shape[1]),
            }
            for r in self.degrees
        }


def _check_grid(h_grid):
    h = np.asarray(h_grid, dtype=float)
    if h.ndim != 1 or h.size < 4:
        raise InvalidInput("h grid needs at least 4 points")
    if not np.all(np.isfinite(h)) or np.any(h <= 0):
        raise InvalidInput("h grid must be positive")
    if np.any(np.diff(h) >= 0):
        raise InvalidInput("h grid must be strictly descending")
    if np.log10(h[0] / h[-1]) < 2 - 1e-12:
        raise InvalidInput("h grid must span at least two decades")
    return h


def sweep(C: BigradedComplex, h_grid=None, degrees: Optional[Sequence[int]] = None,
          num_branches: Optional[int] = None, threads: Optional[int] = None,
          keep_vectors: bool = False) -> AdiabaticSweep:
    """Smallest ``num_branches`` eigenvalues of Δ_h per degree over a descending h grid."""
    h = _check_grid(default_grid() if h_grid is None else h_grid)
    W = C.orthonormal_form
    degrees = list(range(W.top_degree + 1)) if degrees is None else [int(r) for r in degrees]
    for r in degrees:
        if not 0 <= r <= W.top_degree:
            raise InvalidInput(f"degree {r} outside [0, {W.top_degree}]")
    jobs = [(j, r) for j in range(h.size) for r in degrees]

    def work(job):
        j, r = job
        vals, vecs = gram_eig(laplacian_factor(W, r, h[j]))
        return job, vals, vecs

    workers = thread_count(threads)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(work, jobs))
    else:
        results = [work(j) for j in jobs]
    results.sort(key=lambda t: t[0])

    values, scale, vectors = {}, {}, {}
    for r in degrees:
        n = W.degree_dim(r)
        nb = n if num_branches is None else min(int(num_branches), n)
        values[r] = np.zeros((h.size, nb))
        scale[r] = np.zeros(h.size)
    for (j, r), vals, vecs in results:
        nb = values[r].shape[1]
        values[r][j] = vals[:nb]
        scale[r][j] = vals[-1] if vals.size else 0.0
        if keep_vectors:
            vectors[(j, r)] = vecs[:, :nb]
    return AdiabaticSweep(h_grid=h, degrees=degrees, values=values, scale=scale, vectors=vectors)


# -- Theorem A --------------------------------------------------------------------


def leafwise_harmonic_dims(C: BigradedComplex, tol: Tolerances = DEFAULT_TOL) -> list[int]:
    """dim ker Δ_0 per degree (Δ_0 the D01-Laplacian, block diagonal in u)."""
    W = C.orthonormal_form
    out = [0] * (W.top_degree + 1)
    ref = max([0.0] + [np.linalg.norm(M, 2) for M in W.d01.values() if M.size])
    for u, v in W.bidegrees():
        n = W.dim(u, v)
        out[u + v] += n - rank(W.component("d01", u, v), tol, ref) - rank(W.component("d01", u, v - 1), tol, ref)
    return out


@dataclass
class TheoremAReport:
    rows: list  # dicts r, k, count, expected, match

    @property
    def all_match(self) -> bool:
        return all(row["match"] for row in self.rows)

    def to_dict(self):
        return {"all_match": self.all_match, "rows": self.rows}


def theorem_a_report(C: BigradedComplex, sw: AdiabaticSweep, all_pages=None, k_max: Optional[int] = None,
                     tol: Tolerances = DEFAULT_TOL) -> TheoremAReport:
    """n_k^r against dim 𝓗_1^r (k = 1) and dim E_k^r (k >= 2)."""
    from .spectral import pages as compute_pages

    k_max = C.q + 2 if k_max is None else int(k_max)
    all_pages = all_pages or compute_pages(C, k_max, tol)
    h1 = leafwise_harmonic_dims(C, tol)
    rows = []
    for r in sw.degrees:
        for k in range(1, k_max + 1):
            expected = h1[r] if k == 1 else all_pages[k].degree_dims()[r]
            got = sw.count(r, k)
            rows.append({"r": r, "k": k, "count": got, "expected": int(expected), "match": got == expected,
                         "branches": int(sw.values[r].shape[1])})
    return TheoremAReport(rows)


# -- Dirac operator inequality ----------------------------------------------------


@dataclass
class DiracCheck:
    h_grid: np.ndarray
    c: np.ndarray
    significant: np.ndarray
    C_const: float
    slope: float
    passed: bool
    slope_tol: float = SLOPE_TOL

    def to_dict(self):
        return {"h": self.h_grid.tolist(), "c": self.c.tolist(), "significant": self.significant.tolist(),
                "C_const": self.C_const, "slope": self.slope, "slope_tol": self.slope_tol, "pass": self.passed}


def dirac_inequality_check(C: BigradedComplex, h_grid=None, slope_tol: float = SLOPE_TOL) -> DiracCheck:
    """c(h) = -λ_min(Δ_h - ½Δ_0 - ½h²Δ_⊥)/h² on the total space.

    Δ_0 = D0², Δ_⊥ = D⊥².  Values within the rounding floor of the matrix
    (~1e3·eps·‖M‖/h²) are treated as zero.  Boundedness: the log-log slope of
    the positive significant values on the small-h half is >= -slope_tol.
    """
    h = _check_grid(default_grid() if h_grid is None else h_grid)
    W = C.orthonormal_form
    D0, _ = _total_space_op(W, 1.0, 0.0, 0.0)
    Dp, _ = _total_space_op(W, 0.0, 1.0, 0.0)
    Fm, _ = _total_space_op(W, 0.0, 0.0, 1.0)
    L0, Lp = D0 @ D0, Dp @ Dp
    c = np.zeros(h.size)
    sig = np.zeros(h.size, dtype=bool)
    for j, hj in enumerate(h):
        Dh = D0 + hj * Dp + hj * hj * Fm
        M = Dh @ Dh - 0.5 * L0 - 0.5 * hj * hj * Lp
        if M.size == 0:
            continue
        lam_min = sym_eig(M)[0][0]
        floor = 1e3 * np.finfo(float).eps * max(1.0, np.linalg.norm(M, 2))
        sig[j] = abs(lam_min) > floor
        c[j] = -lam_min / hj ** 2 if sig[j] else 0.0
    tail = slice(h.size - (h.size + 1) // 2, h.size)
    ct, ht, st = c[tail], h[tail], sig[tail]
    pos = st & (ct > 0)
    slope = 0.0
    if np.count_nonzero(pos) >= 2:
        slope = float(np.polyfit(np.log(ht[pos]), np.log(ct[pos]), 1)[0])
    C_const = float(max(0.0, ct.max())) if ct.size else 0.0
    return DiracCheck(h_grid=h, c=c, significant=sig, C_const=C_const, slope=slope,
                      passed=bool(slope >= -slope_tol), slope_tol=slope_tol)


# -- h-norms ------------------------------------------------------------------


def h_norm(C: BigradedComplex, omega, h: float, r: int) -> float:
    """‖ω‖_h = (Σ_u (h^{-q/2} h^u ‖ω_u‖)²)^{1/2} for ω in degree r, with the gram norms."""
    _check_h(h)
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (C.degree_dim(r),):
        raise InvalidInput(f"form has shape {omega.shape}, degree {r} has dimension {C.degree_dim(r)}")
    total = 0.0
    for u, v, off, n in C.pieces(r):
        w = omega[off:off + n]
        sq = float(w @ C.gram[(u, v)] @ w)
        total += (h ** (-C.q / 2) * h ** u) ** 2 * sq
    return float(np.sqrt(total))


@dataclass
class MetricEquivalence:
    constant: float
    ratio_min: list
    ratio_max: list
    passed: bool

    def to_dict(self):
        return {"constant": self.constant, "ratio_min": self.ratio_min, "ratio_max": self.ratio_max,
                "pass": self.passed}


def metric_equivalence_check(C: BigradedComplex, C2: BigradedComplex, h_grid=None, samples: int = 32,
                             seed: int = 0) -> MetricEquivalence:
    """Sample ‖ω‖'_h / ‖ω‖_h and check it stays within one h-independent constant.

    The constant is max over pieces of sqrt(λ_max(G⁻¹G')) and sqrt(λ_max(G'⁻¹G)).
    """
    import scipy.linalg

    if C.p != C2.p or C.q != C2.q or not np.array_equal(C.dims, C2.dims):
        raise InvalidInput("complexes must share p, q and the dimension table")
    h = default_grid() if h_grid is None else np.asarray(h_grid, dtype=float)
    K = 1.0
    for key in C.bidegrees():
        G, G2 = C.gram[key], C2.gram[key]
        if G.shape[0]:
            ev = scipy.linalg.eigh(G2, G, eigvals_only=True)
            K = max(K, float(np.sqrt(ev.max())), float(np.sqrt(1.0 / ev.min())))
    rng = np.random.default_rng(seed)
    rmin, rmax = [], []
    for hj in h:
        lo, hi = np.inf, 0.0
        for r in range(C.top_degree + 1):
            n = C.degree_dim(r)
            if n == 0:
                continue
            for _ in range(samples):
                w = rng.standard_normal(n)
                ratio = h_norm(C2, w, hj, r) / h_norm(C, w, hj, r)
                lo, hi = min(lo, ratio), max(hi, ratio)
        rmin.append(lo)
        rmax.append(hi)
    slack = 1 + 1e-12
    passed = all(K ** -1 / slack <= a and b <= K * slack for a, b in zip(rmin, rmax))
    return MetricEquivalence(constant=K, ratio_min=rmin, ratio_max=rmax, passed=passed)
