"""Independent reference computations used only by the tests."""
import math

import numpy as np
import scipy.linalg


def row_space_basis(d, rel=1e-10):
    """Orthonormal basis of (ker d)^⊥ = im dᵀ by column-pivoted QR (no SVD)."""
    if d.size == 0:
        return np.zeros((d.shape[1], 0))
    Q, R, _ = scipy.linalg.qr(d.T, pivoting=True, mode="economic")
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0:
        return np.zeros((d.shape[1], 0))
    r = int(np.count_nonzero(diag > rel * diag[0]))
    return Q[:, :r]


def inertia_count(d, lam, guard=1e-8):
    """Max dim of L ⊆ (ker d)^⊥ with ‖dζ‖² <= λ‖ζ‖², by Sylvester inertia of an LDLᵀ factorization.

    Returns (count, witness) where witness spans a subspace on which the
    quadratic form ‖dζ‖² - λ'‖ζ‖² is nonpositive.
    """
    lam = lam + guard * max(1.0, abs(lam))
    B = row_space_basis(d)
    if B.shape[1] == 0:
        return 0, B
    S = B.T @ (d.T @ d) @ B - lam * np.eye(B.shape[1])
    S = 0.5 * (S + S.T)
    lu, D, perm = scipy.linalg.ldl(S, lower=True)
    # D is block diagonal with 1x1 and 2x2 blocks; a 2x2 block has one eigenvalue of each sign
    count, cols, i, n = 0, [], 0, D.shape[0]
    while i < n:
        if i + 1 < n and D[i + 1, i] != 0.0:
            ev, vec = np.linalg.eigh(D[i:i + 2, i:i + 2])
            y = np.zeros(n)
            y[i:i + 2] = vec[:, 0]
            cols.append(y)
            count += 1
            i += 2
        else:
            if D[i, i] <= 0:
                y = np.zeros(n)
                y[i] = 1.0
                cols.append(y)
                count += 1
            i += 1
    if not cols:
        return 0, np.zeros((d.shape[1], 0))
    Y = np.array(cols).T
    # S = L D Lᵀ, so x = L⁻ᵀ y gives xᵀ S x = yᵀ D y
    X = np.linalg.solve(lu.T, Y)
    return count, B @ X


def torus_eigenvalues(alpha, N, h):
    """Closed-form spectrum of Δ_h on functions of the Kronecker model: a² + h²b² per real basis function."""
    s = math.sqrt(1 + alpha * alpha)
    vals = [0.0]
    for m in range(0, N + 1):
        for n in range(-N, N + 1):
            if m > 0 or n > 0:
                a = 2 * math.pi * (m + alpha * n) / s
                b = 2 * math.pi * (n - alpha * m) / s
                vals += [a * a + h * h * b * b] * 2
    return np.sort(vals)


def continued_fraction_floor(alpha, N):
    """min |m + αn| over nonzero (m, n) with |m|, |n| <= N, scanning n and the nearest admissible m."""
    best = math.inf
    for n in range(1, N + 1):
        # |m + αn| is convex in m, so the best admissible m is the nearest integer clamped to [-N, N]
        for m in {max(-N, min(N, math.floor(-alpha * n))), max(-N, min(N, math.ceil(-alpha * n)))}:
            best = min(best, abs(m + alpha * n))
    # n = 0 contributes |m| >= 1
    return min(best, 1.0)
