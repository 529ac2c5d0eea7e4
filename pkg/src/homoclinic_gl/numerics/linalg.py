"""Small dense linear algebra: LU with partial pivoting, one-sided Jacobi SVD,
Gram-Schmidt orthonormalisation and principal angles between subspaces.

Everything here targets matrices of dimension at most 8.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SingularMatrixError",
    "SVDResult",
    "lu_factor",
    "lu_solve",
    "solve_small",
    "svd_small",
    "orthonormalize",
    "principal_angle_sines",
]

MAX_DIM = 8


class SingularMatrixError(np.linalg.LinAlgError):
    """Pivot vanished (numerically) during factorisation."""


@dataclass(frozen=True)
class SVDResult:
    U: np.ndarray  # m x k, orthonormal columns
    sigma: np.ndarray  # k, descending
    Vt: np.ndarray  # k x n


def lu_factor(A, pivot_tol: float = 1e-14):
    """Doolittle LU with partial pivoting. Returns ``(LU, perm)``."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("lu_factor needs a square matrix")
    perm = np.arange(n)
    scale = max(float(np.max(np.abs(A))), 1e-300)
    for k in range(n):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        if abs(A[p, k]) <= pivot_tol * scale:
            raise SingularMatrixError(f"zero pivot in column {k}")
        if p != k:
            A[[k, p]] = A[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        A[k + 1 :, k] /= A[k, k]
        A[k + 1 :, k + 1 :] -= np.outer(A[k + 1 :, k], A[k, k + 1 :])
    return A, perm


def lu_solve(lu_perm, b):
    LU, perm = lu_perm
    n = LU.shape[0]
    x = np.array(b, dtype=float)[perm]
    for i in range(n):
        x[i] -= LU[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - LU[i, i + 1 :] @ x[i + 1 :]) / LU[i, i]
    return x


def solve_small(A, b):
    return lu_solve(lu_factor(A), b)


def svd_small(M, tol: float = 1e-15, max_sweeps: int = 60) -> SVDResult:
    """Thin SVD of an ``m x n`` matrix (``m, n <= 8``) by one-sided Jacobi.

    Column pairs of a working copy are rotated until mutually orthogonal; the
    column norms are then the singular values.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("svd_small expects a 2-D array")
    m, n = M.shape
    if max(m, n) > MAX_DIM:
        raise ValueError(f"svd_small is limited to {MAX_DIM}x{MAX_DIM}")
    transposed = m < n
    # Work on a unit-scaled copy so squared norms neither underflow nor overflow.
    scale = float(np.max(np.abs(M))) if M.size else 0.0
    if scale == 0.0 or not np.isfinite(scale):
        scale = 1.0
    W = (M.T if transposed else M) / scale
    V = np.eye(W.shape[1])
    k = W.shape[1]
    for _ in range(max_sweeps):
        rotated = False
        for i in range(k - 1):
            for j in range(i + 1, k):
                alpha = W[:, i] @ W[:, i]
                beta = W[:, j] @ W[:, j]
                gamma = W[:, i] @ W[:, j]
                if abs(gamma) <= tol * np.sqrt(alpha * beta) or gamma == 0.0:
                    continue
                rotated = True
                with np.errstate(over="ignore"):
                    zeta = (beta - alpha) / (2.0 * gamma)
                if zeta == 0:
                    t = 1.0
                elif abs(zeta) > 1e150:
                    t = 0.5 / zeta  # zero when zeta overflowed
                else:
                    t = np.sign(zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                wi, wj = W[:, i].copy(), W[:, j].copy()
                W[:, i], W[:, j] = c * wi - s * wj, s * wi + c * wj
                vi, vj = V[:, i].copy(), V[:, j].copy()
                V[:, i], V[:, j] = c * vi - s * vj, s * vi + c * vj
        if not rotated:
            break
    sigma = np.sqrt(np.sum(W * W, axis=0))
    order = np.argsort(-sigma, kind="stable")
    sigma, W, V = sigma[order], W[:, order], V[:, order]
    U = np.zeros_like(W)
    rank_tol = max(W.shape) * np.finfo(float).eps * (sigma[0] if sigma.size else 0.0)
    for c in range(k):
        if sigma[c] > rank_tol:
            U[:, c] = W[:, c] / sigma[c]
    # Complete U for numerically null columns so it stays orthonormal.
    for c in range(k):
        if sigma[c] <= rank_tol:
            for e in np.eye(U.shape[0]):
                v = e - U @ (U.T @ e)
                if np.linalg.norm(v) > 1e-8:
                    U[:, c] = v / np.linalg.norm(v)
                    break
    sigma = sigma * scale
    if transposed:
        return SVDResult(V, sigma, U.T)
    return SVDResult(U, sigma, V.T)


def orthonormalize(A) -> np.ndarray:
    """Orthonormal basis of the column span (modified Gram-Schmidt, twice)."""
    Q = np.array(A, dtype=float)
    original = np.linalg.norm(Q, axis=0)
    for sweep in range(2):
        for j in range(Q.shape[1]):
            for i in range(j):
                Q[:, j] -= (Q[:, i] @ Q[:, j]) * Q[:, i]
            nrm = np.linalg.norm(Q[:, j])
            floor = 1e-13 * original[j] if sweep == 0 else 0.0
            if not nrm > floor or not np.isfinite(nrm):
                raise FloatingPointError("columns are linearly dependent")
            Q[:, j] /= nrm
    return Q


def principal_angle_sines(A, B) -> np.ndarray:
    """Sines of the principal angles between ``span(A)`` and ``span(B)``,
    ascending. Computed from the component of ``B`` orthogonal to ``A``,
    which keeps small angles accurate."""
    Qa = orthonormalize(A)
    Qb = orthonormalize(B)
    R = Qb - Qa @ (Qa.T @ Qb)
    return np.sort(svd_small(R).sigma)
