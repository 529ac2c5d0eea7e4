"""Truncated boundary-value formulation for orbits homoclinic to the origin.

The orbit on ``[-T, T]`` is a continuous piecewise polynomial of degree 4,
stored by its values at five equally spaced nodes per mesh interval and
collocated at the four Gauss points of each interval. Endpoints are confined
to the linear unstable (at ``-T``) and stable (at ``+T``) subspaces of the
origin, and an integral phase condition against a reference orbit removes
the time-shift invariance. The damping ``nu1`` is an unknown.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .. import model
from ..model import ParamId, SystemParams

__all__ = [
    "DEGREE",
    "BvpMesh",
    "BvpProblem",
    "graded_grid",
    "bvp_residual",
    "bvp_jacobian",
]

DEGREE = 4
_NLOC = DEGREE + 1

_TAU = np.linspace(0.0, 1.0, _NLOC)
_gx, _gw = np.polynomial.legendre.leggauss(DEGREE)
_SIGMA = 0.5 * (_gx + 1.0)
_GW = 0.5 * _gw


def _lagrange_tables():
    C = np.linalg.inv(np.vander(_TAU, _NLOC, increasing=True))  # L_k(x) = sum_j C[j, k] x**j
    Vs = np.vander(_SIGMA, _NLOC, increasing=True)
    D = np.zeros_like(Vs)
    for j in range(1, _NLOC):
        D[:, j] = j * _SIGMA ** (j - 1)
    q = np.array([np.sum(C[:, k] / np.arange(1, _NLOC + 1)) for k in range(_NLOC)])
    return C, Vs @ C, D @ C, q


_C, _LV, _LD, _NC = _lagrange_tables()


def graded_grid(T: float = 15.0, N: int = 80, amplitude: float = 8.0) -> np.ndarray:
    """Mesh points on ``[-T, T]`` with density ``1 + amplitude sech(t/2)**2``.

    ``N`` must be even so that ``t = 0`` is a mesh point.
    """
    if N < 40 or N % 2:
        raise ValueError(f"N must be an even integer >= 40, got {N}")
    if not T > 0:
        raise ValueError("T must be positive")

    def F(t):
        return t + 2.0 * amplitude * np.tanh(0.5 * t)

    fine = np.linspace(0.0, T, 20001)
    targets = np.linspace(0.0, F(T), N // 2 + 1)
    half = np.interp(targets, F(fine), fine)
    half[-1] = T
    return np.concatenate([-half[:0:-1], half])


@dataclass(frozen=True)
class BvpMesh:
    """Mesh intervals ``grid`` and node values ``X`` of shape ``(4N+1, 4)``."""

    grid: np.ndarray
    X: np.ndarray
    degree: int = DEGREE

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 1 or g.size < 41:
            raise ValueError("need at least 40 mesh intervals")
        if not np.all(np.diff(g) > 0):
            raise ValueError("mesh points must be strictly increasing")
        if self.X.shape != (DEGREE * (g.size - 1) + 1, 4):
            raise ValueError(f"X has shape {self.X.shape}, expected {(DEGREE * (g.size - 1) + 1, 4)}")

    @property
    def N(self) -> int:
        return self.grid.size - 1

    @property
    def T(self) -> float:
        return float(self.grid[-1])

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.grid)

    @property
    def nodes(self) -> np.ndarray:
        return node_times(self.grid)

    @classmethod
    def from_function(cls, grid, fn: Callable) -> "BvpMesh":
        """Sample ``fn(t) -> (4, n)`` at the collocation nodes."""
        grid = np.asarray(grid, dtype=float)
        t = node_times(grid)
        return cls(grid, np.asarray(fn(t), dtype=float).T.copy())

    def with_X(self, X) -> "BvpMesh":
        return BvpMesh(self.grid, np.asarray(X, dtype=float).reshape(self.X.shape))

    def __call__(self, t) -> np.ndarray:
        """Evaluate the piecewise polynomial; returns shape ``(4,) + shape(t)``."""
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        i = np.clip(np.searchsorted(self.grid, flat, side="right") - 1, 0, self.N - 1)
        x = (flat - self.grid[i]) / self.h[i]
        V = np.vander(x, _NLOC, increasing=True) @ _C  # (n, 5)
        idx = DEGREE * i[:, None] + np.arange(_NLOC)
        out = np.einsum("nk,nka->an", V, self.X[idx])
        return out.reshape((4,) + t.shape)

    def dense(self, per_interval: int = 20):
        x = np.linspace(0.0, 1.0, per_interval + 1)[:-1]
        t = (self.grid[:-1, None] + self.h[:, None] * x).ravel()
        t = np.append(t, self.grid[-1])
        return t, self(t)

    def weights(self) -> np.ndarray:
        """Nodal quadrature weights (closed Newton-Cotes per interval)."""
        w = np.zeros(self.X.shape[0])
        idx = DEGREE * np.arange(self.N)[:, None] + np.arange(_NLOC)
        np.add.at(w, idx, self.h[:, None] * _NC)
        return w

    def inner(self, U, V) -> float:
        return float(np.sum(self.weights()[:, None] * np.asarray(U).reshape(self.X.shape) * np.asarray(V).reshape(self.X.shape)))

    def apply_symmetry(self) -> "BvpMesh":
        return self.with_X(self.X @ model.S_MATRIX)


def node_times(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    h = np.diff(grid)
    t = (grid[:-1, None] + h[:, None] * _TAU[:-1]).ravel()
    return np.append(t, grid[-1])


def _canonical_sign(r):
    # Fix the sign by the velocity components, falling back to the largest entry.
    key = r[2] + r[3]
    if abs(key) < 1e-12:
        key = r[np.argmax(np.abs(r))]
    return r if key > 0 else -r


def _boundary_rows(p: SystemParams):
    """Left eigenvectors for the stable (used at ``-T``) and unstable (used at
    ``+T``) eigenvalues, as real unit rows ordered by eigenvalue with a
    canonical sign."""
    model.equilibrium_spectrum(p)
    A = model.eval_jacobian(np.zeros(4), p)
    w, V = np.linalg.eig(A)
    order = np.lexsort((w.imag, w.real))
    w, V = w[order], V[:, order]
    Vi = np.linalg.inv(V)

    def rows(mask):
        out = []
        used = set()
        idx = np.flatnonzero(mask)
        for i in idx:
            if i in used:
                continue
            r = Vi[i]
            if abs(w[i].imag) > 1e-12:
                out += [r.real, r.imag]
                j = [k for k in idx if k != i and abs(w[k] - np.conj(w[i])) < 1e-10]
                used.update(j)
            else:
                out.append(r.real)
        R = np.array(out)
        R = R / np.linalg.norm(R, axis=1, keepdims=True)
        return np.array([_canonical_sign(r) for r in R])

    return rows(w.real < 0), rows(w.real > 0)


def _align(new, old):
    """Permute and flip rows of ``new`` to follow ``old`` continuously."""
    out = np.empty_like(new)
    free = list(range(new.shape[0]))
    for i, r in enumerate(old):
        j = max(free, key=lambda k: abs(np.dot(new[k], r)))
        free.remove(j)
        out[i] = new[j] if np.dot(new[j], r) >= 0 else -new[j]
    return out


def _complement_projector(B):
    Q, _ = np.linalg.qr(B)
    return np.eye(4) - Q @ Q.T


class BvpProblem:
    """Residual and Jacobian of the truncated problem at given parameters.

    Parameters
    ----------
    grid : mesh points.
    base : parameter set; ``nu1`` and the optional ``control`` are overridden
        by the unknowns.
    reference : node values of the orbit used in the phase condition.
    control : parameter that becomes an unknown in continuation, or ``None``.
    """

    def __init__(self, grid, base: SystemParams, reference: np.ndarray, control: ParamId | str | None = None):
        if base.eigenvalue_resonant:
            raise model.DomainError(f"s={base.s} gives coinciding eigenvalues at the origin; need |sqrt(s) - 1| > 1e-6")
        self.grid = np.asarray(grid, dtype=float)
        self.N = self.grid.size - 1
        self.h = np.diff(self.grid)
        self.base = base
        self.control = None if control is None else ParamId.parse(control)
        self.n_nodes = DEGREE * self.N + 1
        self.nx = 4 * self.n_nodes
        self.idx = DEGREE * np.arange(self.N)[:, None] + np.arange(_NLOC)
        self.set_reference(reference)
        self.W_left, self.W_right = _boundary_rows(base)

    # ------------------------------------------------------------- setup
    def set_reference(self, reference):
        ref = np.asarray(reference, dtype=float).reshape(self.n_nodes, 4)
        self.ref = ref
        Xi = ref[self.idx]
        self.ref_g = np.einsum("mk,ika->ima", _LV, Xi)
        self.dref_g = np.einsum("mk,ika->ima", _LD, Xi) / self.h[:, None, None]
        # d(phase)/dX coefficients.
        coef = self.h[:, None, None] * _GW[None, :, None] * self.dref_g  # (N, m, a)
        row = np.zeros((self.n_nodes, 4))
        np.add.at(row, self.idx, np.einsum("mk,ima->ika", _LV, coef))
        self.phase_row = row.ravel()
        self.phase_offset = float(np.sum(coef * self.ref_g))

    def refresh_boundary(self, p: SystemParams):
        left, right = _boundary_rows(p)
        self.W_left = _align(left, self.W_left)
        self.W_right = _align(right, self.W_right)

    def params(self, nu1: float, lam: float | None = None) -> SystemParams:
        kw = {"nu1": float(nu1)}
        if self.control is not None and lam is not None:
            kw[self.control.value] = float(lam)
        return self.base.replace(**kw)

    @property
    def n_eq(self) -> int:
        return 16 * self.N + self.W_left.shape[0] + self.W_right.shape[0] + 1

    # ------------------------------------------------------------- residual
    def residual(self, X, nu1: float, lam: float | None = None) -> np.ndarray:
        p = self.params(nu1, lam)
        X = np.asarray(X, dtype=float).reshape(self.n_nodes, 4)
        Xi = X[self.idx]
        xg = np.einsum("mk,ika->ima", _LV, Xi)
        dg = np.einsum("mk,ika->ima", _LD, Xi) / self.h[:, None, None]
        fg = np.moveaxis(model.eval_f(np.moveaxis(xg, -1, 0), p), 0, -1)
        coll = (dg - fg).ravel()
        spec = model.equilibrium_spectrum(p)
        Pl = _complement_projector(spec.unstable_basis)
        Pr = _complement_projector(spec.stable_basis)
        bl = self.W_left @ (Pl @ X[0])
        br = self.W_right @ (Pr @ X[-1])
        phase = float(np.dot(self.phase_row, X.ravel())) - self.phase_offset
        return np.concatenate([coll, bl, br, [phase]])

    def jacobian_x(self, X, nu1: float, lam: float | None = None) -> np.ndarray:
        p = self.params(nu1, lam)
        X = np.asarray(X, dtype=float).reshape(self.n_nodes, 4)
        Xi = X[self.idx]
        xg = np.einsum("mk,ika->ima", _LV, Xi)
        Df = np.moveaxis(model.eval_jacobian(np.moveaxis(xg, -1, 0), p), (0, 1), (-2, -1))  # (N, m, 4, 4)
        eye = np.eye(4)
        # B[i, m, a, k, b]
        B = (_LD[None, :, None, :, None] / self.h[:, None, None, None, None]) * eye[None, None, :, None, :] \
            - _LV[None, :, None, :, None] * Df[:, :, :, None, :]
        J = np.zeros((self.n_eq, self.nx))
        rows = (np.arange(self.N)[:, None, None] * DEGREE + np.arange(DEGREE)[None, :, None]) * 4 \
            + np.arange(4)[None, None, :]  # (N, m, a)
        cols = self.idx[:, :, None] * 4 + np.arange(4)[None, None, :]  # (N, k, b)
        R = np.broadcast_to(rows[:, :, :, None, None], B.shape)
        Cc = np.broadcast_to(cols[:, None, None, :, :], B.shape)
        J[R.ravel(), Cc.ravel()] = B.ravel()
        spec = model.equilibrium_spectrum(p)
        Pl = _complement_projector(spec.unstable_basis)
        Pr = _complement_projector(spec.stable_basis)
        r0 = 16 * self.N
        nl = self.W_left.shape[0]
        nr = self.W_right.shape[0]
        J[r0:r0 + nl, 0:4] = self.W_left @ Pl
        J[r0 + nl:r0 + nl + nr, self.nx - 4:] = self.W_right @ Pr
        J[-1, :] = self.phase_row
        return J

    def param_column(self, X, nu1, lam, which: str, h: float = 1e-7) -> np.ndarray:
        if which == "nu1":
            return (self.residual(X, nu1 + h, lam) - self.residual(X, nu1 - h, lam)) / (2 * h)
        hh = h * max(1.0, abs(lam))
        return (self.residual(X, nu1, lam + hh) - self.residual(X, nu1, lam - hh)) / (2 * hh)

    # ------------------------------------------------------------- structure
    def antisymmetric_block(self, J: np.ndarray) -> np.ndarray:
        """Square block of ``J`` acting on the ``(x2, x4)`` components.

        Only meaningful when the linearisation decouples (``beta3 = 0``) and
        the orbit lies in the ``(x1, x3)`` plane.
        """
        coll_rows = np.arange(16 * self.N).reshape(self.N * DEGREE, 4)[:, [1, 3]].ravel()
        r0 = 16 * self.N
        bc_rows = []
        for j, w in enumerate(self.W_left):
            if abs(w[0]) + abs(w[2]) < 1e-12:
                bc_rows.append(r0 + j)
        for j, w in enumerate(self.W_right):
            if abs(w[0]) + abs(w[2]) < 1e-12:
                bc_rows.append(r0 + self.W_left.shape[0] + j)
        cols = (np.arange(self.n_nodes)[:, None] * 4 + np.array([1, 3])).ravel()
        rows = np.concatenate([coll_rows, bc_rows]).astype(int)
        if rows.size != cols.size:
            raise ValueError("boundary conditions do not split between the coordinate planes")
        return J[np.ix_(rows, cols)]


def bvp_residual(mesh: BvpMesh, p: SystemParams, reference: BvpMesh | None = None) -> np.ndarray:
    """Collocation, projection and phase residuals of ``mesh`` at ``p``
    (``nu1`` taken from ``p``). The phase reference defaults to ``x_h``."""
    ref = reference.X if reference is not None else BvpMesh.from_function(mesh.grid, lambda t: model.homoclinic(t, 1)).X
    prob = BvpProblem(mesh.grid, p, ref)
    return prob.residual(mesh.X, p.nu1)


def bvp_jacobian(mesh: BvpMesh, p: SystemParams, reference: BvpMesh | None = None) -> np.ndarray:
    ref = reference.X if reference is not None else BvpMesh.from_function(mesh.grid, lambda t: model.homoclinic(t, 1)).X
    prob = BvpProblem(mesh.grid, p, ref)
    return prob.jacobian_x(mesh.X, p.nu1)
