"""Variational equations along the homoclinic orbit, their explicit solutions,
adjoint solutions, and a numerical count of bounded solutions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import model
from .model import J4, SystemParams, sech
from .numerics import IntegratorConfig, integrate_ode, orthonormalize, principal_angle_sines
from .specfun import xi2_bounded, xi2_bounded_dot

__all__ = [
    "LinearSystemAlongOrbit",
    "TangentBasis",
    "SolutionBasis",
    "BoundedCount",
    "ve_along_homoclinic",
    "ve_along_orbit",
    "nve_2d",
    "tve_2d",
    "analytic_tangent_basis",
    "adjoint_from_solution",
    "solution_basis",
    "count_bounded_solutions",
]


@dataclass(frozen=True)
class LinearSystemAlongOrbit:
    coefficient: Callable[[float], np.ndarray]
    asymptotic: np.ndarray
    n: int
    label: str = ""

    def __post_init__(self):
        w = np.linalg.eigvals(self.asymptotic)
        bad = w[np.abs(w.real) < 1e-9]
        if bad.size:
            raise model.NonHyperbolicError(complex(bad[0]))

    def rhs(self, t, Y):
        return self.coefficient(t) @ Y

    def residual(self, sol: Callable, t, h: float = 1e-4) -> float:
        """Max-norm residual of ``sol`` in this system, derivative by a
        sixth-order central difference."""
        worst = 0.0
        for ti in np.atleast_1d(t):
            d = (
                -sol(ti - 3 * h) + 9 * sol(ti - 2 * h) - 45 * sol(ti - h)
                + 45 * sol(ti + h) - 9 * sol(ti + 2 * h) + sol(ti + 3 * h)
            ) / (60 * h)
            worst = max(worst, float(np.max(np.abs(d - self.coefficient(ti) @ sol(ti)))))
        return worst


def ve_along_orbit(orbit: Callable[[float], np.ndarray], p: SystemParams, label="VE") -> LinearSystemAlongOrbit:
    """VE along an arbitrary orbit homoclinic to the origin."""
    if p.eigenvalue_resonant:
        raise model.DomainError(f"s={p.s} gives coinciding eigenvalues at the origin; need |sqrt(s) - 1| > 1e-6")

    def coef(t):
        return model.eval_jacobian(orbit(t), p)

    return LinearSystemAlongOrbit(coef, model.eval_jacobian(np.zeros(4), p), 4, label)


def ve_along_homoclinic(p: SystemParams, sign: int = 1) -> LinearSystemAlongOrbit:
    if p.beta3 != 0 or p.beta4 != 0 or p.nu1 != 0:
        raise ValueError(
            "the explicit orbit needs beta3 = beta4 = nu1 = 0; pass a numerical orbit to ve_along_orbit"
        )
    return ve_along_orbit(lambda t: model.homoclinic(t, sign), p, "VE")


def nve_2d(p: SystemParams) -> LinearSystemAlongOrbit:
    """``eta'' = (s - 2 beta1 sech(t)**2) eta`` in first-order form."""
    if p.beta3 != 0:
        raise ValueError("the normal block decouples only for beta3 = 0")
    s, b1 = p.s, p.beta1

    def coef(t):
        return np.array([[0.0, 1.0], [s - 2.0 * b1 * sech(t) ** 2, 0.0]])

    return LinearSystemAlongOrbit(coef, np.array([[0.0, 1.0], [s, 0.0]]), 2, "NVE")


def tve_2d() -> LinearSystemAlongOrbit:
    """Tangential block ``eta'' = (1 - 6 sech(t)**2) eta``."""

    def coef(t):
        return np.array([[0.0, 1.0], [1.0 - 6.0 * sech(t) ** 2, 0.0]])

    return LinearSystemAlongOrbit(coef, np.array([[0.0, 1.0], [1.0, 0.0]]), 2, "TVE")


@dataclass(frozen=True)
class TangentBasis:
    """Explicit solutions of the tangential block and their duals, embedded in
    R^4 with zero ``(x2, x4)`` components. ``phi1`` is bounded (it equals
    ``-xdot_h / sqrt(2)``), ``phi3`` grows in both time directions."""

    phi1: np.ndarray
    phi3: np.ndarray
    psi1: np.ndarray
    psi3: np.ndarray


def _tangent_components(t):
    t = np.asarray(t, dtype=float)
    sc, th = sech(t), np.tanh(t)
    sh = np.sinh(t)  # phi3 and psi1 grow like exp(|t|)
    p11 = sc * th
    p13 = 2.0 * sc**3 - sc
    p31 = 1.5 * t * sc * th + 0.5 * sh * th - sc
    p33 = 3.0 * t * sc**3 + 3.0 * sc * th - 1.5 * t * sc + 0.5 * sh
    return p11, p13, p31, p33


def analytic_tangent_basis(t) -> TangentBasis:
    p11, p13, p31, p33 = _tangent_components(t)
    zero = np.zeros_like(p11)
    return TangentBasis(
        phi1=np.array([p11, zero, p13, zero]),
        phi3=np.array([p31, zero, p33, zero]),
        psi1=np.array([p33, zero, -p31, zero]),
        psi3=np.array([-p13, zero, p11, zero]),
    )


def adjoint_from_solution(phi: Callable) -> Callable:
    """Map a VE solution to the adjoint solution ``-J4 phi(t)``."""

    def psi(t):
        v = np.asarray(phi(t), dtype=float)
        return -np.tensordot(J4, v, axes=(1, 0))

    return psi


@dataclass
class SolutionBasis:
    phi: list  # four callables t -> R^4
    psi: list
    bounded: tuple[bool, bool, bool, bool] = (True, True, False, False)
    meta: dict = field(default_factory=dict)

    def biorthogonality_defect(self, ts: Sequence[float], relative: bool = True) -> float:
        """Largest deviation of ``<psi_j, phi_k>`` from ``delta_jk``.

        With ``relative`` each entry is divided by ``max(1, |psi_j| |phi_k|)``:
        growing solutions make the products large and the absolute rounding
        error grows with them.
        """
        worst = 0.0
        for t in ts:
            P = np.array([f(t) for f in self.phi]).T
            Q = np.array([f(t) for f in self.psi]).T
            D = np.abs(Q.T @ P - np.eye(4))
            if relative:
                D = D / np.maximum(1.0, np.outer(np.linalg.norm(Q, axis=0), np.linalg.norm(P, axis=0)))
            worst = max(worst, float(np.max(D)))
        return worst


def solution_basis(s: float, ell: int, T: float = 20.0, cfg: IntegratorConfig | None = None) -> SolutionBasis:
    """Fundamental solutions of the VE at ``beta1 = resonance_beta1(s, ell)``
    (``beta3 = beta4 = 0``) together with their duals.

    ``phi1, phi3`` come from the tangential block in closed form; ``phi2`` is
    the bounded normal solution and ``phi4`` a second normal solution with unit
    Wronskian, integrated numerically on ``[-T, T]``.
    """
    from .fuchsian import resonance_beta1

    cfg = cfg or IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)
    beta1 = resonance_beta1(s, ell)
    x0 = float(xi2_bounded(0.0, s, ell))
    v0 = float(xi2_bounded_dot(0.0, s, ell))
    nrm = x0 * x0 + v0 * v0
    y0 = np.array([-v0, x0]) / nrm

    def rhs(t, y):
        return np.array([y[1], (s - 2.0 * beta1 * sech(t) ** 2) * y[0]])

    fwd = integrate_ode(rhs, y0, 0.0, T, cfg)
    bwd = integrate_ode(rhs, y0, 0.0, -T, cfg)

    def eta(t):
        return fwd(t) if t >= 0 else bwd(t)

    def phi1(t):
        return analytic_tangent_basis(t).phi1

    def phi3(t):
        return analytic_tangent_basis(t).phi3

    def psi1(t):
        return analytic_tangent_basis(t).psi1

    def psi3(t):
        return analytic_tangent_basis(t).psi3

    def phi2(t):
        return np.array([0.0, xi2_bounded(t, s, ell), 0.0, xi2_bounded_dot(t, s, ell)])

    def phi4(t):
        e = eta(t)
        return np.array([0.0, e[0], 0.0, e[1]])

    def psi2(t):
        e = eta(t)
        return np.array([0.0, e[1], 0.0, -e[0]])

    def psi4(t):
        return np.array([0.0, -xi2_bounded_dot(t, s, ell), 0.0, xi2_bounded(t, s, ell)])

    return SolutionBasis(
        [phi1, phi2, phi3, phi4],
        [psi1, psi2, psi3, psi4],
        meta={"s": s, "ell": ell, "beta1": beta1, "T": T},
    )


@dataclass(frozen=True)
class BoundedCount:
    n0: int
    sines: np.ndarray
    T: float
    sv_tol: float


def _propagate(sys: LinearSystemAlongOrbit, Y, t_start, t_end, cfg, dt):
    Y = orthonormalize(Y)
    direction = 1.0 if t_end > t_start else -1.0
    t = t_start
    while direction * (t_end - t) > 1e-14:
        t_next = t + direction * min(dt, abs(t_end - t))
        traj = integrate_ode(sys.rhs, Y, t, t_next, cfg)
        Y = traj(t_next)
        if not np.all(np.isfinite(Y)):
            raise FloatingPointError(f"subspace propagation overflowed near t={t_next}")
        Y = orthonormalize(Y)
        t = t_next
    return Y


def count_bounded_solutions(
    sys: LinearSystemAlongOrbit,
    T: float = 20.0,
    sv_tol: float = 1e-4,
    cfg: IntegratorConfig | None = None,
    reortho_dt: float = 0.5,
) -> BoundedCount:
    """Number of independent bounded solutions.

    The unstable eigenspace of the limiting matrix is carried from ``-T`` to
    ``0`` and the stable one from ``+T`` to ``0``; bounded solutions correspond
    to the intersection of the two transported subspaces, detected as
    principal angles with sine below ``sv_tol``.
    """
    cfg = cfg or IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12)
    for edge in (-T, T):
        dev = float(np.max(np.abs(sys.coefficient(edge) - sys.asymptotic)))
        if dev > 1e-6:
            raise ValueError(f"T={T} too small: coefficient deviates by {dev:.2e} at t={edge}")
    w, V = np.linalg.eig(sys.asymptotic)
    if np.max(np.abs(w.imag)) > 1e-12:
        raise NotImplementedError("complex asymptotic spectra are not supported")
    w, V = w.real, V.real
    unstable = V[:, w > 0]
    stable = V[:, w < 0]
    Yu = _propagate(sys, unstable, -T, 0.0, cfg, reortho_dt)
    Ys = _propagate(sys, stable, T, 0.0, cfg, reortho_dt)
    sines = principal_angle_sines(Yu, Ys)
    return BoundedCount(int(np.sum(sines < sv_tol)), sines, T, sv_tol)
