"""Steady states of the coupled real Ginzburg-Landau system as a 4D ODE.

State ``x = (x1, x2, x3, x4) = (U1, U2, U1', U2')``::

    x1' = x3
    x2' = x4
    x3' = x1 - (x1**2 + b1*x2**2)*x1 - b3*x2 - nu1*x3
    x4' = s*x2 - (b1*x1**2 + b2*x2**2)*x2 - b3*x1 - b4*x2**2 - nu1*x4

With ``nu1 = 0`` the field is Hamiltonian, ``f = J4 grad H``. All derivative
tensors are written out by hand. Every evaluator accepts states of shape
``(4,)`` or ``(4, ...)`` and broadcasts over trailing axes.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

__all__ = [
    "ParamId",
    "SystemParams",
    "SpectralData",
    "DomainError",
    "NonHyperbolicError",
    "J4",
    "S_MATRIX",
    "eval_f",
    "eval_jacobian",
    "eval_d2f",
    "eval_d3f",
    "eval_dmu_f",
    "eval_dmu_dx_f",
    "hamiltonian",
    "grad_hamiltonian",
    "homoclinic",
    "homoclinic_velocity",
    "sech",
    "equilibrium_spectrum",
]

J4 = np.array(
    [[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0], [-1.0, 0.0, 0.0, 0.0], [0.0, -1.0, 0.0, 0.0]]
)
# Z2 symmetry of the beta3 = beta4 = 0 system.
S_MATRIX = np.diag([1.0, -1.0, 1.0, -1.0])


class DomainError(ValueError):
    """Non-finite or otherwise inadmissible input."""


class NonHyperbolicError(ValueError):
    def __init__(self, eigenvalue):
        super().__init__(f"origin is not hyperbolic: eigenvalue {eigenvalue!r} has ~zero real part")
        self.eigenvalue = eigenvalue


class ParamId(str, enum.Enum):
    BETA1 = "beta1"
    BETA2 = "beta2"
    BETA3 = "beta3"
    BETA4 = "beta4"
    NU1 = "nu1"

    @classmethod
    def parse(cls, which) -> "ParamId":
        if isinstance(which, cls):
            return which
        try:
            return cls(str(which).lower())
        except ValueError:
            raise KeyError(f"unknown parameter id {which!r}") from None


@dataclass(frozen=True)
class SystemParams:
    s: float = 2.0
    beta1: float = 0.0
    beta2: float = 0.0
    beta3: float = 0.0
    beta4: float = 0.0
    nu1: float = 0.0

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not math.isfinite(v):
                raise DomainError(f"{k} must be finite, got {v}")
        if not self.s > 0:
            raise DomainError(f"s must be positive, got {self.s}")

    @property
    def outside_standing_assumption(self) -> bool:
        """True when ``s < 1``: accepted, but outside the range the
        classification results were derived for."""
        return self.s < 1.0

    @property
    def eigenvalue_resonant(self) -> bool:
        """True when ``sqrt(s)`` coincides with 1 (double eigenvalues)."""
        return abs(math.sqrt(self.s) - 1.0) <= 1e-6

    def get(self, which) -> float:
        return getattr(self, ParamId.parse(which).value)

    def replace(self, **kw) -> "SystemParams":
        d = asdict(self)
        for k, v in kw.items():
            key = ParamId.parse(k).value if k != "s" else "s"
            d[key] = float(v)
        return SystemParams(**d)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: np.ndarray  # ascending real parts
    eigenvectors: np.ndarray  # columns, unit length
    stable_basis: np.ndarray  # 4 x 2
    unstable_basis: np.ndarray  # 4 x 2
    residual: float


def _state(x):
    x = np.asarray(x, dtype=float)
    if x.shape[0] != 4:
        raise DomainError(f"state must have leading dimension 4, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("state contains non-finite entries")
    return x


def eval_f(x, p: SystemParams) -> np.ndarray:
    x1, x2, x3, x4 = _state(x)
    return np.array(
        [
            x3,
            x4,
            x1 - (x1**2 + p.beta1 * x2**2) * x1 - p.beta3 * x2 - p.nu1 * x3,
            p.s * x2
            - (p.beta1 * x1**2 + p.beta2 * x2**2) * x2
            - p.beta3 * x1
            - p.beta4 * x2**2
            - p.nu1 * x4,
        ]
    )


def eval_jacobian(x, p: SystemParams) -> np.ndarray:
    """Jacobian ``df/dx``; shape ``(4, 4) + x.shape[1:]``."""
    x1, x2, _, _ = _state(x)
    zero = np.zeros_like(x1)
    one = np.ones_like(x1)
    c = -2.0 * p.beta1 * x1 * x2 - p.beta3
    return np.array(
        [
            [zero, zero, one, zero],
            [zero, zero, zero, one],
            [1.0 - 3.0 * x1**2 - p.beta1 * x2**2, c, -p.nu1 * one, zero],
            [c, p.s - p.beta1 * x1**2 - 3.0 * p.beta2 * x2**2 - 2.0 * p.beta4 * x2, zero, -p.nu1 * one],
        ]
    )


def eval_d2f(x, p: SystemParams, u, v) -> np.ndarray:
    """Second derivative of ``f`` contracted with ``u`` and ``v``."""
    x1, x2, _, _ = _state(x)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    b1 = p.beta1
    mixed = u[0] * v[1] + u[1] * v[0]
    out3 = -6.0 * x1 * u[0] * v[0] - 2.0 * b1 * x2 * mixed - 2.0 * b1 * x1 * u[1] * v[1]
    out4 = (
        -2.0 * b1 * x2 * u[0] * v[0]
        - 2.0 * b1 * x1 * mixed
        - (6.0 * p.beta2 * x2 + 2.0 * p.beta4) * u[1] * v[1]
    )
    zero = np.zeros_like(out3)
    return np.array([zero, zero, out3, out4])


def eval_d3f(x, p: SystemParams, u, v, w) -> np.ndarray:
    """Third derivative contracted with ``u, v, w`` (constant in ``x``)."""
    _state(x)
    u, v, w = (np.asarray(a, dtype=float) for a in (u, v, w))
    b1 = p.beta1
    out3 = -6.0 * u[0] * v[0] * w[0] - 2.0 * b1 * (
        u[0] * v[1] * w[1] + u[1] * v[0] * w[1] + u[1] * v[1] * w[0]
    )
    out4 = -2.0 * b1 * (
        u[0] * v[0] * w[1] + u[0] * v[1] * w[0] + u[1] * v[0] * w[0]
    ) - 6.0 * p.beta2 * u[1] * v[1] * w[1]
    zero = np.zeros_like(out3)
    return np.array([zero, zero, out3, out4])


def eval_dmu_f(x, p: SystemParams, which) -> np.ndarray:
    which = ParamId.parse(which)
    x1, x2, x3, x4 = _state(x)
    zero = np.zeros_like(x1)
    if which is ParamId.BETA1:
        return np.array([zero, zero, -(x2**2) * x1, -(x1**2) * x2])
    if which is ParamId.BETA2:
        return np.array([zero, zero, zero, -(x2**3)])
    if which is ParamId.BETA3:
        return np.array([zero, zero, -x2, -x1])
    if which is ParamId.BETA4:
        return np.array([zero, zero, zero, -(x2**2)])
    return np.array([zero, zero, -x3, -x4])


def eval_dmu_dx_f(x, p: SystemParams, which, u) -> np.ndarray:
    which = ParamId.parse(which)
    x1, x2, _, _ = _state(x)
    u = np.asarray(u, dtype=float)
    zero = np.zeros_like(x1 * u[0])
    if which is ParamId.BETA1:
        return np.array(
            [zero, zero, -(x2**2) * u[0] - 2.0 * x1 * x2 * u[1], -2.0 * x1 * x2 * u[0] - x1**2 * u[1]]
        )
    if which is ParamId.BETA2:
        return np.array([zero, zero, zero, -3.0 * x2**2 * u[1]])
    if which is ParamId.BETA3:
        return np.array([zero, zero, -u[1] + zero, -u[0] + zero])
    if which is ParamId.BETA4:
        return np.array([zero, zero, zero, -2.0 * x2 * u[1]])
    return np.array([zero, zero, -u[2] + zero, -u[3] + zero])


def hamiltonian(x, p: SystemParams):
    x1, x2, x3, x4 = _state(x)
    return (
        0.5 * (-(x1**2) - p.s * x2**2 + p.beta1 * x1**2 * x2**2 + x3**2 + x4**2)
        + 0.25 * (x1**4 + p.beta2 * x2**4)
        + p.beta3 * x1 * x2
        + p.beta4 * x2**3 / 3.0
    )


def grad_hamiltonian(x, p: SystemParams) -> np.ndarray:
    x1, x2, x3, x4 = _state(x)
    return np.array(
        [
            -x1 + p.beta1 * x1 * x2**2 + x1**3 + p.beta3 * x2,
            -p.s * x2 + p.beta1 * x1**2 * x2 + p.beta2 * x2**3 + p.beta3 * x1 + p.beta4 * x2**2,
            x3,
            x4,
        ]
    )


def sech(t):
    """Overflow-free hyperbolic secant."""
    a = np.exp(-np.abs(np.asarray(t, dtype=float)))
    return 2.0 * a / (1.0 + a * a)


def homoclinic(t, sign: int = 1) -> np.ndarray:
    """Explicit homoclinic orbit ``x_h(t)`` in the ``(x1, x3)`` plane
    (exact for ``beta3 = nu1 = 0``)."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    t = np.asarray(t, dtype=float)
    sc, th = sech(t), np.tanh(t)
    r2 = math.sqrt(2.0)
    zero = np.zeros_like(sc)
    return np.array([sign * r2 * sc, zero, -sign * r2 * sc * th, zero])


def homoclinic_velocity(t, sign: int = 1) -> np.ndarray:
    """Time derivative of :func:`homoclinic`."""
    t = np.asarray(t, dtype=float)
    sc, th = sech(t), np.tanh(t)
    r2 = math.sqrt(2.0)
    zero = np.zeros_like(sc)
    return np.array([-sign * r2 * sc * th, zero, -sign * r2 * (2.0 * sc**3 - sc), zero])


def equilibrium_spectrum(p: SystemParams, tol: float = 1e-9) -> SpectralData:
    """Eigen-decomposition of the linearisation at the origin."""
    A = eval_jacobian(np.zeros(4), p)
    w, V = np.linalg.eig(A)
    for lam in w:
        if abs(lam.real) <= tol:
            raise NonHyperbolicError(complex(lam))
    order = np.lexsort((w.imag, w.real))
    w, V = w[order], V[:, order]
    if np.max(np.abs(w.imag)) > 1e-12:
        # Complex pairs: represent each invariant plane by real and imaginary parts.
        stable = _real_basis(V[:, w.real < 0], w[w.real < 0])
        unstable = _real_basis(V[:, w.real > 0], w[w.real > 0])
        vals, vecs = w, V
    else:
        vals, vecs = w.real, V.real
        vecs = vecs / np.linalg.norm(vecs, axis=0)
        stable = vecs[:, vals < 0]
        unstable = vecs[:, vals > 0]
    res = float(np.max(np.abs(A @ vecs - vecs * vals)))
    if stable.shape[1] != 2 or unstable.shape[1] != 2:
        raise NonHyperbolicError(complex(w[1]))
    return SpectralData(vals, vecs, stable, unstable, res)


def _real_basis(V, w):
    cols = []
    done = set()
    for i, lam in enumerate(w):
        if i in done:
            continue
        if abs(lam.imag) > 1e-12:
            cols += [V[:, i].real, V[:, i].imag]
            for j in range(i + 1, len(w)):
                if abs(w[j] - np.conj(lam)) < 1e-10:
                    done.add(j)
                    break
        else:
            cols.append(V[:, i].real)
    B = np.array(cols).T
    return B / np.linalg.norm(B, axis=0)


def warn_if_outside_assumption(p: SystemParams) -> None:
    if p.outside_standing_assumption:
        warnings.warn(f"s={p.s} < 1: results are computed but outside the s >= 1 range", stacklevel=2)
