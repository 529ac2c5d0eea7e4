"""Melnikov coefficients for saddle-node and pitchfork bifurcations of the
homoclinic orbit ``x_h = (sqrt(2) sech t, 0, -sqrt(2) sech t tanh t, 0)``.

With ``phi2 = (0, xi2, 0, xi2')`` the bounded normal solution and
``psi2 = -J4 phi2`` its adjoint, the coefficients reduce to

    a2     = -int xi2 x1h,                 b2     = -beta4 int xi2**3,
    bar_a2 = -int xi2**2 x1h**2,           bar_b2 = -2 beta1 int x1h xi1a xi2**2 - beta2 int xi2**4,

where ``a2, b2`` use ``mu = beta3`` and ``bar_a2, bar_b2`` use ``mu = beta1``.
``xi1a`` is the first component of the bounded solution of
``xi' = Df(x_h) xi + D2f(x_h)(phi2, phi2) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import model
from .fuchsian import resonance_beta1
from .model import J4, SystemParams, sech
from .numerics import integrate_line
from .specfun import gamma_fn, sech_power_integral, xi2_bounded, xi2_bounded_dot, xi2_series
from .variational import _tangent_components

__all__ = [
    "Estimate",
    "MelnikovReport",
    "ParticularSolution",
    "Classification",
    "coeff_a2_b2",
    "closed_form_a2_b2",
    "printed_closed_form_a2_b2",
    "sign_threshold",
    "xi_alpha",
    "coeff_bar_a2_bar_b2",
    "classify_saddle_node",
    "classify_pitchfork",
    "general_melnikov_ab",
    "general_melnikov_bar_ab",
    "normal_phi2",
    "melnikov_report",
    "DEGENERACY_FACTOR",
]

DEGENERACY_FACTOR = 10.0
_SQRT2 = math.sqrt(2.0)


class Classification:
    SN_SUPER = "saddle-node-supercritical"
    SN_SUB = "saddle-node-subcritical"
    PF_SUPER = "pitchfork-supercritical"
    PF_SUB = "pitchfork-subcritical"
    DEGENERATE = "degenerate"
    NONE = "none"


@dataclass(frozen=True)
class Estimate:
    """A quadrature value with its error estimate."""

    value: float
    error: float

    def __float__(self) -> float:
        return float(self.value)

    def is_zero(self, factor: float = DEGENERACY_FACTOR) -> bool:
        return abs(self.value) < factor * self.error


def _as_estimate(x) -> Estimate:
    if isinstance(x, Estimate):
        return x
    return Estimate(float(x), 0.0)


def _line(f, decay, tol):
    res = integrate_line(f, decay, tol=tol)
    return Estimate(res.value, max(res.error_estimate, 1e-15))


def _check_ell(ell):
    if int(ell) != ell or ell < 0:
        raise ValueError(f"ell must be a nonnegative integer, got {ell}")
    return int(ell)


# ---------------------------------------------------------------- a2, b2

def coeff_a2_b2(s: float, ell: int, beta4: float, xi2_scale: float = 1.0, tol: float = 1e-12):
    """Saddle-node coefficients ``(a2, b2)`` for ``mu = beta3`` by quadrature.

    ``beta1`` is implicitly at its ``ell``-th resonance. Returns two
    :class:`Estimate` objects. For odd ``ell`` both integrands are odd and the
    values vanish to rounding.
    """
    ell = _check_ell(ell)
    r = math.sqrt(s)
    c = float(xi2_scale)

    def fa(t):
        return -c * xi2_bounded(t, s, ell) * _SQRT2 * sech(t)

    def fb(t):
        return -beta4 * (c * xi2_bounded(t, s, ell)) ** 3

    a2 = _line(fa, r + 1.0, tol)
    b2 = _line(fb, 3.0 * r, tol) if beta4 != 0 else Estimate(0.0, 0.0)
    return a2, b2


def _poly_mul(p, q):
    out = [0.0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def closed_form_a2_b2(s: float, ell: int, beta4: float):
    """Exact Gamma-function evaluation of ``(a2, b2)`` for ``ell`` in {0, 2, 4}.

    ``xi2`` is a finite sum ``sum_j c_j sech**(sqrt(s) + 2j)``; each power of
    ``sech`` integrates to ``2**(a-1) Gamma(a/2)**2 / Gamma(a)``.
    """
    if ell not in (0, 2, 4):
        raise ValueError(f"closed forms are provided for ell in {{0, 2, 4}}, got {ell}")
    if not s > 0:
        raise ValueError("s must be positive")
    r = math.sqrt(s)
    coeffs = list(xi2_series(s, ell).coeffs)
    a2 = -_SQRT2 * math.fsum(cj * sech_power_integral(r + 1.0 + 2 * j) for j, cj in enumerate(coeffs))
    cube = _poly_mul(_poly_mul(coeffs, coeffs), coeffs)
    b2 = -beta4 * math.fsum(cj * sech_power_integral(3.0 * r + 2 * j) for j, cj in enumerate(cube))
    return a2, b2


# Numerator polynomial of b2 for ell = 4, highest degree first, in sqrt(s).
_G_ELL4 = (
    5184, 176256, 2519568, 20488032, 106620652, 375344312, 915087795,
    1546383098, 1772860056, 1308687720, 556461984, 102326688, -73920,
)


def _horner(coeffs, x):
    acc = 0.0
    for c in coeffs:
        acc = acc * x + c
    return acc


def printed_closed_form_a2_b2(s: float, ell: int, beta4: float):
    """The simplified rational-Gamma expressions in their published form.

    Kept for reproducing the published sign thresholds. For ``ell = 0`` they
    coincide with :func:`closed_form_a2_b2`; for ``ell = 2, 4`` they were
    derived from a differently normalised series and do not equal the
    quadrature values (see the project notes).
    """
    if ell not in (0, 2, 4):
        raise ValueError(f"closed forms are provided for ell in {{0, 2, 4}}, got {ell}")
    if not s > 0:
        raise ValueError("s must be positive")
    r = math.sqrt(s)
    ga = gamma_fn(0.5 * r + 0.5) ** 2 / gamma_fn(r + 1.0)
    gb = gamma_fn(1.5 * r) ** 2 / gamma_fn(3.0 * r)
    if ell == 0:
        a2 = -(2.0 ** (r + 0.5)) * ga
        b2 = -(2.0 ** (3.0 * r - 1.0)) * gb * beta4
    elif ell == 2:
        a2 = 2.0 ** (r - 0.5) * (2.0 * s + 3.0 * r - 1.0) * ga / (r + 2.0)
        num = 72 * s**3 + 252 * s**2.5 + 262 * s**2 + 93 * s**1.5 + 72 * s + 32 * r - 40
        b2 = 2.0 ** (3.0 * r - 4.0) * num * gb / ((3 * r + 1) * (r + 1) * (3 * r + 5)) * beta4
    else:
        a2 = 2.0 ** (r - 1.5) * (4 * s**2 + 48 * s**1.5 + 199 * s + 320 * r + 153) * ga / ((r + 2) * (r + 4))
        den = (3 * r + 1) * (r + 1) * (3 * r + 5) * (3 * r + 7) * (r + 3) * (3 * r + 11)
        b2 = 2.0 ** (3.0 * r - 7.0) * _horner(_G_ELL4, r) * gb / den * beta4
    return a2, b2


def sign_threshold(ell: int, lo: float, hi: float, form: str = "printed", tol: float = 1e-12) -> float:
    """Bisect for the ``s`` where ``a2 b2 / beta4`` changes sign in ``[lo, hi]``."""
    fn = {"printed": printed_closed_form_a2_b2, "exact": closed_form_a2_b2}[form]

    def h(s):
        a, b = fn(s, ell, 1.0)
        return a * b

    hl, hh = h(lo), h(hi)
    if hl == 0:
        return lo
    if hh == 0:
        return hi
    if (hl > 0) == (hh > 0):
        raise ValueError(f"no sign change of a2*b2 on [{lo}, {hi}]")
    while hi - lo > tol * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        hm = h(mid)
        if (hm > 0) == (hl > 0):
            lo, hl = mid, hm
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------- xi^alpha

_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


@dataclass(frozen=True)
class ParticularSolution:
    """Bounded solution of the forced variational equation for ``mu = beta1``.

    ``xi(t) = -beta1 (phi1 A(t) + phi3 D(t))`` in the tangential block with
    ``A = int_0^t psi13 g`` and ``D = -int_|t|^inf psi33 g``,
    ``g = x1h xi2**2``. ``Xi`` holds the constant ``int_0^inf psi33 g`` that
    was removed from the phi3 coefficient to make the solution bounded.
    The normal components and the ``mu``-part vanish identically.
    """

    s: float
    ell: int
    beta1: float
    xi2_scale: float
    grid: np.ndarray
    cum_a: np.ndarray  # int_0^{grid[k]} psi13 g
    tail_d: np.ndarray  # int_{grid[k]}^inf psi33 g
    Xi: float
    xi_mu_zero: bool = True

    def _g(self, t):
        return _SQRT2 * sech(t) * (self.xi2_scale * xi2_bounded(t, self.s, self.ell)) ** 2

    def _cell_integral(self, which, a, b):
        # Gauss-Legendre on [a, b] elementwise.
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        tt = mid[..., None] + half[..., None] * _GL_X
        p11, _, p31, _ = _tangent_components(tt)
        psi = -p31 if which == "a" else p11
        return half * np.sum(_GL_W * psi * self._g(tt), axis=-1)

    def _coefficients(self, t):
        u = np.abs(np.asarray(t, dtype=float))
        if np.any(u > self.grid[-1]):
            raise ValueError(f"t outside the tabulated range |t| <= {self.grid[-1]}")
        k = np.clip(np.searchsorted(self.grid, u, side="right") - 1, 0, self.grid.size - 2)
        A = self.cum_a[k] + self._cell_integral("a", self.grid[k], u)
        D = self.tail_d[k + 1] + self._cell_integral("d", u, self.grid[k + 1])
        A = np.where(np.asarray(t) < 0, -A, A)
        return A, -D

    def __call__(self, t):
        """Full ``xi^alpha`` as an array of shape ``(4,) + shape(t)``."""
        t = np.asarray(t, dtype=float)
        A, D = self._coefficients(t)
        p11, p13, p31, p33 = _tangent_components(t)
        zero = np.zeros_like(p11)
        return -self.beta1 * np.array([p11 * A + p31 * D, zero, p13 * A + p33 * D, zero])

    def xi1(self, t):
        return self(t)[0]

    @staticmethod
    def xi_mu(t):
        t = np.asarray(t, dtype=float)
        return np.zeros((4,) + t.shape)


def xi_alpha(s: float, ell: int, xi2_scale: float = 1.0, t_max: float = 40.0, h: float = 0.05) -> ParticularSolution:
    ell = _check_ell(ell)
    beta1 = resonance_beta1(s, ell)
    n = int(math.ceil(t_max / h))
    grid = np.linspace(0.0, t_max, n + 1)
    proto = ParticularSolution(s, ell, beta1, float(xi2_scale), grid, np.zeros(1), np.zeros(1), 0.0)
    ca = proto._cell_integral("a", grid[:-1], grid[1:])
    cd = proto._cell_integral("d", grid[:-1], grid[1:])
    cum_a = np.concatenate([[0.0], np.cumsum(ca)])
    tail_d = np.concatenate([np.cumsum(cd[::-1])[::-1], [0.0]])
    return ParticularSolution(s, ell, beta1, float(xi2_scale), grid, cum_a, tail_d, float(tail_d[0]))


# ---------------------------------------------------------------- bar coefficients

def coeff_bar_a2_bar_b2(
    s: float,
    ell: int,
    beta1: float | None = None,
    beta2: float = 1.0,
    xi2_scale: float = 1.0,
    tol: float = 1e-11,
    particular: ParticularSolution | None = None,
):
    """Pitchfork coefficients ``(bar_a2, bar_b2)`` for ``mu = beta1``.

    ``beta1`` defaults to (and must equal) the ``ell``-th resonance value.
    Raises ``ArithmeticError`` if ``bar_a2`` is not negative.
    """
    ell = _check_ell(ell)
    res = resonance_beta1(s, ell)
    if beta1 is None:
        beta1 = res
    elif abs(beta1 - res) > 1e-9 * max(1.0, abs(res)):
        raise ValueError(f"beta1={beta1} is not the resonance value {res} for ell={ell}")
    r = math.sqrt(s)
    c = float(xi2_scale)
    xa = particular or xi_alpha(s, ell, xi2_scale=c)
    tmax = float(xa.grid[-1])

    def fa(t):
        return -((c * xi2_bounded(t, s, ell)) ** 2) * 2.0 * sech(t) ** 2

    def fb(t):
        t = np.asarray(t, dtype=float)
        x2 = (c * xi2_bounded(t, s, ell)) ** 2
        inside = np.abs(t) <= tmax
        xi1 = np.zeros_like(t)
        if np.any(inside):
            xi1[inside] = xa.xi1(t[inside])
        return -2.0 * beta1 * _SQRT2 * sech(t) * xi1 * x2 - beta2 * x2 * x2

    bar_a2 = _line(fa, 2.0 * r + 2.0, tol)
    bar_b2 = _line(fb, 2.0 * r + 1.0 if beta2 == 0 else min(4.0 * r, 2.0 * r + 1.0), tol)
    if not bar_a2.value < 0:
        raise ArithmeticError(f"bar_a2 = {bar_a2.value} is not negative; consistency failure")
    return bar_a2, bar_b2


# ---------------------------------------------------------------- classification

def _classify(a, b, sup, sub):
    a, b = _as_estimate(a), _as_estimate(b)
    if a.is_zero() or b.is_zero() or a.value == 0 or b.value == 0:
        return Classification.DEGENERATE
    return sup if a.value * b.value < 0 else sub


def classify_saddle_node(a2, b2) -> str:
    """``a2 b2 < 0`` supercritical, ``> 0`` subcritical. Inputs are floats or
    :class:`Estimate`; a value within ``10 x`` its error counts as zero."""
    return _classify(a2, b2, Classification.SN_SUPER, Classification.SN_SUB)


def classify_pitchfork(bar_a2, bar_b2) -> str:
    return _classify(bar_a2, bar_b2, Classification.PF_SUPER, Classification.PF_SUB)


# ---------------------------------------------------------------- general forms

def _pair(phi2, psi2):
    if psi2 is None:
        def psi2(t):
            return -np.tensordot(J4, np.asarray(phi2(t), dtype=float), axes=(1, 0))
    return psi2


def _check_decay(f, decay_rate, name):
    probe = np.array([-30.0, 30.0]) / max(decay_rate, 1e-3)
    vals = np.abs(np.asarray(f(probe), dtype=float))
    if not np.all(np.isfinite(vals)) or np.max(vals) > 1e-6:
        raise ValueError(f"{name} integrand does not decay (|f| = {np.max(vals):.3e} at the probe points)")


def general_melnikov_ab(
    phi2: Callable,
    psi2: Callable | None,
    p: SystemParams,
    mu_id,
    orbit: Callable | None = None,
    decay_rate: float = 1.0,
    tol: float = 1e-11,
):
    """``a = int <psi2, D_mu f>``, ``b = (1/2) int <psi2, D2f(phi2, phi2)>``
    along ``orbit`` (default ``x_h``). ``psi2`` defaults to ``-J4 phi2``.

    Callables must accept arrays of times and return shape ``(4, n)``.
    """
    psi2 = _pair(phi2, psi2)
    orbit = orbit or (lambda t: model.homoclinic(t, 1))

    def fa(t):
        x = orbit(t)
        return np.sum(psi2(t) * model.eval_dmu_f(x, p, mu_id), axis=0)

    def fb(t):
        x = orbit(t)
        ph = phi2(t)
        return 0.5 * np.sum(psi2(t) * model.eval_d2f(x, p, ph, ph), axis=0)

    _check_decay(fa, decay_rate, "a")
    _check_decay(fb, decay_rate, "b")
    return _line(fa, decay_rate, tol), _line(fb, decay_rate, tol)


def general_melnikov_bar_ab(
    phi2: Callable,
    psi2: Callable | None,
    xi_alpha_fn: Callable,
    p: SystemParams,
    mu_id,
    xi_mu_fn: Callable | None = None,
    orbit: Callable | None = None,
    decay_rate: float = 1.0,
    tol: float = 1e-11,
):
    """``bar_a = int <psi2, D_mu D_x f phi2 + D2f(xi_mu, phi2)>`` and
    ``bar_b = int <psi2, D3f(phi2, phi2, phi2)/6 + D2f(xi_alpha, phi2)>``."""
    psi2 = _pair(phi2, psi2)
    orbit = orbit or (lambda t: model.homoclinic(t, 1))

    def fa(t):
        x = orbit(t)
        ph = phi2(t)
        v = model.eval_dmu_dx_f(x, p, mu_id, ph)
        if xi_mu_fn is not None:
            v = v + model.eval_d2f(x, p, xi_mu_fn(t), ph)
        return np.sum(psi2(t) * v, axis=0)

    def fb(t):
        x = orbit(t)
        ph = phi2(t)
        v = model.eval_d3f(x, p, ph, ph, ph) / 6.0 + model.eval_d2f(x, p, xi_alpha_fn(t), ph)
        return np.sum(psi2(t) * v, axis=0)

    _check_decay(fa, decay_rate, "bar_a")
    _check_decay(fb, decay_rate, "bar_b")
    return _line(fa, decay_rate, tol), _line(fb, decay_rate, tol)


def normal_phi2(s: float, ell: int, scale: float = 1.0) -> Callable:
    """``phi2 = scale * (0, xi2, 0, xi2')`` as an array callback."""

    def phi2(t):
        t = np.asarray(t, dtype=float)
        z = np.zeros_like(t)
        return scale * np.array([z, xi2_bounded(t, s, ell), z, xi2_bounded_dot(t, s, ell)])

    return phi2


# ---------------------------------------------------------------- report

@dataclass(frozen=True)
class MelnikovReport:
    s: float
    ell: int
    beta1: float
    mode: str
    a2: Estimate | None = None
    b2: Estimate | None = None
    bar_a2: Estimate | None = None
    bar_b2: Estimate | None = None
    closed_form_a2: float | None = None
    closed_form_b2: float | None = None
    classification: str = Classification.NONE
    params: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        def est(e):
            return None if e is None else {"value": e.value, "error": e.error}

        return {
            "s": self.s,
            "ell": self.ell,
            "beta1": self.beta1,
            "mode": self.mode,
            "a2": est(self.a2),
            "b2": est(self.b2),
            "bar_a2": est(self.bar_a2),
            "bar_b2": est(self.bar_b2),
            "closed_form_a2": self.closed_form_a2,
            "closed_form_b2": self.closed_form_b2,
            "classification": self.classification,
            "params": dict(self.params),
        }


def melnikov_report(s: float, ell: int, beta2: float = 1.0, beta4: float = 1.0, mode: str = "sn") -> MelnikovReport:
    """Compute the coefficients for ``mode`` ``"sn"`` (``mu = beta3``) or
    ``"pf"`` (``mu = beta1``, requires ``beta4 = 0``) and classify."""
    ell = _check_ell(ell)
    beta1 = resonance_beta1(s, ell)
    params = {"beta2": beta2, "beta4": beta4}
    if mode == "sn":
        a2, b2 = coeff_a2_b2(s, ell, beta4)
        cfa = cfb = None
        if ell in (0, 2, 4):
            cfa, cfb = closed_form_a2_b2(s, ell, beta4)
        cls = classify_saddle_node(a2, b2)
        return MelnikovReport(s, ell, beta1, mode, a2=a2, b2=b2, closed_form_a2=cfa,
                              closed_form_b2=cfb, classification=cls, params=params)
    if mode == "pf":
        if beta4 != 0:
            raise ValueError("the pitchfork setting needs beta4 = 0")
        ba, bb = coeff_bar_a2_bar_b2(s, ell, beta2=beta2)
        cls = classify_pitchfork(ba, bb)
        return MelnikovReport(s, ell, beta1, mode, bar_a2=ba, bar_b2=bb, classification=cls, params=params)
    raise ValueError(f"unknown mode {mode!r}; expected 'sn' or 'pf'")
