"""Gamma function, terminating hypergeometric series, sech-power integrals and
the bounded solutions of the normal variational equation.

The normal variational equation along the homoclinic orbit is

    xi'' = (s - 2*beta1*sech(t)**2) * xi,

and with ``z = sech(t)**2`` its bounded solutions at the resonant values of
``beta1`` are ``z**(sqrt(s)/2)`` times a terminating Gauss series, with an
extra factor ``tanh(t)`` when ``ell`` is odd. The third Gauss parameter of that
series is ``1 + sqrt(s)`` (the exponent difference at ``z = 0`` plus one).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import sech

__all__ = [
    "HypergeoParams",
    "gamma_fn",
    "log_gamma",
    "pochhammer",
    "hypergeometric_finite",
    "sech_power_integral",
    "Xi2Series",
    "xi2_series",
    "xi2_bounded",
    "xi2_bounded_dot",
    "MAX_SERIES_DEGREE",
]

MAX_SERIES_DEGREE = 50

# Lanczos approximation, g = 7, nine coefficients.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _lanczos_sum(x: float) -> float:
    acc = _LANCZOS[0]
    for i, c in enumerate(_LANCZOS[1:], start=1):
        acc += c / (x + i)
    return acc


def gamma_fn(x: float) -> float:
    """Gamma function for real ``x`` (reflection formula below 1/2)."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise ValueError(f"Gamma has a pole at {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma_fn(1.0 - x))
    y = x - 1.0
    t = y + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (y + 0.5) * math.exp(-t) * _lanczos_sum(y)


def log_gamma(x: float) -> float:
    """``log|Gamma(x)|`` for ``x > 0`` from the same Lanczos sum."""
    x = float(x)
    if x <= 0:
        raise ValueError("log_gamma is only provided for x > 0")
    if x < 0.5:
        return math.log(math.pi / abs(math.sin(math.pi * x))) - log_gamma(1.0 - x)
    y = x - 1.0
    t = y + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (y + 0.5) * math.log(t) - t + math.log(_lanczos_sum(y))


def pochhammer(a: float, n: int) -> float:
    out = 1.0
    for j in range(n):
        out *= a + j
    return out


@dataclass(frozen=True)
class HypergeoParams:
    a: float
    b: float
    c: float

    @property
    def degree(self) -> int:
        if not (self.a <= 0 and self.a == math.floor(self.a)):
            raise ValueError(f"a must be a nonpositive integer for a finite series, got {self.a}")
        n = int(-self.a)
        if n > MAX_SERIES_DEGREE:
            raise ValueError(f"|a| = {n} exceeds the series cap {MAX_SERIES_DEGREE}")
        for j in range(n):
            if self.c + j == 0:
                raise ValueError(f"c = {self.c} makes the Pochhammer denominator vanish")
        return n

    def coefficients(self) -> list[float]:
        """Coefficients of ``z**j`` in the terminating series."""
        n = self.degree
        out = [1.0]
        for j in range(1, n + 1):
            out.append(out[-1] * (self.a + j - 1) * (self.b + j - 1) / (j * (self.c + j - 1)))
        return out


def hypergeometric_finite(hp: HypergeoParams, z):
    """Evaluate the terminating Gauss series ``F(a, b, c; z)`` (Horner)."""
    coeffs = hp.coefficients()
    z = np.asarray(z, dtype=float)
    acc = np.zeros_like(z) + coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * z + c
    return acc if acc.ndim else float(acc)


def sech_power_integral(a: float) -> float:
    """Integral of ``sech(t)**a`` over the real line, ``2**(a-1) Gamma(a/2)**2 / Gamma(a)``."""
    if not a > 0:
        raise ValueError("sech_power_integral needs a > 0")
    return math.exp((a - 1.0) * math.log(2.0) + 2.0 * log_gamma(0.5 * a) - log_gamma(a))


@dataclass(frozen=True)
class Xi2Series:
    """``xi2(t) = tanh(t)**odd * sum_j coeffs[j] * sech(t)**(sqrt(s) + 2 j)``."""

    s: float
    ell: int
    odd: bool
    coeffs: tuple[float, ...]

    @property
    def powers(self) -> tuple[float, ...]:
        r = math.sqrt(self.s)
        return tuple(r + 2.0 * j for j in range(len(self.coeffs)))

    @property
    def beta1(self) -> float:
        r = math.sqrt(self.s)
        return ((2.0 * r + 2.0 * self.ell + 1.0) ** 2 - 1.0) / 8.0


def xi2_series(s: float, ell: int) -> Xi2Series:
    if not s > 0:
        raise ValueError("s must be positive")
    if ell < 0 or int(ell) != ell:
        raise ValueError("ell must be a nonnegative integer")
    ell = int(ell)
    r = math.sqrt(s)
    if ell % 2:
        k = (ell + 1) // 2
        hp = HypergeoParams(-k + 1.0, r + k + 0.5, 1.0 + r)
    else:
        k = ell // 2 + 1
        hp = HypergeoParams(-k + 1.0, r + k - 0.5, 1.0 + r)
    return Xi2Series(s, ell, bool(ell % 2), tuple(hp.coefficients()))


def xi2_bounded(t, s: float, ell: int):
    """Bounded solution of the normal variational equation at
    ``beta1 = ((2 sqrt(s) + 2 ell + 1)**2 - 1) / 8``.

    Normalised by its leading series coefficient (``xi2 ~ 1 * sech**sqrt(s)``
    near ``t = 0`` for even ``ell``); parity is ``(-1)**ell`` with the square
    root of ``1 - z`` taken as ``tanh(t)``.
    """
    ser = xi2_series(s, ell)
    t = np.asarray(t, dtype=float)
    sc = sech(t)
    z = sc * sc
    acc = np.zeros_like(z) + ser.coeffs[-1]
    for c in reversed(ser.coeffs[:-1]):
        acc = acc * z + c
    out = sc ** math.sqrt(s) * acc
    if ser.odd:
        out = out * np.tanh(t)
    return out if out.ndim else float(out)


def xi2_bounded_dot(t, s: float, ell: int):
    """Analytic time derivative of :func:`xi2_bounded`."""
    ser = xi2_series(s, ell)
    t = np.asarray(t, dtype=float)
    sc, th = sech(t), np.tanh(t)
    base = np.zeros_like(sc)
    dbase = np.zeros_like(sc)  # sum c_j p_j sech**p_j
    for c, pw in zip(ser.coeffs, ser.powers):
        term = c * sc**pw
        base = base + term
        dbase = dbase + pw * term
    if ser.odd:
        out = sc * sc * base - th * th * dbase
    else:
        out = -th * dbase
    return out if out.ndim else float(out)
