"""Exponent arithmetic for the Fuchsian form of the 2D variational blocks.

Each block ``eta'' = (nu1 - nu2 sech(t)**2) eta`` becomes, in ``z = sech(t)**2``,
a second-order equation with regular singular points ``0, 1, inf`` whose
local exponents are ``+-sqrt(nu1)/2``, ``{0, 1/2}`` and
``(1 +- sqrt(4 nu2 + 1)) / 4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "ExponentScheme",
    "KimuraVerdict",
    "exponents_from_nu",
    "exponents_from_differences",
    "kimura_triangularizable",
    "resonance_beta1",
    "find_resonant_ell",
    "resonance_curve",
    "ELL_SEARCH_RANGE",
]

ELL_SEARCH_RANGE = 64


@dataclass(frozen=True)
class ExponentScheme:
    singular_points: tuple = (0.0, 1.0, math.inf)
    s0: tuple[float, float] = (0.0, 0.0)  # (minus, plus)
    s1: tuple[float, float] = (0.0, 0.5)
    sinf: tuple[float, float] = (0.0, 0.0)  # (minus, plus)

    @property
    def rho(self) -> tuple[float, float, float]:
        return (
            self.s0[1] - self.s0[0],
            self.s1[1] - self.s1[0],
            self.sinf[1] - self.sinf[0],
        )

    @property
    def exponent_sum(self) -> float:
        return sum(self.s0) + sum(self.s1) + sum(self.sinf)


@dataclass(frozen=True)
class KimuraVerdict:
    triangularizable: bool
    witness: str | None
    value: float | None
    combinations: dict


def exponents_from_nu(nu1: float, nu2: float) -> ExponentScheme:
    if not nu1 > 0:
        raise ValueError(f"nu1 must be positive (saddle case), got {nu1}")
    if 4.0 * nu2 + 1.0 < 0:
        raise ValueError(f"need 4*nu2 + 1 >= 0, got nu2={nu2}")
    h = 0.5 * math.sqrt(nu1)
    q = math.sqrt(4.0 * nu2 + 1.0)
    return ExponentScheme(s0=(-h, h), s1=(0.0, 0.5), sinf=((1.0 - q) / 4.0, (1.0 + q) / 4.0))


def exponents_from_differences(rho1: float, rho2: float, rho3: float) -> ExponentScheme:
    """A scheme with the given exponent differences (exponents centred so the
    Fuchs relation holds)."""
    base = 1.0 / 6.0
    return ExponentScheme(
        s0=(base - rho1 / 2, base + rho1 / 2),
        s1=(base - rho2 / 2, base + rho2 / 2),
        sinf=(base - rho3 / 2, base + rho3 / 2),
    )


def _odd_distance(x: float) -> float:
    return abs(x - (2.0 * math.floor((x - 1.0) / 2.0 + 0.5) + 1.0))


def kimura_triangularizable(scheme: ExponentScheme, tol: float = 1e-9) -> KimuraVerdict:
    """Triangularizability test: some signed sum of exponent differences is an
    odd integer."""
    if not (0 < tol <= 1e-3):
        raise ValueError("tol must lie in (0, 1e-3]")
    r1, r2, r3 = scheme.rho
    combos = {
        "rho1+rho2+rho3": r1 + r2 + r3,
        "-rho1+rho2+rho3": -r1 + r2 + r3,
        "rho1-rho2+rho3": r1 - r2 + r3,
        "rho1+rho2-rho3": r1 + r2 - r3,
    }
    for name, val in combos.items():
        if _odd_distance(val) <= tol:
            return KimuraVerdict(True, name, val, combos)
    return KimuraVerdict(False, None, None, combos)


def resonance_beta1(s: float, ell: int) -> float:
    """``beta1`` at which the normal block has a second bounded solution."""
    if not s > 0:
        raise ValueError("s must be positive")
    return ((2.0 * math.sqrt(s) + 2.0 * ell + 1.0) ** 2 - 1.0) / 8.0


def find_resonant_ell(s: float, beta1: float, tol: float = 1e-9) -> int | None:
    """Integer ``ell`` (|ell| <= 64) with ``resonance_beta1(s, ell)`` within
    ``tol`` of ``beta1``; nonnegative matches are preferred."""
    if not s > 0:
        raise ValueError("s must be positive")
    best = None
    for ell in sorted(range(-ELL_SEARCH_RANGE, ELL_SEARCH_RANGE + 1), key=lambda k: (k < 0, abs(k))):
        if abs(resonance_beta1(s, ell) - beta1) < tol:
            best = ell
            break
    return best


def resonance_curve(s_range: tuple[float, float], ell_list: Sequence[int], n_points: int):
    """Rows ``(s, ell, beta1)`` sampling the resonance curves on a uniform
    ``s`` grid, grouped by ``ell``."""
    s_min, s_max = map(float, s_range)
    if not (0 < s_min <= s_max):
        raise ValueError(f"invalid s range {s_range}")
    if not ell_list:
        raise ValueError("ell list is empty")
    if n_points < 1:
        raise ValueError("need at least one point")
    grid = np.linspace(s_min, s_max, n_points) if n_points > 1 else np.array([s_min])
    return [(float(s), int(ell), resonance_beta1(float(s), int(ell))) for ell in ell_list for s in grid]
