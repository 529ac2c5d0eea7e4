"""Damped Newton iteration with a convergence report."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .linalg import MAX_DIM, solve_small

__all__ = ["NewtonResult", "SingularJacobianError", "newton_solve"]


class SingularJacobianError(np.linalg.LinAlgError):
    def __init__(self, msg, x=None):
        super().__init__(msg)
        self.x = x


@dataclass
class NewtonResult:
    x: np.ndarray
    converged: bool
    iterations: int
    residual_norm: float
    message: str = ""
    history: list[float] = field(default_factory=list)
    step_history: list[float] = field(default_factory=list)


def _default_solve(J, r):
    if J.shape[0] <= MAX_DIM:
        return solve_small(J, r)
    return np.linalg.solve(J, r)


def newton_solve(
    residual: Callable[[np.ndarray], np.ndarray],
    jacobian: Callable[[np.ndarray], np.ndarray],
    x0,
    tol: float = 1e-10,
    max_iter: int = 30,
    cond_max: float = 1e14,
    damping: bool = True,
    linear_solve: Callable | None = None,
    check_jacobian: bool = False,
) -> NewtonResult:
    """Solve ``residual(x) = 0`` from ``x0``.

    Stops when ``max|residual| < tol``. With ``damping`` the full step is
    halved until the residual norm decreases (down to a factor 2**-10).
    A Jacobian whose 1-norm condition estimate exceeds ``cond_max`` raises
    :class:`SingularJacobianError`; hitting ``max_iter`` returns a report with
    ``converged=False`` and the last iterate.
    """
    solve = linear_solve or _default_solve
    x = np.array(x0, dtype=float)
    r = np.asarray(residual(x), dtype=float)
    rn = float(np.max(np.abs(r))) if r.size else 0.0
    hist = [rn]
    steps = []
    if check_jacobian:
        _check_fd(residual, jacobian, x)
    for it in range(max_iter + 1):
        if rn < tol:
            return NewtonResult(x, True, it, rn, "converged", hist, steps)
        if it == max_iter:
            break
        J = np.atleast_2d(np.asarray(jacobian(x), dtype=float))
        if J.shape[0] <= 64:
            c = np.linalg.cond(J, 1) if np.all(np.isfinite(J)) else np.inf
            if not c < cond_max:
                raise SingularJacobianError(f"Jacobian condition estimate {c:.3e}", x)
        try:
            dx = np.asarray(solve(J, -r), dtype=float).reshape(x.shape)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobianError(str(exc), x) from exc
        if not np.all(np.isfinite(dx)):
            raise SingularJacobianError("non-finite Newton step", x)
        lam = 1.0
        while True:
            xn = x + lam * dx
            rnew = np.asarray(residual(xn), dtype=float)
            rnn = float(np.max(np.abs(rnew)))
            if not damping or rnn < rn or lam < 2.0**-10:
                break
            lam *= 0.5
        steps.append(float(np.max(np.abs(lam * dx))))
        x, r, rn = xn, rnew, rnn
        hist.append(rn)
    return NewtonResult(x, False, max_iter, rn, "iteration cap reached", hist, steps)


def _check_fd(residual, jacobian, x, h=1e-7, rtol=1e-4):
    J = np.atleast_2d(jacobian(x))
    Jfd = np.empty_like(J)
    for j in range(x.size):
        e = np.zeros_like(x)
        e.flat[j] = h
        Jfd[:, j] = (np.asarray(residual(x + e)) - np.asarray(residual(x - e))).ravel() / (2 * h)
    scale = max(1.0, float(np.max(np.abs(J))))
    if np.max(np.abs(J - Jfd)) > rtol * scale:
        raise ValueError("Jacobian disagrees with finite differences")
