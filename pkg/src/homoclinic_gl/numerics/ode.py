"""Adaptive Dormand-Prince 5(4) integration with continuous output."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "IntegratorConfig",
    "DenseTrajectory",
    "StepSizeUnderflow",
    "integrate_ode",
]

# Butcher tableau of the Dormand-Prince pair.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# Quartic continuous extension (Shampine), rows = stages, columns = theta**1..4.
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)


class StepSizeUnderflow(RuntimeError):
    """Raised when the adaptive step collapses below machine resolution."""

    def __init__(self, t: float, h: float):
        super().__init__(f"step size underflow at t={t!r} (h={h:.3e})")
        self.t = t
        self.h = h


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = np.inf
    method: str = "dopri54"
    max_steps: int = 200_000

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not (0.0 < v <= 1e-2):
                raise ValueError(f"{name} must lie in (0, 1e-2], got {v}")
        if self.max_step <= 0:
            raise ValueError("max_step must be positive")
        if self.method != "dopri54":
            raise ValueError(f"unknown method tag {self.method!r}")


class DenseTrajectory:
    """Immutable piecewise-quartic interpolant of an accepted step sequence.

    Calling the trajectory with a scalar time returns an array shaped like the
    initial state; an array of times stacks the results along a leading axis.
    """

    def __init__(self, ts, ys, ks, shape):
        self._ts = np.asarray(ts)
        self._ys = np.asarray(ys)
        self._ks = np.asarray(ks)  # (nsteps, 7, dim)
        self._shape = tuple(shape)
        self._forward = self._ts[-1] >= self._ts[0]
        for arr in (self._ts, self._ys, self._ks):
            arr.setflags(write=False)

    @property
    def t0(self) -> float:
        return float(self._ts[0])

    @property
    def t1(self) -> float:
        return float(self._ts[-1])

    @property
    def ts(self) -> np.ndarray:
        return self._ts

    @property
    def ys(self) -> np.ndarray:
        return self._ys.reshape((-1,) + self._shape)

    @property
    def nsteps(self) -> int:
        return len(self._ts) - 1

    def _eval_scalar(self, t: float) -> np.ndarray:
        lo, hi = sorted((self.t0, self.t1))
        span = hi - lo
        if t < lo - 1e-12 * max(1.0, span) or t > hi + 1e-12 * max(1.0, span):
            raise ValueError(f"t={t} outside trajectory span [{lo}, {hi}]")
        if self.nsteps == 0:
            return self._ys[0].reshape(self._shape).copy()
        if self._forward:
            i = int(np.searchsorted(self._ts, t, side="right")) - 1
        else:
            i = int(np.searchsorted(-self._ts, -t, side="right")) - 1
        i = min(max(i, 0), self.nsteps - 1)
        h = self._ts[i + 1] - self._ts[i]
        theta = (t - self._ts[i]) / h
        powers = theta ** np.arange(1, 5)
        y = self._ys[i] + h * (self._ks[i].T @ (_P @ powers))
        return y.reshape(self._shape)

    def __call__(self, t):
        if np.ndim(t) == 0:
            return self._eval_scalar(float(t))
        return np.stack([self._eval_scalar(float(ti)) for ti in np.asarray(t).ravel()])


def _rms(x):
    return float(np.sqrt(np.mean(x * x)))


def integrate_ode(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0,
    t0: float,
    t1: float,
    cfg: IntegratorConfig | None = None,
    first_step: float | None = None,
) -> DenseTrajectory:
    """Integrate ``y' = rhs(t, y)`` from ``t0`` to ``t1`` (either direction).

    ``y0`` may have any shape; ``rhs`` receives and returns arrays of that
    shape. Local error per step is controlled in the weighted RMS norm with
    weights ``abs_tol + rel_tol * |y|``.
    """
    cfg = cfg or IntegratorConfig()
    y0 = np.asarray(y0, dtype=float)
    shape = y0.shape
    y = y0.ravel().copy()
    if not np.all(np.isfinite(y)):
        raise ValueError("initial state must be finite")

    def f(t, yy):
        return np.asarray(rhs(t, yy.reshape(shape)), dtype=float).ravel()

    t = float(t0)
    t1 = float(t1)
    direction = 1.0 if t1 >= t else -1.0
    ts, ys, ks = [t], [y.copy()], []
    if t1 == t:
        return DenseTrajectory(ts, ys, np.zeros((0, 7, y.size)), shape)

    k0 = f(t, y)
    scale = cfg.abs_tol + cfg.rel_tol * np.abs(y)
    if first_step is None:
        d0, d1 = _rms(y / scale), _rms(k0 / scale)
        h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        h = min(h, abs(t1 - t), cfg.max_step)
    else:
        h = min(abs(first_step), abs(t1 - t), cfg.max_step)

    steps = 0
    k = np.empty((7, y.size))
    while direction * (t1 - t) > 0:
        if steps >= cfg.max_steps:
            raise RuntimeError(f"step budget {cfg.max_steps} exhausted at t={t}")
        h = min(h, abs(t1 - t), cfg.max_step)
        if h < 16 * np.spacing(max(abs(t), 1.0)):
            raise StepSizeUnderflow(t, h)
        hs = direction * h
        k[0] = k0
        for i in range(1, 7):
            yi = y + hs * (np.asarray(_A[i]) @ k[:i])
            k[i] = f(t + _C[i] * hs, yi)
        y_new = y + hs * (_B @ k)
        err = hs * (_E @ k)
        sc = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        en = _rms(err / sc)
        if not np.isfinite(en):
            h *= 0.2
            continue
        if en <= 1.0:
            t_new = t1 if abs(t1 - (t + hs)) < 1e-14 * max(1.0, abs(t1)) else t + hs
            ts.append(t_new)
            ys.append(y_new.copy())
            ks.append(k.copy())
            t, y, k0 = t_new, y_new, k[6].copy()
            fac = 5.0 if en == 0 else min(5.0, 0.9 * en ** -0.2)
            h *= fac
            steps += 1
        else:
            h *= max(0.2, 0.9 * en ** -0.2)
    return DenseTrajectory(ts, ys, np.array(ks), shape)
