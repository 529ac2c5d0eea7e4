"""Newton correction, pseudo-arclength continuation, special-point detection
and branch switching for the truncated homoclinic problem."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .. import model
from ..model import ParamId, SystemParams
from ..numerics import SingularJacobianError, newton_solve
from .bvp import BvpMesh, BvpProblem, graded_grid

__all__ = [
    "ContinuationError",
    "ContinuationConfig",
    "BranchPoint",
    "SpecialPoint",
    "Branch",
    "SwitchResult",
    "point_measures",
    "initial_mesh",
    "solve_homoclinic",
    "continue_branch",
    "continue_both_ways",
    "detect_special_points",
    "switch_branch",
]


class ContinuationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ContinuationConfig:
    ds: float = 0.05
    ds_min: float = 1e-5
    ds_max: float = 0.25
    max_points: int = 200
    lam_min: float = -math.inf
    lam_max: float = math.inf
    newton_tol: float = 1e-10
    max_newton: int = 10
    grow: float = 1.3
    min_cos: float = 0.9
    max_amplitude: float = 20.0


@dataclass
class BranchPoint:
    params: SystemParams
    mesh: BvpMesh
    residual: float
    control: str | None = None
    tangent: np.ndarray | None = None
    iterations: int = 0
    measures: dict = field(default_factory=dict)
    pf_sign: float | None = None
    pf_logdet: float | None = None

    @property
    def lam(self) -> float | None:
        return None if self.control is None else self.params.get(self.control)

    @property
    def nu1(self) -> float:
        return self.params.nu1

    @property
    def fold_test(self) -> float | None:
        """Control-parameter component of the unit tangent."""
        return None if self.tangent is None else float(self.tangent[-1])


@dataclass
class SpecialPoint:
    kind: str  # "fold" | "pitchfork"
    index: int  # branch point just before the crossing
    lam: float
    point: BranchPoint | None = None
    data: dict = field(default_factory=dict)


@dataclass
class Branch:
    control: str
    points: list
    specials: list = field(default_factory=list)
    stop_reason: str = ""

    @property
    def lams(self) -> np.ndarray:
        return np.array([pt.lam for pt in self.points])


def point_measures(mesh: BvpMesh, p: SystemParams) -> dict:
    t, x = mesh.dense(16)
    i0 = int(np.argmin(np.abs(mesh.nodes)))
    w = mesh.weights()
    H = model.hamiltonian(mesh.X.T, p)
    return {
        "x2_0": float(mesh.X[i0, 1]),
        "x2_max": float(np.max(x[1])),
        "x2_min": float(np.min(x[1])),
        "x1_max": float(np.max(x[0])),
        "norm": float(math.sqrt(np.sum(w[:, None] * mesh.X**2))),
        "hamiltonian_max": float(np.max(np.abs(H))),
    }


def initial_mesh(grid=None, sign: int = 1, T: float = 15.0, N: int = 80) -> BvpMesh:
    """``x_h`` with the given sign sampled on ``grid`` (graded by default)."""
    grid = graded_grid(T, N) if grid is None else np.asarray(grid, dtype=float)
    return BvpMesh.from_function(grid, lambda t: model.homoclinic(t, sign))


def _symmetric_branch(mesh: BvpMesh, p: SystemParams, tol: float = 1e-9) -> bool:
    return p.beta3 == 0 and p.beta4 == 0 and float(np.max(np.abs(mesh.X[:, [1, 3]]))) < tol


# ---------------------------------------------------------------- solver core

class _Continuer:
    """Holds a :class:`BvpProblem` with the control parameter free and the
    weighted inner product used for arclength."""

    def __init__(self, point: BranchPoint, control):
        self.control = ParamId.parse(control)
        self.grid = point.mesh.grid
        self.prob = BvpProblem(self.grid, point.params, point.mesh.X, self.control)
        self.nx = self.prob.nx
        w = point.mesh.weights()
        self.wvec = np.concatenate([np.repeat(w, 4), [1.0, 1.0]])

    def z_of(self, pt: BranchPoint) -> np.ndarray:
        return np.concatenate([pt.mesh.X.ravel(), [pt.params.nu1, pt.params.get(self.control)]])

    def anchor(self, pt: BranchPoint):
        self.prob.set_reference(pt.mesh.X)
        self.prob.refresh_boundary(pt.params)

    def F(self, z):
        return self.prob.residual(z[: self.nx], z[-2], z[-1])

    def J(self, z):
        X, nu, lam = z[: self.nx], z[-2], z[-1]
        Jx = self.prob.jacobian_x(X, nu, lam)
        return np.hstack([
            Jx,
            self.prob.param_column(X, nu, lam, "nu1")[:, None],
            self.prob.param_column(X, nu, lam, "lam")[:, None],
        ])

    def dot(self, u, v) -> float:
        return float(np.sum(self.wvec * u * v))

    def normalize(self, v):
        return v / math.sqrt(self.dot(v, v))

    def tangent(self, z, orient=None, J=None):
        J = self.J(z) if J is None else J
        if orient is None:
            tau = np.linalg.svd(J)[2][-1]
        else:
            A = np.vstack([J, (self.wvec * orient)[None, :]])
            rhs = np.zeros(A.shape[0])
            rhs[-1] = 1.0
            tau = np.linalg.solve(A, rhs)
        tau = self.normalize(tau)
        if orient is not None and self.dot(tau, orient) < 0:
            tau = -tau
        return tau

    def correct(self, z_pred, z_anchor, tau, ds, tol, max_iter):
        def G(z):
            return np.append(self.F(z), self.dot(z - z_anchor, tau) - ds)

        def DG(z):
            return np.vstack([self.J(z), (self.wvec * tau)[None, :]])

        return newton_solve(G, DG, z_pred, tol=tol, max_iter=max_iter, linear_solve=np.linalg.solve)

    def make_point(self, z, residual, tangent=None, iterations=0) -> BranchPoint:
        p = self.prob.params(z[-2], z[-1])
        mesh = BvpMesh(self.grid, z[: self.nx].reshape(-1, 4).copy())
        pt = BranchPoint(p, mesh, residual, self.control.value, tangent, iterations, point_measures(mesh, p))
        _annotate_pf(pt, self.prob)
        return pt


def _annotate_pf(pt: BranchPoint, prob: BvpProblem):
    if not _symmetric_branch(pt.mesh, pt.params):
        return
    Jx = prob.jacobian_x(pt.mesh.X.ravel(), pt.params.nu1, pt.lam)
    B = prob.antisymmetric_block(Jx)
    sgn, logdet = np.linalg.slogdet(B)
    pt.pf_sign, pt.pf_logdet = float(sgn), float(logdet)


# ---------------------------------------------------------------- single solve

def solve_homoclinic(
    initial: BvpMesh,
    p: SystemParams,
    free: Sequence[str] = ("nu1",),
    tol: float = 1e-10,
    max_iter: int = 30,
    reference: BvpMesh | None = None,
) -> BranchPoint:
    """Newton-correct ``initial`` to a solution of the truncated problem.

    With ``free = ("nu1",)`` the damping is an unknown (square system); with
    ``free = ()`` it stays at ``p.nu1`` and the overdetermined system is solved
    in the least-squares sense. Raises :class:`ContinuationError` if Newton
    does not converge and ``NonHyperbolicError`` for a non-hyperbolic origin.
    """
    model.equilibrium_spectrum(p)
    free = tuple(free)
    if any(f != "nu1" for f in free):
        raise ValueError(f"only nu1 may be freed here, got {free}")
    ref = reference or initial
    prob = BvpProblem(initial.grid, p, ref.X)
    nx = prob.nx
    if free:
        def R(z):
            return prob.residual(z[:nx], z[-1])

        def DR(z):
            return np.hstack([prob.jacobian_x(z[:nx], z[-1]), prob.param_column(z[:nx], z[-1], None, "nu1")[:, None]])

        z0 = np.append(initial.X.ravel(), p.nu1)
        solve = np.linalg.solve
    else:
        def R(z):
            return prob.residual(z, p.nu1)

        def DR(z):
            return prob.jacobian_x(z, p.nu1)

        z0 = initial.X.ravel().copy()

        def solve(A, b):
            return np.linalg.lstsq(A, b, rcond=None)[0]

    try:
        res = newton_solve(R, DR, z0, tol=tol, max_iter=max_iter, linear_solve=solve)
    except SingularJacobianError as exc:
        raise ContinuationError(f"Newton failed: {exc}") from exc
    if not res.converged:
        raise ContinuationError(f"Newton did not converge (residual {res.residual_norm:.3e})")
    z = res.x
    nu1 = float(z[-1]) if free else p.nu1
    X = (z[:nx] if free else z).reshape(-1, 4)
    q = p.replace(nu1=nu1)
    mesh = BvpMesh(initial.grid, X.copy())
    pt = BranchPoint(q, mesh, res.residual_norm, None, None, res.iterations, point_measures(mesh, q))
    _annotate_pf(pt, prob)
    return pt


# ---------------------------------------------------------------- continuation

def continue_branch(
    start: BranchPoint,
    control,
    config: ContinuationConfig | None = None,
    direction: int = 1,
    tangent: np.ndarray | None = None,
) -> Branch:
    """Pseudo-arclength continuation from a converged point.

    The initial tangent is the supplied ``tangent`` or the null vector of the
    extended Jacobian, oriented so that the control parameter moves in
    ``direction``. Steps are halved on Newton failure or sharp turns and grown
    after fast convergence. Stops at the parameter bounds, at the point budget,
    or when the step underflows.
    """
    cfg = config or ContinuationConfig()
    control = ParamId.parse(control)
    cont = _Continuer(start, control)
    start = replace(start, control=control.value)
    z = cont.z_of(start)
    cont.anchor(start)
    if tangent is None:
        tau = cont.tangent(z)
        if tau[-1] * direction < 0:
            tau = -tau
    else:
        tau = cont.normalize(np.asarray(tangent, dtype=float))
        if direction < 0:
            tau = -tau
    start.tangent = tau
    if start.pf_sign is None:
        _annotate_pf(start, cont.prob)
    points = [start]
    ds = cfg.ds
    reason = "point budget"
    while len(points) < cfg.max_points:
        pred = z + ds * tau
        ok = False
        try:
            res = cont.correct(pred, z, tau, ds, cfg.newton_tol, cfg.max_newton)
            ok = res.converged
        except (SingularJacobianError, model.NonHyperbolicError, np.linalg.LinAlgError, FloatingPointError):
            ok = False
        if ok:
            zn = res.x
            lam = zn[-1]
            if not (cfg.lam_min <= lam <= cfg.lam_max):
                reason = "parameter bound"
                break
            if np.max(np.abs(zn[: cont.nx])) > cfg.max_amplitude:
                reason = "amplitude bound"
                break
            trial = cont.make_point(zn, res.residual_norm, None, res.iterations)
            cont.anchor(trial)
            try:
                tn = cont.tangent(zn, orient=tau)
            except np.linalg.LinAlgError:
                tn = None
            if tn is None or cont.dot(tn, tau) < cfg.min_cos:
                cont.anchor(points[-1])
                ok = False
            else:
                trial.tangent = tn
                points.append(trial)
                z, tau = zn, tn
                if res.iterations <= 3:
                    ds = min(ds * cfg.grow, cfg.ds_max)
                continue
        ds *= 0.5
        if ds < cfg.ds_min:
            reason = "step underflow"
            if len(points) == 1:
                raise ContinuationError("step size underflow before any progress")
            break
    return Branch(control.value, points, [], reason)


def continue_both_ways(start: BranchPoint, control, config: ContinuationConfig | None = None) -> Branch:
    """Continue from ``start`` along both orientations of its null tangent and
    merge the two legs into one consistently oriented branch."""
    control = ParamId.parse(control)
    cont = _Continuer(start, control)
    cont.anchor(start)
    tau = cont.tangent(cont.z_of(start))
    fwd = continue_branch(start, control, config, direction=1, tangent=tau)
    bwd = continue_branch(start, control, config, direction=-1, tangent=tau)
    back = []
    for pt in reversed(bwd.points[1:]):
        back.append(replace(pt, tangent=-pt.tangent))
    pts = back + fwd.points
    return Branch(control.value, pts, [], f"{bwd.stop_reason}/{fwd.stop_reason}")


# ---------------------------------------------------------------- special points

def _refine_fold(cont: _Continuer, a: BranchPoint, b: BranchPoint, tol=1e-10, max_iter=30):
    za, ta = cont.z_of(a), a.tangent
    zb = cont.z_of(b)
    s0, g0 = 0.0, a.fold_test
    s1, g1 = cont.dot(zb - za, ta), b.fold_test
    cont.anchor(a)
    best = None
    side = 0
    for _ in range(max_iter):
        s = s1 - g1 * (s1 - s0) / (g1 - g0)
        res = cont.correct(za + s * ta, za, ta, s, 1e-11, 15)
        if not res.converged:
            break
        tn = cont.tangent(res.x, orient=ta)
        g = float(tn[-1])
        best = (res.x, tn, res.residual_norm)
        if abs(g) < tol:
            break
        # Illinois variant of regula falsi.
        if g * g1 < 0:
            s0, g0 = s1, g1
            side = 0
        else:
            g0 = 0.5 * g0 if side == 1 else g0
            side = 1
        s1, g1 = s, g
    if best is None:
        return None
    pt = cont.make_point(best[0], best[2], best[1])
    return pt


def _solve_symmetric(prob: BvpProblem, X0, nu0, lam, tol=1e-11):
    """Newton on the ``(x1, x3)`` components with ``x2 = x4 = 0`` held fixed."""
    n = prob.n_nodes
    sym_cols = (np.arange(n)[:, None] * 4 + np.array([0, 2])).ravel()
    coll_rows = np.arange(16 * prob.N).reshape(prob.N * 4, 4)[:, [0, 2]].ravel()
    r0 = 16 * prob.N
    bc = [r0 + j for j, w in enumerate(prob.W_left) if abs(w[1]) + abs(w[3]) < 1e-12]
    bc += [r0 + prob.W_left.shape[0] + j for j, w in enumerate(prob.W_right) if abs(w[1]) + abs(w[3]) < 1e-12]
    rows = np.concatenate([coll_rows, bc, [prob.n_eq - 1]]).astype(int)
    base = np.asarray(X0, dtype=float).reshape(n, 4).copy()
    base[:, [1, 3]] = 0.0

    def unpack(y):
        X = base.copy().ravel()
        X[sym_cols] = y[:-1]
        return X, y[-1]

    def R(y):
        X, nu = unpack(y)
        return prob.residual(X, nu, lam)[rows]

    def DR(y):
        X, nu = unpack(y)
        Jx = prob.jacobian_x(X, nu, lam)
        col = prob.param_column(X, nu, lam, "nu1")
        return np.hstack([Jx[np.ix_(rows, sym_cols)], col[rows][:, None]])

    y0 = np.append(base.ravel()[sym_cols], nu0)
    res = newton_solve(R, DR, y0, tol=tol, max_iter=20, linear_solve=np.linalg.solve)
    X, nu = unpack(res.x)
    return X, nu, res.converged


def _refine_pitchfork(cont: _Continuer, a: BranchPoint, b: BranchPoint, tol=1e-11, max_iter=60):
    prob = cont.prob
    cont.anchor(a)
    la, lb = a.lam, b.lam

    def block(lam):
        w = (lam - la) / (lb - la)
        Xg = (1 - w) * a.mesh.X.ravel() + w * b.mesh.X.ravel()
        X, nu, ok = _solve_symmetric(prob, Xg, (1 - w) * a.nu1 + w * b.nu1, lam)
        Jx = prob.jacobian_x(X, nu, lam)
        return prob.antisymmetric_block(Jx), X, nu

    Bm, _, _ = block(0.5 * (la + lb))
    U, _, Vt = np.linalg.svd(Bm)
    bvec, cvec = U[:, -1], Vt[-1]

    def g(lam):
        B, X, nu = block(lam)
        n = B.shape[0]
        A = np.zeros((n + 1, n + 1))
        A[:n, :n] = B
        A[:n, n] = bvec
        A[n, :n] = cvec
        rhs = np.zeros(n + 1)
        rhs[n] = 1.0
        sol = np.linalg.solve(A, rhs)
        return sol[n], sol[:n], X, nu

    x0, x1 = la, lb
    g0 = g(x0)[0]
    g1 = g(x1)[0]
    if g0 * g1 > 0:
        return None
    side = 0
    lam = x1
    for _ in range(max_iter):
        lam = x1 - g1 * (x1 - x0) / (g1 - g0)
        gv = g(lam)[0]
        if abs(gv) < 1e-14 or abs(x1 - x0) < tol:
            break
        if gv * g1 < 0:
            x0, g0 = x1, g1
            side = 0
        else:
            if side == 1:
                g0 *= 0.5
            side = 1
        x1, g1 = lam, gv
    _, v, X, nu = g(lam)
    z = np.concatenate([X, [nu, lam]])
    pt = cont.make_point(z, float(np.max(np.abs(cont.F(z)))), None)
    nv = v / np.linalg.norm(v)
    return pt, nv


def detect_special_points(branch: Branch, refine: bool = True) -> Branch:
    """Annotate folds (sign change of the control component of the tangent)
    and pitchforks on the symmetric branch (sign change of the determinant of
    the ``(x2, x4)`` block of the Jacobian)."""
    pts = branch.points
    specials = []
    if len(pts) < 3:
        branch.specials = specials
        return branch
    cont = _Continuer(pts[0], branch.control)
    g = np.array([pt.fold_test if pt.fold_test is not None else np.nan for pt in pts])
    i = 0
    while i < len(pts) - 1:
        ga, gb = g[i], g[i + 1]
        if np.isfinite(ga) and np.isfinite(gb) and ga * gb < 0:
            ref = _refine_fold(cont, pts[i], pts[i + 1]) if refine else None
            lam = ref.lam if ref is not None else float(pts[i].lam - ga * (pts[i + 1].lam - pts[i].lam) / (gb - ga))
            specials.append(SpecialPoint("fold", i, lam, ref, {"tangent_component": (float(ga), float(gb))}))
        i += 1
    for i in range(len(pts) - 1):
        a, b = pts[i], pts[i + 1]
        if a.pf_sign is None or b.pf_sign is None or a.pf_sign == 0 or b.pf_sign == 0:
            continue
        if a.pf_sign != b.pf_sign:
            out = _refine_pitchfork(cont, a, b) if refine else None
            if out is None:
                specials.append(SpecialPoint("pitchfork", i, 0.5 * (a.lam + b.lam), None, {}))
            else:
                pt, nv = out
                specials.append(SpecialPoint("pitchfork", i, pt.lam, pt, {"null_vector": nv}))
    branch.specials = sorted(specials, key=lambda sp: sp.index)
    return branch


# ---------------------------------------------------------------- branch switching

@dataclass
class SwitchResult:
    point: BranchPoint
    conjugate: BranchPoint
    conjugate_residual: float
    lam_star: float
    amplitudes: tuple
    lam_shifts: tuple
    quadratic_coefficient: float
    criticality: str  # "supercritical" | "subcritical" | "degenerate"
    direction: np.ndarray


def _embed_antisymmetric(nv, n_nodes):
    V = np.zeros((n_nodes, 4))
    V[:, [1, 3]] = nv.reshape(n_nodes, 2)
    return V.ravel()


def switch_branch(
    branch: Branch,
    special: SpecialPoint,
    amplitudes: tuple = (0.05, 0.1),
    tol: float = 1e-10,
) -> SwitchResult:
    """Leave the symmetric branch at a pitchfork along the antisymmetric null
    direction.

    For each amplitude ``eps`` the full problem is solved with the extra
    constraint ``<X - X*, V> = eps``. The control shift fitted as
    ``c2 eps**2 + c4 eps**4`` gives the direction of bifurcation:
    ``c2 > 0`` (orbits beyond the critical value) is reported as supercritical.
    The S-conjugate of the first point is checked against the residual.
    """
    if special.kind != "pitchfork" or special.point is None or "null_vector" not in special.data:
        raise ValueError("need a refined pitchfork annotation")
    star = special.point
    cont = _Continuer(star, branch.control)
    cont.anchor(star)
    n_nodes = cont.prob.n_nodes
    V = _embed_antisymmetric(special.data["null_vector"], n_nodes)
    Vfull = np.concatenate([V, [0.0, 0.0]])
    Vfull = cont.normalize(Vfull)
    zstar = cont.z_of(star)
    sols = []
    for eps in amplitudes:
        def G(z, eps=eps):
            return np.append(cont.F(z), cont.dot(z - zstar, Vfull) - eps)

        def DG(z):
            return np.vstack([cont.J(z), (cont.wvec * Vfull)[None, :]])

        res = newton_solve(G, DG, zstar + eps * Vfull, tol=tol, max_iter=40, linear_solve=np.linalg.solve)
        if not res.converged:
            raise ContinuationError(f"no convergence off the symmetric branch at amplitude {eps}")
        sols.append(res)
    shifts = tuple(float(r.x[-1] - star.lam) for r in sols)
    e1, e2 = amplitudes[0], amplitudes[1]
    # d = c2 e^2 + c4 e^4 fitted through both amplitudes.
    M = np.array([[e1**2, e1**4], [e2**2, e2**4]])
    c2, _ = np.linalg.solve(M, np.array(shifts))
    scale = max(abs(s) for s in shifts)
    if abs(c2) * e1**2 < 1e-9 or scale < 1e-12:
        crit = "degenerate"
    else:
        crit = "supercritical" if c2 > 0 else "subcritical"
    z1 = sols[0].x
    pt = cont.make_point(z1, sols[0].residual_norm)
    Xc = (z1[: cont.nx].reshape(-1, 4) @ model.S_MATRIX).ravel()
    zc = np.concatenate([Xc, z1[-2:]])
    rc = float(np.max(np.abs(cont.F(zc))))
    conj = cont.make_point(zc, rc)
    return SwitchResult(pt, conj, rc, star.lam, tuple(amplitudes), shifts, float(c2), crit, Vfull)
