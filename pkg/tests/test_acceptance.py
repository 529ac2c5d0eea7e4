"""One test per acceptance criterion. Each prints a single PASS/FAIL line
(also collected in the terminal summary) and then asserts the outcome."""

import math
import time

import numpy as np
import pytest

from homoclinic_gl import model
from homoclinic_gl.continuation import run_preset
from homoclinic_gl.fuchsian import exponents_from_nu, find_resonant_ell, kimura_triangularizable, resonance_beta1
from homoclinic_gl.melnikov import (
    Classification,
    classify_pitchfork,
    classify_saddle_node,
    closed_form_a2_b2,
    coeff_a2_b2,
    coeff_bar_a2_bar_b2,
    sign_threshold,
    xi_alpha,
)
from homoclinic_gl.model import SystemParams
from homoclinic_gl.numerics import IntegratorConfig, integrate_ode
from homoclinic_gl.specfun import xi2_bounded
from homoclinic_gl.variational import count_bounded_solutions, solution_basis, ve_along_homoclinic

from conftest import ACCEPTANCE_LINES


def report(n: int, ok: bool, detail: str):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def test_criterion_1_resonance_values():
    with Timer() as tm:
        expected = {0: 1.7071068, 2: 7.5355339, 4: 17.36396103}
        errs = {ell: abs(resonance_beta1(2.0, ell) - v) for ell, v in expected.items()}
    ok = max(errs.values()) < 5e-7 and tm.elapsed < 1.0
    report(1, ok, f"max |beta1 - reference| = {max(errs.values()):.2e} (< 5e-7), {tm.elapsed:.3f} s")


def test_criterion_2_closed_form_vs_quadrature():
    worst = 0.0
    with Timer() as tm:
        for ell in (0, 2, 4):
            for s in (0.5, 1.0, 2.0, 4.0):
                a2, b2 = coeff_a2_b2(s, ell, 1.0)
                ca, cb = closed_form_a2_b2(s, ell, 1.0)
                worst = max(worst, abs(ca - a2.value) / abs(a2.value), abs(cb - b2.value) / abs(b2.value))
    ok = worst < 1e-7 and tm.elapsed < 10.0
    report(2, ok, f"max relative difference {worst:.2e} (< 1e-7), {tm.elapsed:.2f} s")


def test_criterion_3_sign_thresholds():
    with Timer() as tm:
        t2 = sign_threshold(2, 0.1, 0.2)
        t4 = sign_threshold(4, 1e-9, 1e-3)
    ok = 0.160 < t2 < 0.161 and t4 < 1e-6 and tm.elapsed < 5.0
    report(3, ok, f"ell=2 threshold {t2:.6f}, ell=4 threshold {t4:.6e}, {tm.elapsed:.3f} s")


def test_criterion_4_bounded_counts():
    bad = []
    with Timer() as tm:
        for s in (1.5, 2.0, 3.0):
            for ell in range(4):
                b1 = resonance_beta1(s, ell)
                for beta1, want in ((b1, 2), (b1 - 0.05, 1), (b1 + 0.05, 1)):
                    n0 = count_bounded_solutions(ve_along_homoclinic(SystemParams(s=s, beta1=beta1)), T=20.0).n0
                    if n0 != want:
                        bad.append((s, ell, beta1, n0))
    ok = not bad and tm.elapsed < 30.0
    report(4, ok, f"36 counts, {len(bad)} mismatches {bad[:3]}, {tm.elapsed:.1f} s")


def test_criterion_5_kimura_equivalence():
    rng = np.random.default_rng(5)
    mismatches = 0
    resonant = 0
    with Timer() as tm:
        for _ in range(200):
            s = float(rng.uniform(1.05, 6.0))
            if rng.random() < 0.5:
                b1 = resonance_beta1(s, int(rng.integers(0, 12)))
            else:
                b1 = float(rng.uniform(0.0, 60.0))
            hit = find_resonant_ell(s, b1) is not None
            resonant += hit
            mismatches += kimura_triangularizable(exponents_from_nu(s, 2.0 * b1)).triangularizable != hit
    ok = mismatches == 0 and tm.elapsed < 1.0
    report(5, ok, f"200 pairs ({resonant} resonant), {mismatches} mismatches, {tm.elapsed:.3f} s")


def test_criterion_6_parity():
    with Timer() as tm:
        vals = [abs(v.value) for ell in (1, 3) for v in coeff_a2_b2(2.0, ell, 1.0)]
    ok = max(vals) < 1e-10 and tm.elapsed < 5.0
    report(6, ok, f"max |a2|,|b2| for odd ell = {max(vals):.2e}, {tm.elapsed:.3f} s")


def _fold_side(result):
    folds = [sp for sp in result.branch.specials if sp.kind == "fold"]
    lams = result.branch.lams
    if len(folds) != 1:
        return folds, None, None
    f = folds[0]
    near = lams[max(0, f.index - 3): f.index + 5] - f.lam
    near = near[np.abs(near) > 1e-6]
    side = np.sign(near)
    return folds, (int(side[0]) if np.all(side == side[0]) else 0), f


def test_criterion_7_fold_diagram():
    with Timer() as tm:
        a2, b2 = coeff_a2_b2(2.0, 0, 2.0)
        verdict = classify_saddle_node(a2, b2)
        out = {}
        for sign in (-1, 1):
            res = run_preset("fig7a", orbit_sign=sign)
            out[sign] = _fold_side(res)
    checks = []
    for sign, (folds, side, f) in out.items():
        # Orbits near sign * x_h solve sign * a2 mu + b2 eps**2 = 0.
        predicted = -int(np.sign(sign * a2.value * b2.value))
        checks.append(len(folds) == 1 and abs(f.lam) < 1e-3 and side == predicted)
    literal = out[-1][1] == 1  # both legs on beta3 > 0
    ok = all(checks) and literal and verdict == Classification.SN_SUB and tm.elapsed < 240.0
    detail = ", ".join(
        f"orbit sign {s:+d}: fold at {v[2].lam:.1e}, legs on beta3{'>' if v[1] > 0 else '<'}0" if v[2] else f"orbit sign {s:+d}: {len(v[0])} folds"
        for s, v in out.items()
    )
    report(7, ok, f"{detail}; melnikov {verdict}; {tm.elapsed:.1f} s for both orbits")


def test_criterion_8_pitchfork_diagram():
    with Timer() as tm:
        res = run_preset("fig9")
    pfs = [sp for sp in res.branch.specials if sp.kind == "pitchfork"]
    lams = np.array([sp.lam for sp in pfs])
    dist = [float(np.min(np.abs(lams - resonance_beta1(2.0, ell)))) if lams.size else math.inf for ell in (0, 1, 2)]
    crit = {}
    for sp, sw in res.switches:
        ell = int(np.argmin([abs(sp.lam - resonance_beta1(2.0, k)) for k in range(10)]))
        crit[ell] = None if isinstance(sw, str) else sw.criticality
    want = {}
    for ell in (0, 1, 2, 3):
        ba, bb = coeff_bar_a2_bar_b2(2.0, ell, beta2=1.0)
        want[ell] = "supercritical" if classify_pitchfork(ba, bb) == Classification.PF_SUPER else "subcritical"
    expected = {0: "supercritical", 1: "supercritical", 2: "supercritical", 3: "subcritical"}
    ok = max(dist) < 1e-2 and all(crit.get(ell) == want[ell] == expected[ell] for ell in expected) and tm.elapsed < 300.0
    report(8, ok, f"pitchfork distances {[f'{d:.1e}' for d in dist]}, switched {crit}, melnikov {want}, {tm.elapsed:.1f} s")


def test_criterion_9_properties():
    msgs = []
    with Timer() as tm:
        p = SystemParams(s=2.0, beta1=1.5, beta2=1.0, beta3=0.2, beta4=0.5)
        tr = integrate_ode(lambda t, x: model.eval_f(x, p), np.array([0.05, 0.02, 0.0, 0.0]), 0.0, 8.0,
                           IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12))
        H = model.hamiltonian(tr.ys.T, p)
        drift = float(np.max(np.abs(H - H[0])))
        msgs.append(drift < 1e-8)

        bio = max(solution_basis(2.0, ell).biorthogonality_defect(np.linspace(-12, 12, 25)) for ell in range(4))
        msgs.append(bio < 1e-8)

        h = 1e-3
        t = np.linspace(-10, 10, 401)
        ode = 0.0
        for ell in range(5):
            b1 = resonance_beta1(2.0, ell)

            def f(u, ell=ell):
                return xi2_bounded(u, 2.0, ell)

            d2 = (-f(t - 2 * h) + 16 * f(t - h) - 30 * f(t) + 16 * f(t + h) - f(t + 2 * h)) / (12 * h * h)
            ode = max(ode, float(np.max(np.abs(d2 - (2.0 - 2 * b1 / np.cosh(t) ** 2) * f(t)))))
        msgs.append(ode < 1e-8)

        tt = np.linspace(0, 20, 81)
        parts = {ell: xi_alpha(2.0, ell) for ell in range(5)}
        even = max(float(np.max(np.abs(xa.xi1(tt) - xa.xi1(-tt)))) for xa in parts.values())
        msgs.append(even < 1e-8)

        bar = []
        for s in (1.5, 2.0, 3.0):
            for ell in range(5):
                ba, _ = coeff_bar_a2_bar_b2(s, ell, particular=parts[ell] if s == 2.0 else None)
                bar.append(ba.value)
        msgs.append(max(bar) < 0)

        inv = True
        for ell in (0, 2, 4):
            base = classify_saddle_node(*coeff_a2_b2(2.0, ell, 1.0))
            for c in (-2.0, 0.5):
                inv &= classify_saddle_node(*coeff_a2_b2(2.0, ell, 1.0, xi2_scale=c)) == base
        for ell in (0, 3):
            base = classify_pitchfork(*coeff_bar_a2_bar_b2(2.0, ell, particular=parts[ell]))
            for c in (-2.0, 0.5):
                inv &= classify_pitchfork(*coeff_bar_a2_bar_b2(2.0, ell, xi2_scale=c)) == base
        msgs.append(bool(inv))
    ok = all(msgs) and tm.elapsed < 60.0
    report(
        9, ok,
        f"H drift {drift:.1e}, biorthogonality {bio:.1e}, xi2 residual {ode:.1e}, "
        f"xi1 evenness {even:.1e}, max bar_a2 {max(bar):.3f}, scale invariance {inv}, {tm.elapsed:.1f} s",
    )
