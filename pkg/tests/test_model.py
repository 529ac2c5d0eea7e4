import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homoclinic_gl import model
from homoclinic_gl.model import J4, DomainError, NonHyperbolicError, ParamId, SystemParams
from homoclinic_gl.numerics import IntegratorConfig, integrate_ode

from conftest import random_params

R2 = math.sqrt(2.0)


def fd_jacobian(x, p, h=1e-6):
    J = np.empty((4, 4))
    for j in range(4):
        e = np.zeros(4)
        e[j] = h
        J[:, j] = (model.eval_f(x + e, p) - model.eval_f(x - e, p)) / (2 * h)
    return J


class TestParams:
    def test_rejects_nonpositive_s(self):
        with pytest.raises(DomainError):
            SystemParams(s=0.0)
        with pytest.raises(DomainError):
            SystemParams(s=-1.0)

    def test_rejects_non_finite(self):
        with pytest.raises(DomainError):
            SystemParams(beta1=math.nan)
        with pytest.raises(DomainError):
            SystemParams(nu1=math.inf)

    def test_flags(self):
        assert SystemParams(s=0.5).outside_standing_assumption
        assert not SystemParams(s=2.0).outside_standing_assumption
        assert SystemParams(s=1.0).eigenvalue_resonant
        assert not SystemParams(s=1.1).eigenvalue_resonant

    def test_warning_below_one(self):
        with pytest.warns(UserWarning):
            model.warn_if_outside_assumption(SystemParams(s=0.5))

    def test_param_ids(self):
        assert ParamId.parse("beta3") is ParamId.BETA3
        assert ParamId.parse(ParamId.NU1) is ParamId.NU1
        with pytest.raises(KeyError):
            ParamId.parse("gamma")
        p = SystemParams(beta2=0.7)
        assert p.get("beta2") == 0.7
        assert p.replace(beta2=1.5).beta2 == 1.5


class TestVectorField:
    def test_origin_is_equilibrium(self, rng):
        for _ in range(5):
            assert np.all(model.eval_f(np.zeros(4), random_params(rng)) == 0)

    def test_hand_value(self):
        out = model.eval_f(np.array([R2, 0, 0, 0]), SystemParams(s=2.0))
        np.testing.assert_allclose(out, [0, 0, -R2, 0], atol=1e-15)

    def test_homoclinic_is_solution(self):
        t = np.linspace(-20, 20, 401)
        p = SystemParams(s=2.0, beta1=1.3, beta2=0.4, beta4=0.0)
        for sign in (1, -1):
            x = model.homoclinic(t, sign)
            np.testing.assert_allclose(model.eval_f(x, p), model.homoclinic_velocity(t, sign), atol=1e-12)

    def test_homoclinic_values(self):
        np.testing.assert_allclose(model.homoclinic(0.0, 1), [R2, 0, 0, 0], atol=1e-15)
        assert np.max(np.abs(model.homoclinic(np.array([-20.0, 20.0]), 1))) < 1e-7

    def test_homoclinic_velocity_fd(self):
        t = np.linspace(-8, 8, 33)
        h = 1e-5
        fd = (model.homoclinic(t + h) - model.homoclinic(t - h)) / (2 * h)
        np.testing.assert_allclose(fd, model.homoclinic_velocity(t), atol=1e-8)

    def test_rejects_bad_state(self):
        with pytest.raises(DomainError):
            model.eval_f(np.array([1.0, np.nan, 0, 0]), SystemParams())
        with pytest.raises(DomainError):
            model.eval_f(np.zeros(3), SystemParams())


class TestDerivatives:
    def test_jacobian_fd(self, rng):
        for _ in range(100):
            p = random_params(rng)
            x = rng.normal(size=4)
            J = model.eval_jacobian(x, p)
            np.testing.assert_allclose(J, fd_jacobian(x, p), rtol=1e-6, atol=1e-6 * np.abs(J).max())

    def test_jacobian_trace(self, rng):
        for _ in range(10):
            p = random_params(rng)
            assert np.trace(model.eval_jacobian(rng.normal(size=4), p)) == pytest.approx(-2 * p.nu1)

    def test_jacobian_at_origin(self):
        J = model.eval_jacobian(np.zeros(4), SystemParams(s=2.0))
        w = np.sort(np.linalg.eigvals(J).real)
        np.testing.assert_allclose(w, [-R2, -1, 1, R2], atol=1e-12)
        assert J[2, 1] == 0 and J[3, 0] == 0

    def test_jacobian_entry_on_orbit(self):
        J = model.eval_jacobian(model.homoclinic(0.0), SystemParams(s=2.0))
        # 1 - 3 x1**2 with x1 = sqrt(2)
        assert J[2, 0] == pytest.approx(-5.0, abs=1e-12)

    def test_d2f_fd_and_symmetry(self, rng):
        h = 1e-4
        for _ in range(100):
            p = random_params(rng)
            x, u, v = rng.normal(size=(3, 4))
            d2 = model.eval_d2f(x, p, u, v)
            np.testing.assert_allclose(model.eval_d2f(x, p, v, u), d2, rtol=1e-14, atol=1e-14 * np.abs(d2).max())
            fd = (
                model.eval_f(x + h * u + h * v, p) - model.eval_f(x + h * u - h * v, p)
                - model.eval_f(x - h * u + h * v, p) + model.eval_f(x - h * u - h * v, p)
            ) / (4 * h * h)
            np.testing.assert_allclose(d2, fd, rtol=1e-5, atol=1e-5 * max(1.0, np.abs(d2).max()))
        assert np.all(model.eval_d2f(x, p, np.zeros(4), v) == 0)

    def test_d3f(self, rng):
        h = 1e-3
        for _ in range(100):
            p = random_params(rng)
            x, y, u, v, w = rng.normal(size=(5, 4))
            d3 = model.eval_d3f(x, p, u, v, w)
            assert np.array_equal(d3, model.eval_d3f(y, p, u, v, w))
            for perm in [(v, u, w), (w, v, u), (u, w, v)]:
                np.testing.assert_allclose(model.eval_d3f(x, p, *perm), d3, rtol=1e-14, atol=1e-14)
            fd = (model.eval_d2f(x + h * w, p, u, v) - model.eval_d2f(x - h * w, p, u, v)) / (2 * h)
            np.testing.assert_allclose(d3, fd, rtol=1e-6, atol=1e-8)
        assert np.all(model.eval_d3f(x, p, np.zeros(4), v, w) == 0)

    @pytest.mark.parametrize("which", list(ParamId))
    def test_dmu_f_fd(self, rng, which):
        h = 1e-6
        for _ in range(20):
            p = random_params(rng)
            x = rng.normal(size=4)
            v = p.get(which)
            fd = (model.eval_f(x, p.replace(**{which.value: v + h})) - model.eval_f(x, p.replace(**{which.value: v - h}))) / (2 * h)
            np.testing.assert_allclose(model.eval_dmu_f(x, p, which), fd, rtol=1e-6, atol=1e-8)

    def test_dmu_f_examples(self):
        x = np.array([0.3, -0.7, 0.2, 0.1])
        np.testing.assert_allclose(model.eval_dmu_f(x, SystemParams(), "beta3"), [0, 0, 0.7, -0.3])
        assert np.all(model.eval_dmu_f(np.array([1.2, 0.0, 0.5, 0.0]), SystemParams(), "beta1") == 0)
        with pytest.raises(KeyError):
            model.eval_dmu_f(x, SystemParams(), "s")

    @pytest.mark.parametrize("which", list(ParamId))
    def test_dmu_dx_f_fd(self, rng, which):
        h = 1e-6
        for _ in range(20):
            p = random_params(rng)
            x, u = rng.normal(size=(2, 4))
            v = p.get(which)
            Jp = model.eval_jacobian(x, p.replace(**{which.value: v + h}))
            Jm = model.eval_jacobian(x, p.replace(**{which.value: v - h}))
            np.testing.assert_allclose(model.eval_dmu_dx_f(x, p, which, u), (Jp - Jm) @ u / (2 * h), rtol=1e-6, atol=1e-8)

    def test_dmu_dx_f_examples(self):
        x = np.array([0.3, -0.7, 0.2, 0.1])
        np.testing.assert_allclose(model.eval_dmu_dx_f(x, SystemParams(), "beta3", np.eye(4)[1]), [0, 0, -1, 0])
        assert np.all(model.eval_dmu_dx_f(x, SystemParams(beta1=2), "beta1", np.zeros(4)) == 0)


class TestHamiltonian:
    def test_zero_on_orbit(self):
        t = np.linspace(-15, 15, 301)
        p = SystemParams(s=2.0, beta1=3.0, beta2=2.0, beta4=1.0)
        assert np.max(np.abs(model.hamiltonian(model.homoclinic(t), p))) < 1e-14
        assert model.hamiltonian(np.zeros(4), p) == 0

    def test_gradient_gives_field(self, rng):
        for _ in range(50):
            p = random_params(rng).replace(nu1=0.0)
            x = rng.normal(size=4)
            np.testing.assert_allclose(J4 @ model.grad_hamiltonian(x, p), model.eval_f(x, p), atol=1e-12)

    def test_conservation_along_trajectory(self):
        p = SystemParams(s=2.0, beta1=1.5, beta2=1.0, beta3=0.2, beta4=0.5)
        cfg = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12)
        x0 = np.array([0.05, 0.02, 0.0, 0.0])
        tr = integrate_ode(lambda t, x: model.eval_f(x, p), x0, 0.0, 8.0, cfg)
        H = model.hamiltonian(tr.ys.T, p)
        assert np.max(np.abs(H - H[0])) < 1e-8

    def test_volume_preservation(self):
        p = SystemParams(s=2.0, beta1=1.2, beta2=1.0)
        cfg = IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13)

        def rhs(t, Y):
            return model.eval_jacobian(model.homoclinic(t), p) @ Y

        # Short span keeps the fundamental matrix well conditioned.
        tr = integrate_ode(rhs, np.eye(4), -2.0, 2.0, cfg)
        assert abs(np.linalg.det(tr(2.0)) - 1.0) < 1e-8


class TestSpectrum:
    def test_uncoupled(self):
        sd = model.equilibrium_spectrum(SystemParams(s=2.0))
        np.testing.assert_allclose(sd.eigenvalues, [-R2, -1, 1, R2], atol=1e-12)
        assert sd.residual < 1e-10
        assert sd.stable_basis.shape == (4, 2) and sd.unstable_basis.shape == (4, 2)

    def test_double_eigenvalues(self):
        sd = model.equilibrium_spectrum(SystemParams(s=1.0))
        np.testing.assert_allclose(sd.eigenvalues, [-1, -1, 1, 1], atol=1e-12)
        assert np.linalg.matrix_rank(sd.stable_basis) == 2
        assert np.linalg.matrix_rank(sd.unstable_basis) == 2

    def test_coupled_vs_characteristic_polynomial(self):
        p = SystemParams(s=2.0, beta3=0.1)
        sd = model.equilibrium_spectrum(p)
        A = model.eval_jacobian(np.zeros(4), p)
        roots = np.sort(np.roots(np.poly(A)).real)
        # Independent oracle: lambda**2 are eigenvalues of [[1, -b3], [-b3, s]].
        m = np.sqrt(np.linalg.eigvalsh(np.array([[1.0, -0.1], [-0.1, 2.0]])))
        np.testing.assert_allclose(sd.eigenvalues, np.sort(np.concatenate([-m, m])), atol=1e-10)
        np.testing.assert_allclose(sd.eigenvalues, roots, atol=1e-8)

    def test_non_hyperbolic(self):
        with pytest.raises(NonHyperbolicError, match="eigenvalue"):
            model.equilibrium_spectrum(SystemParams(s=2.0, beta3=math.sqrt(2.0)))

    @settings(max_examples=40, deadline=None)
    @given(st.floats(1.05, 6.0), st.floats(-0.5, 0.5), st.floats(-0.3, 0.3))
    def test_bases_invariant(self, s, b3, nu1):
        p = SystemParams(s=s, beta3=b3, nu1=nu1)
        try:
            sd = model.equilibrium_spectrum(p)
        except NonHyperbolicError:
            return
        A = model.eval_jacobian(np.zeros(4), p)
        for B, sgn in ((sd.stable_basis, -1), (sd.unstable_basis, 1)):
            # A maps the span into itself.
            Q, _ = np.linalg.qr(B)
            AB = A @ Q
            assert np.max(np.abs(AB - Q @ (Q.T @ AB))) < 1e-9
            assert np.all(sgn * np.linalg.eigvals(Q.T @ A @ Q).real > 0)
