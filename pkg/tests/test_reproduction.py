import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import eigvals

from dengue_seir.model import ModelParams, ParameterError, transmission_rate
from dengue_seir.reproduction import (BracketError, LinearizedSystem, basic_r0, basic_r0_for,
                                      monodromy_spectral_radius, r0_heatmap, seasonal_r0)

RATES = dict(delta=0.25, gamma=0.125, mu=3.8e-5)


class TestBasicR0:
    def test_reference_rows(self):
        assert basic_r0(0.132, **RATES) == pytest.approx(1.059, abs=0.01)
        assert basic_r0(0.463, **RATES) == pytest.approx(3.704, abs=0.02)

    def test_threshold_case(self):
        assert basic_r0(0.125, 0.25, 0.125, 0.0) == pytest.approx(1.0, abs=1e-15)

    def test_matches_next_generation_matrix(self):
        # spectral radius of F V^-1 by a general eigensolver
        b, d, g, m = 0.3, 0.2, 0.1, 0.01
        F = np.array([[0, b], [0, 0]])
        V = np.array([[d + m, 0], [-d, g + m]])
        rho = max(abs(eigvals(F @ np.linalg.inv(V))))
        assert basic_r0(b, d, g, m) == pytest.approx(rho, rel=1e-12)

    @pytest.mark.parametrize("kw", [dict(delta=0), dict(gamma=-1), dict(mu=-1)])
    def test_domain_errors(self, kw):
        args = {**RATES, **kw}
        with pytest.raises(ParameterError):
            basic_r0(0.1, **args)


class TestMonodromy:
    def test_no_transmission_decay(self):
        p = ModelParams(beta_np=0, A_beta=0, beta_p=0)
        rho = monodromy_spectral_radius(LinearizedSystem(p), 2.0)
        expected = max(math.exp(-(p.delta + p.mu) * p.omega), math.exp(-(p.gamma + p.mu) * p.omega))
        assert rho == pytest.approx(expected, rel=1e-6)

    def test_against_solve_ivp(self):
        p = ModelParams()
        lam = 1.3
        sys = LinearizedSystem(p)

        def rhs(t, x):
            X = x.reshape(2, 2)
            return ((sys.F(t) / lam - sys.V) @ X).ravel()

        sol = solve_ivp(rhs, (0, p.omega), np.eye(2).ravel(), rtol=1e-11, atol=1e-13,
                        method="DOP853")
        ref = max(abs(eigvals(sol.y[:, -1].reshape(2, 2))))
        assert monodromy_spectral_radius(sys, lam) == pytest.approx(ref, rel=1e-7)

    def test_constant_beta_threshold(self):
        p = ModelParams(A_beta=0, beta_p=0, beta_np=0.2)
        r0 = basic_r0_for(p)
        assert monodromy_spectral_radius(p, r0) == pytest.approx(1.0, abs=1e-4)

    def test_monotone_in_lambda(self):
        lams = np.linspace(0.1, 10, 60)
        rho = [monodromy_spectral_radius(ModelParams(), lam) for lam in lams]
        assert np.all(np.diff(rho) < 0)

    def test_tiny_lambda_does_not_overflow_log(self):
        from dengue_seir.reproduction import log_monodromy_radius
        assert math.isfinite(log_monodromy_radius(ModelParams(beta_p=0.581), 1e-3))

    def test_rejects_nonpositive_lambda(self):
        with pytest.raises(ParameterError):
            monodromy_spectral_radius(ModelParams(), 0.0)


class TestSeasonalR0:
    def test_reference_row_1(self):
        res = seasonal_r0(ModelParams(sigma=60, beta_np=0.057, beta_p=0.085))
        assert res.r0 == pytest.approx(1.045, abs=0.02)
        assert abs(res.rho - 1) < 1e-6

    def test_reference_row_3(self):
        assert seasonal_r0(ModelParams(sigma=120, beta_np=0.057,
                                       beta_p=0.085)).r0 == pytest.approx(1.202, abs=0.02)

    @pytest.mark.parametrize("bnp", [0.05, 0.125, 0.4])
    def test_autonomous_equivalence(self, bnp):
        p = ModelParams(A_beta=0, beta_p=0, beta_np=bnp)
        assert abs(seasonal_r0(p).r0 - basic_r0_for(p)) < 1e-4

    def test_step_halving(self):
        p = ModelParams(sigma=60, beta_np=0.057, beta_p=0.085)
        assert abs(seasonal_r0(p, h=0.05).r0 - seasonal_r0(p, h=0.025).r0) < 1e-6

    @pytest.mark.parametrize("bnp,bp", [(0.02, 0.01), (0.057, 0.085), (0.1, 0.4)])
    def test_threshold_coherence(self, bnp, bp):
        p = ModelParams(beta_np=bnp, beta_p=bp)
        r = seasonal_r0(p).r0
        rho1 = monodromy_spectral_radius(p, 1.0)
        assert np.sign(r - 1) == np.sign(rho1 - 1)

    def test_zero_transmission(self):
        assert seasonal_r0(ModelParams(beta_np=0, A_beta=0, beta_p=0)).r0 == 0.0

    def test_bracket_failure_reports_radii(self):
        with pytest.raises(BracketError) as info:
            seasonal_r0(ModelParams(beta_np=0.5), hi=1.5)
        assert info.value.rho_hi > 1

    def test_history_brackets_shrink(self):
        res = seasonal_r0(ModelParams())
        widths = [hi - lo for lo, hi, _, _ in res.history]
        assert all(b < a for a, b in zip(widths, widths[1:]))


class TestHeatmap:
    def test_shape_and_reference_cell(self):
        z = r0_heatmap(ModelParams(sigma=60), ("beta_np", [0.03, 0.057]),
                       ("beta_p", [0.085, 0.2, 0.4]))
        assert z.shape == (2, 3)
        assert z[1, 0] == pytest.approx(1.045, abs=0.02)

    def test_monotone_along_beta_np(self):
        z = r0_heatmap(ModelParams(), ("beta_np", np.linspace(0.01, 0.15, 5)),
                       ("sigma", [40, 80]))
        assert np.all(np.diff(z, axis=0) >= 0)

    def test_no_transmission_cells(self):
        z = r0_heatmap(ModelParams(beta_np=0, beta_p=0, A_beta=0), ("beta_np", [0.0]),
                       ("beta_p", [0.0]))
        assert np.all(z < 1)

    def test_parallel_matches_serial(self):
        a1, a2 = ("beta_np", [0.03, 0.06]), ("t_p", [100.0, 200.0])
        assert np.array_equal(r0_heatmap(ModelParams(), a1, a2),
                              r0_heatmap(ModelParams(), a1, a2, workers=2))

    def test_identical_axes_rejected(self):
        with pytest.raises(ValueError):
            r0_heatmap(ModelParams(), ("sigma", [50]), ("sigma", [60]))


def test_linearized_system_matrices():
    sys = LinearizedSystem(ModelParams())
    assert sys.F(100.0)[0, 1] == transmission_rate(sys.params, 100.0)
    assert np.linalg.det(sys.V) > 0
