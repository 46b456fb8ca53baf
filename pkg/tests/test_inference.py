import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from dengue_seir.inference import (PARAM_NAMES, AdaptationWarning, CaseSeries, Exponential,
                                   MCMCConfig, Normal, Uniform, default_priors, gaussian_loglik,
                                   log_likelihood, log_prior, metropolis, parse_prior, predict,
                                   run_mh)
from dengue_seir.model import ModelParams, ParameterError, initial_state

THETA = [0.0567, 0.047, 190.72, 61.817, 0.085, 25.0]


class TestPriors:
    def test_logpdf_against_scipy(self):
        assert Uniform(0, 2).logpdf(0.5) == pytest.approx(stats.uniform(0, 2).logpdf(0.5))
        assert Normal(220, 30).logpdf(190) == pytest.approx(stats.norm(220, 30).logpdf(190))
        assert Exponential(2).logpdf(0.3) == pytest.approx(stats.expon(scale=0.5).logpdf(0.3))

    def test_support(self):
        assert Uniform(0, 1).logpdf(1.0) == -math.inf
        assert Exponential(1).logpdf(-0.1) == -math.inf

    @given(z=st.floats(-30, 30))
    def test_round_trip_uniform(self, z):
        u = Uniform(0.2, 3.0)
        x = u.from_free(z)
        assert 0.2 <= x <= 3.0
        if abs(z) < 15:  # logit loses digits as x nears a bound
            assert u.to_free(x) == pytest.approx(z, abs=1e-6)

    @given(z=st.floats(-20, 5))
    def test_round_trip_exponential(self, z):
        e = Exponential(1.0)
        assert e.to_free(e.from_free(z)) == pytest.approx(z, abs=1e-12)

    @pytest.mark.parametrize("prior", [Uniform(0.1, 0.9), Exponential(1.5), Normal(1.0, 2.0)])
    def test_log_jacobian_finite_difference(self, prior):
        for z in (-1.3, 0.0, 0.7):
            eps = 1e-6
            dxdz = (prior.from_free(z + eps) - prior.from_free(z - eps)) / (2 * eps)
            assert prior.log_jacobian(z) == pytest.approx(math.log(dxdz), abs=1e-6)

    @pytest.mark.parametrize("text,expected", [
        ("U(0, 1)", Uniform(0, 1)), ("N(220,30)", Normal(220, 30)),
        ("Exponential(1)", Exponential(1)), ("uniform(0.1,0.2)", Uniform(0.1, 0.2)),
    ])
    def test_parse(self, text, expected):
        assert parse_prior(text) == expected

    @pytest.mark.parametrize("bad", ["U(1)", "Gamma(1,2)", "N(0,1", "N(0,-1)"])
    def test_parse_errors(self, bad):
        with pytest.raises(ValueError):
            parse_prior(bad)

    def test_str_round_trip(self):
        for prior in default_priors().values():
            assert parse_prior(str(prior)) == prior

    def test_log_prior(self):
        ref = (0 + 0 + stats.norm(220, 30).logpdf(190.72) + stats.norm(60, 10).logpdf(61.817)
               + 0 + stats.expon().logpdf(25.0))
        assert log_prior(THETA) == pytest.approx(ref)
        with pytest.raises(ValueError):
            log_prior(THETA[:5])


class TestLikelihood:
    def test_gaussian_against_scipy(self, rng):
        obs, pred = rng.normal(size=50), rng.normal(size=50)
        assert gaussian_loglik(obs, pred, 1.7) == pytest.approx(
            stats.norm(pred, 1.7).logpdf(obs).sum())

    def test_simplified_differs_by_constant(self, rng):
        obs = rng.normal(size=40)
        s = 1 / math.sqrt(2)
        diffs = []
        for _ in range(3):
            pred = rng.normal(size=40)
            diffs.append(gaussian_loglik(obs, pred, s) - gaussian_loglik(obs, pred, s, True))
        assert np.ptp(diffs) < 1e-9

    def test_invalid_sigma(self):
        assert gaussian_loglik([1.0], [1.0], 0.0) == -math.inf

    def test_invalid_parameters_give_minus_inf(self):
        data = CaseSeries(np.arange(10), np.ones(10))
        bad = list(THETA)
        bad[2] = 400.0  # t_p outside one period
        assert log_likelihood(bad, data, ModelParams()) == -math.inf

    def test_predict_at_data_days(self):
        p = ModelParams()
        data = CaseSeries(np.array([0, 3, 10]), np.array([50.0, 60.0, 80.0]))
        y = predict(THETA, data, p, init=initial_state(p, 50.0))
        assert y.shape == (3,) and y[0] == pytest.approx(50.0)

    def test_case_series_validation(self):
        with pytest.raises(ValueError):
            CaseSeries([0, 1], [1.0, -1.0])
        with pytest.raises(ValueError):
            CaseSeries([0, 0], [1.0, 1.0])


class TestMetropolis:
    @staticmethod
    def normal_target(z):
        v = -0.5 * float(z @ z)
        return v, z.copy(), v

    def test_standard_normal(self):
        draws, lp, acc, _ = metropolis(self.normal_target, np.zeros(1), 22_000, 2_000,
                                       np.random.default_rng(4))
        assert abs(draws.mean()) < 0.1
        assert abs(draws.var() - 1) < 0.15
        assert 0.1 < acc < 0.5

    def test_correlated_target_adapts(self):
        cov = np.array([[1.0, 0.95], [0.95, 1.0]])
        prec = np.linalg.inv(cov)

        def target(z):
            v = -0.5 * float(z @ prec @ z)
            return v, z.copy(), v

        draws, _, acc, _ = metropolis(target, np.zeros(2), 30_000, 5_000,
                                      np.random.default_rng(1))
        assert np.allclose(np.cov(draws.T), cov, atol=0.15)
        assert 0.15 < acc < 0.4

    def test_deterministic(self):
        a = metropolis(self.normal_target, np.zeros(2), 500, 100, np.random.default_rng(3))
        b = metropolis(self.normal_target, np.zeros(2), 500, 100, np.random.default_rng(3))
        assert np.array_equal(a[0], b[0])

    def test_zero_density_start(self):
        with pytest.raises(ParameterError):
            metropolis(lambda z: (-math.inf, z, -math.inf), np.zeros(1), 10, 5,
                       np.random.default_rng(0))

    def test_stalled_windows_warn_once(self):
        def spike(z):
            v = 0.0 if abs(z[0]) < 1e-12 else -math.inf
            return v, z.copy(), v

        with warnings.catch_warnings(record=True) as w:
            warnings.simplefilter("always")
            metropolis(spike, np.zeros(1), 400, 200, np.random.default_rng(0))
        assert sum(issubclass(x.category, AdaptationWarning) for x in w) == 1


class TestRunMH:
    def test_prior_sampling(self):
        cfg = MCMCConfig(chains=2, iters=12_000, warmup=2_000, seed=5)
        pc = run_mh(None, config=cfg)
        assert pc.draws.shape == (2, 10_000, 6)
        tp = pc.param("t_p").ravel()
        assert abs(tp.mean() - 220) < 6 and abs(tp.std() - 30) < 6
        bnp = pc.param("beta_np").ravel()
        assert 0 < bnp.min() and bnp.max() < 1

    def test_config_validation(self):
        with pytest.raises(ValueError):
            run_mh(None, config=MCMCConfig(iters=10, warmup=10))

    def test_fit_is_deterministic_and_workers_invariant(self):
        p = ModelParams()
        init = initial_state(p, 50.0)
        from dengue_seir.dataio import generate_synthetic
        data = generate_synthetic(p, THETA, 25.0, T=120, seed=1)
        cfg = MCMCConfig(chains=2, iters=600, warmup=200, seed=11)
        a = run_mh(data, None, p, cfg, init=init)
        cfg2 = MCMCConfig(chains=2, iters=600, warmup=200, seed=11, workers=2)
        b = run_mh(data, None, p, cfg2, init=init)
        assert np.array_equal(a.draws, b.draws)
        assert a.names == PARAM_NAMES
        assert np.all(np.isfinite(a.log_post))
