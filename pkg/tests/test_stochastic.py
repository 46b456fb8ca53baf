import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from dengue_seir.model import ModelParams, ParameterError, transmission_rate
from dengue_seir.stochastic import (EVENT_DELTAS, EnsembleSummary, default_init, event_rates,
                                    outbreak_probability, outbreak_probability_grid, path_rng,
                                    simulate_path)


def gillespie_direct(beta, delta, gamma, N, ol, n, seed):
    """Independent direct-method SSA for constant beta and mu = 0.

    Returns outcomes (1 = outbreak) and end times.
    """
    rng = np.random.default_rng(seed)
    outcomes, times = np.zeros(n, dtype=int), np.zeros(n)
    for k in range(n):
        S, E, I, t = N - 1, 0, 1, 0.0
        while 0 < E + I < ol:
            r = np.array([beta * I * S / N, delta * E, gamma * I])
            total = r.sum()
            t += rng.exponential(1 / total)
            ev = rng.choice(3, p=r / total)
            if ev == 0:
                S, E = S - 1, E + 1
            elif ev == 1:
                E, I = E - 1, I + 1
            else:
                I -= 1
        outcomes[k], times[k] = int(E + I >= ol), t
    return outcomes, times


def branching_outbreak_probability(p, t0, years=5):
    """1 - extinction probability of the linearised two-type process from one infective at t0.

    Backward Kolmogorov equations for the extinction generating functions,
    integrated from a horizon where survival counts as an outbreak.
    """
    def f(t, q):
        qE, qI = q
        b = transmission_rate(p, t)
        return [-(p.delta * (qI - qE) + p.mu * (1 - qE)),
                -(b * (qI * qE - qI) + (p.gamma + p.mu) * (1 - qI))]

    sol = solve_ivp(f, (t0 + years * p.omega, t0), [0.0, 0.0], rtol=1e-10, atol=1e-12,
                    max_step=0.5)
    return 1.0 - sol.y[1, -1]


def two_sample_z(p1, p2, n1, n2):
    pool = (p1 * n1 + p2 * n2) / (n1 + n2)
    se = math.sqrt(pool * (1 - pool) * (1 / n1 + 1 / n2))
    return (p1 - p2) / se


class TestPathBasics:
    def test_event_deltas_conserve_population_except_births_deaths(self):
        sums = EVENT_DELTAS.sum(axis=1)
        assert list(sums) == [1, -1, -1, 0, -1, 0, -1, 0]

    def test_event_rates(self):
        p = ModelParams(N=100.0)
        r = event_rates(p, (90, 5, 4, 1), p.t_p)
        assert r[3] == pytest.approx(transmission_rate(p, p.t_p) * 4 * 90 / 100)
        assert r[5] == p.delta * 5 and r[7] == p.gamma * 4

    def test_default_init(self):
        assert default_init(ModelParams(N=1e6)) == (999_999, 0, 1, 0)

    def test_reproducible(self):
        p = ModelParams(N=1e5)
        a = simulate_path(p, rng=path_rng(3, 7), record=True)
        b = simulate_path(p, rng=path_rng(3, 7), record=True)
        assert a == b

    def test_recorded_log(self):
        res = simulate_path(ModelParams(N=1e5, beta_p=0.581), rng=path_rng(0, 1), record=True)
        log = np.array(res.log)
        assert len(log) == res.events + 1
        assert np.all(np.diff(log[:, 0]) >= 0)
        assert np.all(log[:, 1:] >= 0)

    def test_outbreak_hits_level(self):
        p = ModelParams(N=1e5, beta_np=0.5, A_beta=0, beta_p=0)
        for i in range(20):
            res = simulate_path(p, ol=30, rng=path_rng(0, i), record=True)
            last = res.log[-1]
            if res.outcome == "outbreak":
                assert last[2] + last[3] == 30
            else:
                assert last[2] + last[3] == 0

    def test_preconditions(self):
        p = ModelParams(N=1e4)
        with pytest.raises(ParameterError):
            simulate_path(p, init=(9990, 5, 5, 0), ol=10)
        with pytest.raises(ParameterError):
            simulate_path(p, t0=10.0, t_max=5.0)
        with pytest.raises(ParameterError):
            outbreak_probability(p, n=0)

    def test_absorbing_start(self):
        ens = outbreak_probability(ModelParams(N=1e4), init=(10_000, 0, 0, 0), n=50)
        assert ens.p_ext == 1.0 and ens.n_censored == 0

    def test_censoring_is_reported(self):
        ens = outbreak_probability(ModelParams(N=1e4, beta_np=0.2), t_max=2.0, n=200, seed=1)
        assert ens.n_censored > 0
        assert ens.n_ext + ens.n_outbreak + ens.n_censored == 200


class TestEnsemble:
    def test_worker_count_does_not_change_results(self):
        p = ModelParams(N=1e5)
        a = outbreak_probability(p, n=300, seed=9, workers=1)
        b = outbreak_probability(p, n=300, seed=9, workers=3)
        assert a.outcomes == b.outcomes

    def test_merge(self):
        a = EnsembleSummary(10, 6, 4, 0)
        b = EnsembleSummary(30, 10, 19, 1)
        m = a.merge(b)
        assert (m.n, m.n_ext, m.n_outbreak, m.n_censored) == (40, 16, 23, 1)
        assert m.p_outbreak == pytest.approx(1 - 16 / 40)

    def test_std_error(self):
        e = EnsembleSummary(100, 75, 25, 0)
        assert e.std_error == pytest.approx(math.sqrt(0.25 * 0.75 / 100))

    def test_against_direct_method_ssa(self):
        # constant transmission, no demography: thinning must match plain SSA
        beta, N, ol, n = 0.3, 2000, 25, 3000
        p = ModelParams(beta_np=beta, A_beta=0, beta_p=0, mu=0.0, N=N)
        ours = outbreak_probability(p, ol=ol, n=n, seed=21)
        ref, ref_t = gillespie_direct(beta, p.delta, p.gamma, N, ol, n, seed=22)
        z = two_sample_z(ours.p_outbreak, ref.mean(), n, n)
        assert abs(z) < 4
        ours_t = np.array([r[2] for r in ours.outcomes if r[1] == "outbreak"])
        ref_out = ref_t[ref == 1]
        se = math.sqrt(ours_t.var() / ours_t.size + ref_out.var() / ref_out.size)
        assert abs(ours_t.mean() - ref_out.mean()) < 4 * se

    @pytest.mark.parametrize("r0", [1.5, 3.0])
    def test_branching_limit_constant_beta(self, r0):
        p = ModelParams(beta_np=r0 * 0.125, A_beta=0, beta_p=0, mu=0.0, N=1e6)
        ens = outbreak_probability(p, n=3000, seed=int(r0 * 10))
        assert abs(ens.p_outbreak - (1 - 1 / r0)) < 4 * ens.std_error

    @pytest.mark.parametrize("sigma,bnp,bp", [(60, 0.057, 0.085), (60, 0.057, 0.581)])
    def test_branching_oracle_seasonal(self, sigma, bnp, bp):
        p = ModelParams(sigma=sigma, beta_np=bnp, beta_p=bp, N=1e6)
        ens = outbreak_probability(p, n=4000, seed=3)
        ref = branching_outbreak_probability(p, 0.0)
        # the oracle ignores susceptible depletion below OL; allow a small bias
        assert abs(ens.p_outbreak - ref) < 4 * ens.std_error + 0.01

    def test_grid(self):
        p = ModelParams(N=1e5)
        z = outbreak_probability_grid(p, ("beta_np", [0.0, 0.3]), ("beta_p", [0.0, 0.3]),
                                      n=200, seed=2)
        assert z.shape == (2, 2)
        assert z[0, 0] < z[1, 1]
        assert z[0, 0] < 0.1
        again = outbreak_probability_grid(p, ("beta_np", [0.0, 0.3]), ("beta_p", [0.0, 0.3]),
                                          n=200, seed=2, workers=2)
        assert np.array_equal(z, again)
