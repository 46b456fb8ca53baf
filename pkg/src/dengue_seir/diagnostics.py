"""Convergence diagnostics, posterior summaries and predictive checks."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .inference import (PARAM_NAMES, CaseSeries, PosteriorChains, default_priors,
                        predict)
from .model import IntegrationError, ModelParams, ParameterError, SeirState

RHAT_OK = 1.01
RHAT_WARN = 1.1


def gelman_rubin(chains) -> float:
    """Potential scale reduction factor for one parameter.

    ``chains`` has shape ``(m, n)``. Uses the classic, non-split form
    ``sqrt(((n-1)/n * W + B/n) / W)``. Identical constant chains give 1.0;
    constant chains at different values give ``inf``.
    """
    x = np.asarray(chains, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 2:
        raise ValueError("need at least 2 chains of length >= 2")
    n = x.shape[1]
    W = x.var(axis=1, ddof=1).mean()
    B_over_n = x.mean(axis=1).var(ddof=1)
    if W == 0.0:
        return 1.0 if B_over_n == 0.0 else math.inf
    V = (n - 1) / n * W + B_over_n
    return math.sqrt(V / W)


def _autocorr(x: np.ndarray) -> np.ndarray:
    n = x.size
    xc = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n] / n
    return acov / acov[0]


def _chain_ess(x: np.ndarray) -> float:
    n = x.size
    if np.all(x == x[0]):
        return 1.0
    rho = _autocorr(x)
    # Geyer initial positive sequence over pairs (rho_2m + rho_2m+1)
    tau = -1.0
    for m in range(n // 2):
        pair = rho[2 * m] + rho[2 * m + 1]
        if pair <= 0:
            break
        tau += 2.0 * pair
    # antithetic chains can drive tau to ~0; cap ESS at n*log10(n)
    tau = max(tau, 1.0 / math.log10(max(n, 10)))
    return n / tau


def effective_sample_size(chains) -> float:
    """ESS summed over chains; ``chains`` is ``(n,)`` or ``(m, n)``.

    A chain whose draws are all identical contributes 1.
    """
    x = np.atleast_2d(np.asarray(chains, dtype=float))
    if x.shape[1] < 2:
        return float(x.shape[0])
    if np.all(x == x.flat[0]):
        return 1.0
    return float(sum(_chain_ess(row) for row in x))


@dataclass
class ParamSummary:
    name: str
    prior: str
    mean: float
    ci_low: float
    ci_high: float
    r_hat: float
    ess: float


@dataclass
class PosteriorSummary:
    rows: list

    def __getitem__(self, name) -> ParamSummary:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    @property
    def r_hat_range(self) -> tuple:
        vals = [r.r_hat for r in self.rows if not math.isnan(r.r_hat)]
        return (min(vals), max(vals)) if vals else (math.nan, math.nan)


def summarize(chains: PosteriorChains, priors: dict | None = None,
              quantiles=(0.025, 0.975)) -> PosteriorSummary:
    """Mean, central credible interval, R-hat and ESS per parameter.

    ESS is capped at the number of retained draws.
    """
    priors = {**default_priors(), **(priors or {})}
    rows = []
    total = chains.n_chains * chains.n_draws
    for k, name in enumerate(chains.names):
        x = chains.draws[:, :, k]
        lo, hi = np.quantile(x.ravel(), quantiles, method="linear")
        rhat = gelman_rubin(x) if chains.n_chains >= 2 and chains.n_draws >= 2 else math.nan
        ess = min(effective_sample_size(x), float(total))
        rows.append(ParamSummary(name, str(priors[name]) if name in priors else "--",
                                 float(x.mean()), float(lo), float(hi), rhat, ess))
    return PosteriorSummary(rows)


def summarize_draws(x, quantiles=(0.025, 0.975)) -> dict:
    """Mean and interval of a flat sample."""
    x = np.asarray(x, dtype=float).ravel()
    lo, hi = np.quantile(x, quantiles, method="linear")
    return {"mean": float(x.mean()), "ci_low": float(lo), "ci_high": float(hi)}


@dataclass
class PredictiveBands:
    days: np.ndarray
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    curve: np.ndarray

    def coverage(self, observed) -> float:
        obs = np.asarray(observed, dtype=float)
        return float(np.mean((obs >= self.lower) & (obs <= self.upper)))


def posterior_predictive(chains: PosteriorChains, p: ModelParams, data: CaseSeries,
                         draws: int = 500, quantiles=(0.025, 0.975), seed: int = 0,
                         observable: str = "incidence", init: SeirState | None = None,
                         h: float = 0.1) -> PredictiveBands:
    """Predictive mean and band per data day from posterior draws plus noise.

    ``curve`` is the mean of the noiseless model curves.
    """
    rng = np.random.default_rng(seed)
    pool = chains.pooled()
    idx = rng.choice(len(pool), size=draws, replace=draws > len(pool))
    sims, curves = [], []
    for i in idx:
        theta = pool[i]
        try:
            y = predict(theta, data, p, observable, init, h)
        except (ParameterError, IntegrationError):
            continue
        curves.append(y)
        sims.append(y + rng.normal(0.0, theta[PARAM_NAMES.index("sigma_obs")], y.size))
    if not sims:
        raise ValueError("no posterior draw produced a valid trajectory")
    sims = np.array(sims)
    lo, hi = np.quantile(sims, quantiles, axis=0, method="linear")
    return PredictiveBands(days=data.days.copy(), mean=sims.mean(axis=0), lower=lo,
                           upper=hi, curve=np.mean(curves, axis=0))
