"""Bayesian fitting of the seasonality parameters by random-walk Metropolis.

Sampled parameters, in order: ``beta_np, A_beta, t_p, sigma, beta_p,
sigma_obs``. The incubation, recovery and death rates and the population
size are held fixed at the values in the supplied :class:`ModelParams`.

The sampler works in an unconstrained space (logit for unit-interval
priors, log for positive priors, identity otherwise) with a Gaussian
random-walk proposal. The proposal covariance and step size are tuned
during warm-up and frozen afterwards.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import differential_evolution, minimize

from .model import (IntegrationError, ModelParams, ParameterError, SeirState,
                    initial_state, integrate)

PARAM_NAMES = ("beta_np", "A_beta", "t_p", "sigma", "beta_p", "sigma_obs")
SEASONAL = PARAM_NAMES[:5]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class AdaptationWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class Uniform:
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ParameterError("uniform prior needs lo < hi")

    def logpdf(self, x):
        if self.lo < x < self.hi:
            return -math.log(self.hi - self.lo)
        return -math.inf

    def sample(self, rng):
        return rng.uniform(self.lo, self.hi)

    def to_free(self, x):
        u = (x - self.lo) / (self.hi - self.lo)
        return math.log(u) - math.log1p(-u)

    def from_free(self, z):
        return self.lo + (self.hi - self.lo) / (1.0 + math.exp(-z))

    def log_jacobian(self, z):
        # d x / d z = (hi - lo) * s * (1 - s), s = sigmoid(z)
        return math.log(self.hi - self.lo) - _softplus(-z) - _softplus(z)

    def __str__(self):
        return f"U({_fmt(self.lo)}, {_fmt(self.hi)})"


@dataclass(frozen=True)
class Normal:
    mean: float
    sd: float

    def __post_init__(self):
        if not self.sd > 0:
            raise ParameterError("normal prior needs sd > 0")

    def logpdf(self, x):
        z = (x - self.mean) / self.sd
        return -0.5 * z * z - math.log(self.sd) - _LOG_SQRT_2PI

    def sample(self, rng):
        return rng.normal(self.mean, self.sd)

    def to_free(self, x):
        return x

    def from_free(self, z):
        return z

    def log_jacobian(self, z):
        return 0.0

    def __str__(self):
        return f"N({_fmt(self.mean)}, {_fmt(self.sd)})"


@dataclass(frozen=True)
class Exponential:
    rate: float = 1.0

    def __post_init__(self):
        if not self.rate > 0:
            raise ParameterError("exponential prior needs rate > 0")

    def logpdf(self, x):
        if x < 0:
            return -math.inf
        return math.log(self.rate) - self.rate * x

    def sample(self, rng):
        return rng.exponential(1.0 / self.rate)

    def to_free(self, x):
        return math.log(x)

    def from_free(self, z):
        return math.exp(z)

    def log_jacobian(self, z):
        return z

    def __str__(self):
        return f"Exponential({_fmt(self.rate)})"


def _softplus(x):
    return max(x, 0.0) + math.log1p(math.exp(-abs(x)))


def _fmt(v):
    return f"{v:g}"


def parse_prior(text: str):
    """Parse ``U(lo,hi)``, ``N(mean,sd)`` or ``Exponential(rate)``."""
    s = text.strip().replace(" ", "")
    head, _, rest = s.partition("(")
    if not rest.endswith(")"):
        raise ValueError(f"cannot parse prior {text!r}")
    args = [float(a) for a in rest[:-1].split(",") if a]
    head = head.lower()
    if head in ("u", "uniform") and len(args) == 2:
        return Uniform(*args)
    if head in ("n", "normal") and len(args) == 2:
        return Normal(*args)
    if head in ("exp", "exponential") and len(args) == 1:
        return Exponential(*args)
    raise ValueError(f"cannot parse prior {text!r}")


def default_priors() -> dict:
    return {
        "beta_np": Uniform(0.0, 1.0),
        "A_beta": Uniform(0.0, 1.0),
        "t_p": Normal(220.0, 30.0),
        "sigma": Normal(60.0, 10.0),
        "beta_p": Uniform(0.0, 1.0),
        "sigma_obs": Exponential(1.0),
    }


@dataclass
class CaseSeries:
    """Observed daily counts; ``days`` counts from the start of the series."""

    days: np.ndarray
    cases: np.ndarray
    start_date: str | None = None

    def __post_init__(self):
        self.days = np.asarray(self.days, dtype=np.int64)
        self.cases = np.asarray(self.cases, dtype=np.float64)
        if self.days.shape != self.cases.shape:
            raise ValueError("days and cases differ in length")
        if np.any(np.diff(self.days) <= 0):
            raise ValueError("days must be strictly increasing")
        if np.any(self.cases < 0):
            raise ValueError("case counts must be non-negative")

    def __len__(self):
        return len(self.days)


def log_prior(theta, priors: dict | None = None) -> float:
    priors = default_priors() if priors is None else priors
    theta = list(theta)
    if len(theta) != len(PARAM_NAMES):
        raise ValueError(f"theta has {len(theta)} entries, expected {len(PARAM_NAMES)}")
    return sum(priors[name].logpdf(float(x)) for name, x in zip(PARAM_NAMES, theta))


def gaussian_loglik(observed, predicted, sigma_obs: float, simplified: bool = False) -> float:
    """Log-likelihood of ``observed`` around ``predicted``.

    ``simplified`` returns minus the squared-error sum, ignoring
    ``sigma_obs``.
    """
    r = np.asarray(observed, dtype=float) - np.asarray(predicted, dtype=float)
    sse = float(r @ r)
    if simplified:
        return -sse
    if not sigma_obs > 0:
        return -math.inf
    return -len(r) * (math.log(sigma_obs) + _LOG_SQRT_2PI) - sse / (2.0 * sigma_obs * sigma_obs)


def model_params_for(theta, p: ModelParams) -> ModelParams:
    values = dict(zip(SEASONAL, (float(v) for v in theta[:5])))
    return p.replace(**values)


def predict(theta, data: CaseSeries, p: ModelParams, observable: str = "incidence",
            init: SeirState | None = None, h: float = 0.1) -> np.ndarray:
    """Model observable at the data days for seasonality parameters ``theta``."""
    q = model_params_for(theta, p)
    if init is None:
        init = initial_state(q, data.cases[0], observable)
    t_end = max(int(data.days[-1]), 1)
    traj = integrate(q, init, init.t + t_end, h=h, observable=observable)
    return traj.y[data.days]


def log_likelihood(theta, data: CaseSeries, p: ModelParams, observable: str = "incidence",
                   simplified: bool = False, init: SeirState | None = None,
                   h: float = 0.1) -> float:
    """Gaussian log-likelihood of the case series; -inf if the model is invalid."""
    try:
        y = predict(theta, data, p, observable, init, h)
    except (ParameterError, IntegrationError):
        return -math.inf
    return gaussian_loglik(data.cases, y, float(theta[5]), simplified)


@dataclass
class MCMCConfig:
    chains: int = 4
    iters: int = 50_000
    warmup: int = 5_000
    seed: int = 0
    target_accept: float = 0.234
    adapt_window: int = 50
    observable: str = "incidence"
    simplified: bool = False
    h: float = 0.1
    workers: int = 1


@dataclass
class PosteriorChains:
    """Post-warm-up draws, shape ``(chains, draws, params)``."""

    names: tuple
    draws: np.ndarray
    log_post: np.ndarray
    warmup: int
    accept_rate: np.ndarray
    seeds: list
    warmup_accept_rate: np.ndarray = field(default=None)

    @property
    def n_chains(self) -> int:
        return self.draws.shape[0]

    @property
    def n_draws(self) -> int:
        return self.draws.shape[1]

    def param(self, name: str) -> np.ndarray:
        return self.draws[:, :, self.names.index(name)]

    def pooled(self) -> np.ndarray:
        return self.draws.reshape(-1, self.draws.shape[2])


class _Target:
    """Log posterior in the unconstrained coordinates, picklable for workers."""

    def __init__(self, data, priors, p, observable, simplified, init, h):
        self.data = data
        self.priors = [priors[name] for name in PARAM_NAMES]
        self.p = p
        self.observable = observable
        self.simplified = simplified
        self.init = init
        self.h = h

    def to_natural(self, z):
        return np.array([pr.from_free(v) for pr, v in zip(self.priors, z)])

    def to_free(self, x):
        return np.array([pr.to_free(v) for pr, v in zip(self.priors, x)])

    def log_prior_natural(self, x):
        return sum(pr.logpdf(v) for pr, v in zip(self.priors, x))

    def __call__(self, z):
        x = self.to_natural(z)
        lp = self.log_prior_natural(x)
        if not math.isfinite(lp):
            return -math.inf, x, -math.inf
        if self.data is not None and len(self.data):
            lp += log_likelihood(x, self.data, self.p, self.observable, self.simplified,
                                 self.init, self.h)
        if not math.isfinite(lp):
            return -math.inf, x, -math.inf
        jac = sum(pr.log_jacobian(v) for pr, v in zip(self.priors, z))
        return lp + jac, x, lp


def metropolis(log_target, z0, n_iter: int, warmup: int, rng, scales=None,
               target_accept: float = 0.234, adapt_window: int = 50):
    """Random-walk Metropolis with Gaussian proposals.

    ``log_target(z)`` returns ``(log density, natural-space point, log
    posterior)``. ``scales`` is either a vector of per-coordinate sds or a
    lower-triangular factor of the proposal covariance. During the first
    ``warmup`` iterations a global step factor is nudged toward
    ``target_accept`` after every window, and the proposal covariance is
    reset to the empirical covariance of recent warm-up draws at 40% and
    70% of warm-up. Nothing adapts after warm-up.

    Returns ``(natural draws, log posteriors, post-warm-up acceptance,
    warm-up acceptance)`` for the post-warm-up iterations.
    """
    z = np.array(z0, dtype=float)
    d = z.size
    scales = np.ones(d) if scales is None else np.array(scales, dtype=float)
    chol = np.diag(scales) if scales.ndim == 1 else scales
    lf, x, lpost = log_target(z)
    if not math.isfinite(lf):
        raise ParameterError("initial point has zero posterior density")
    factor = 2.38 / math.sqrt(d)
    keep = n_iter - warmup
    out = np.empty((keep, x.size))
    out_lp = np.empty(keep)
    hist = np.empty((warmup, d))
    reset_at = {int(0.4 * warmup), int(0.7 * warmup)}
    window_acc = 0
    window_idx = 0
    stalled = 0
    warm_acc = 0
    acc = 0
    for it in range(n_iter):
        prop = z + factor * (chol @ rng.standard_normal(d))
        lf_new, x_new, lp_new = log_target(prop)
        if math.log(rng.random()) < lf_new - lf:
            z, lf, x, lpost = prop, lf_new, x_new, lp_new
            accepted = 1
        else:
            accepted = 0
        if it < warmup:
            hist[it] = z
            warm_acc += accepted
            window_acc += accepted
            if (it + 1) % adapt_window == 0:
                window_idx += 1
                rate = window_acc / adapt_window
                if window_acc == 0:
                    stalled += 1
                factor *= math.exp((rate - target_accept) / math.sqrt(window_idx) * 2.0)
                window_acc = 0
            if it + 1 in reset_at:
                lo = (it + 1) // 2
                cov = np.atleast_2d(np.cov(hist[lo:it + 1], rowvar=False))
                cov += 1e-10 * np.diag(np.diag(cov)) + 1e-14 * np.eye(d)
                try:
                    chol = np.linalg.cholesky(cov)
                    factor = 2.38 / math.sqrt(d)
                except np.linalg.LinAlgError:
                    pass
        else:
            acc += accepted
            out[it - warmup] = x
            out_lp[it - warmup] = lpost
    if stalled:
        warnings.warn(f"{stalled} warm-up window(s) of {adapt_window} iterations accepted "
                      f"no proposals", AdaptationWarning, stacklevel=2)
    return out, out_lp, acc / max(keep, 1), warm_acc / max(warmup, 1)


def _search_bounds(name, prior, omega):
    if isinstance(prior, Uniform):
        pad = 1e-6 * (prior.hi - prior.lo)
        lo, hi = prior.lo + pad, prior.hi - pad
    elif isinstance(prior, Normal):
        lo, hi = prior.mean - 4.0 * prior.sd, prior.mean + 4.0 * prior.sd
    else:
        lo, hi = 1e-6, 20.0 / prior.rate
    if name == "t_p":
        lo, hi = max(lo, 0.0), min(hi, omega - 1e-6)
    elif name in ("sigma", "beta_np", "A_beta", "beta_p"):
        lo = max(lo, 1e-6)
    if not lo < hi:
        raise ParameterError(f"prior for {name} leaves no valid search range")
    return lo, hi


def find_mode(target: _Target, seed: int, maxiter: int = 200):
    """Global search for the posterior mode, returned in free coordinates.

    Differential evolution runs over the five seasonal parameters with the
    noise scale profiled out (its conditional optimum is the RMS residual);
    Nelder-Mead then polishes all six coordinates. Local search from prior
    draws alone stalls in poor-fit modes with inflated noise.
    """
    data = target.data
    n = len(data)
    sig_prior = target.priors[5]
    bounds = [_search_bounds(nm, pr, target.p.omega)
              for nm, pr in zip(SEASONAL, target.priors[:5])]

    def point(v):
        try:
            y = predict(v, data, target.p, target.observable, target.init, target.h)
        except (ParameterError, IntegrationError):
            return None
        r = data.cases - y
        sse = float(r @ r)
        if target.simplified:
            s_obs = 1.0 / sig_prior.rate if isinstance(sig_prior, Exponential) else 1.0
        else:
            s_obs = max(math.sqrt(sse / n), 1e-9)
        return np.append(v, s_obs)

    def objective(v):
        x = point(v)
        if x is None:
            return 1e300
        lp = target.log_prior_natural(x)
        if not math.isfinite(lp):
            return 1e300
        val = lp + gaussian_loglik(data.cases, target_predict(x), x[5], target.simplified)
        return -val if math.isfinite(val) else 1e300

    def target_predict(x):
        return predict(x, data, target.p, target.observable, target.init, target.h)

    res = differential_evolution(objective, bounds, seed=seed, maxiter=maxiter, tol=1e-7,
                                 polish=False, updating="immediate")
    z = target.to_free(point(res.x))

    def nlp(z):
        v = target(z)[0]
        return -v if math.isfinite(v) else 1e300

    for _ in range(2):
        z = minimize(nlp, z, method="Nelder-Mead",
                     options={"maxfev": 2000, "xatol": 1e-7, "fatol": 1e-7}).x
    return z


def _mode_covariance_factor(target: _Target, z):
    """Cholesky factor of the inverse negative Hessian at ``z``.

    Finite differences in free coordinates; falls back to conditional sds
    from the diagonal when the Hessian is not negative definite.
    """
    d = z.size
    steps = 1e-3 * np.maximum(1.0, np.abs(z))
    f0 = target(z)[0]
    H = np.empty((d, d))

    def f(dz):
        v = target(z + dz)[0]
        return v if math.isfinite(v) else -1e300

    for i in range(d):
        ei = np.zeros(d)
        ei[i] = steps[i]
        H[i, i] = (f(ei) - 2.0 * f0 + f(-ei)) / steps[i] ** 2
        for j in range(i):
            ej = np.zeros(d)
            ej[j] = steps[j]
            H[i, j] = H[j, i] = (f(ei + ej) - f(ei - ej) - f(-ei + ej) + f(-ei - ej)) / (
                4.0 * steps[i] * steps[j])
    try:
        return np.linalg.cholesky(np.linalg.inv(-H))
    except np.linalg.LinAlgError:
        diag = -np.diag(H)
        sd = np.where(np.isfinite(diag) & (diag > 0), 1.0 / np.sqrt(np.abs(diag)), 0.1)
        return np.diag(sd)


def _prior_start(target: _Target, rng):
    for _ in range(1000):
        x = np.array([pr.sample(rng) for pr in target.priors])
        z = target.to_free(x) if math.isfinite(target.log_prior_natural(x)) else None
        if z is not None and math.isfinite(target(z)[0]):
            return z
    raise ParameterError("no prior draw gave a finite posterior density")


def _prior_scales(target: _Target):
    return np.array([0.1 * pr.sd if isinstance(pr, Normal) else 0.1 for pr in target.priors])


def _run_chain(args):
    target, seed, cfg, mode, mode_scales = args
    rng = np.random.default_rng(seed)
    if mode is None:
        z0, scales = _prior_start(target, rng), _prior_scales(target)
    else:
        # start at a draw from the local Gaussian approximation
        z0 = mode + mode_scales @ rng.standard_normal(mode.size)
        if not math.isfinite(target(z0)[0]):
            z0 = mode
        scales = mode_scales
    return metropolis(target, z0, cfg.iters, cfg.warmup, rng, scales=scales,
                      target_accept=cfg.target_accept, adapt_window=cfg.adapt_window)


def run_mh(data: CaseSeries | None, priors: dict | None = None, p: ModelParams | None = None,
           config: MCMCConfig | None = None, init: SeirState | None = None) -> PosteriorChains:
    """Run independent Metropolis chains on the seasonal SEIR posterior.

    ``data=None`` (or an empty series) samples the prior, with chains
    started from prior draws. Otherwise a shared posterior mode is located
    first and each chain starts from its own random perturbation of it.
    Chain seeds are spawned from ``config.seed``.
    """
    cfg = MCMCConfig() if config is None else config
    if not cfg.iters > cfg.warmup >= 0:
        raise ValueError("iters must exceed warmup")
    if cfg.chains < 1:
        raise ValueError("need at least one chain")
    priors = {**default_priors(), **(priors or {})}
    p = ModelParams() if p is None else p
    target = _Target(data, priors, p, cfg.observable, cfg.simplified, init, cfg.h)
    seeds = [int(s.generate_state(1, np.uint64)[0])
             for s in np.random.SeedSequence(cfg.seed).spawn(cfg.chains)]
    mode = mode_scales = None
    if data is not None and len(data):
        mode_seed = int(np.random.SeedSequence(cfg.seed, spawn_key=(2**31,)).generate_state(1)[0])
        mode = find_mode(target, mode_seed)
        mode_scales = _mode_covariance_factor(target, mode)
    jobs = [(target, s, cfg, mode, mode_scales) for s in seeds]
    if cfg.workers > 1 and cfg.chains > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_chain, jobs))
    else:
        results = [_run_chain(j) for j in jobs]
    return PosteriorChains(
        names=PARAM_NAMES,
        draws=np.stack([r[0] for r in results]),
        log_post=np.stack([r[1] for r in results]),
        warmup=cfg.warmup,
        accept_rate=np.array([r[2] for r in results]),
        seeds=seeds,
        warmup_accept_rate=np.array([r[3] for r in results]),
    )
