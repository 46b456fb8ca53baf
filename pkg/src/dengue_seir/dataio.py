"""File formats: case and rainfall CSVs, run configs, and result tables.

All writers format floats with six significant digits so that identical
inputs produce identical bytes.
"""
from __future__ import annotations

import csv
import dataclasses
import datetime as dt
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .inference import PARAM_NAMES, CaseSeries, PosteriorChains
from .model import ModelParams, initial_state, integrate


class DataFormatError(ValueError):
    pass


class ConfigError(ValueError):
    pass


def fmt(x) -> str:
    """Six-significant-digit float formatting used by every writer."""
    x = float(x)
    if x != x:
        return "nan"
    if x in (float("inf"), float("-inf")):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6g}"


# -- case series ---------------------------------------------------------


def load_case_csv(path) -> CaseSeries:
    """Read a ``date,cases`` CSV with one row per consecutive ISO date."""
    text = Path(path).read_text()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip().lower() for c in rows[0]] != ["date", "cases"]:
        raise DataFormatError(f"{path}: expected header 'date,cases'")
    dates, counts = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise DataFormatError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
        try:
            d = dt.date.fromisoformat(row[0].strip())
            c = float(row[1])
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from None
        if c < 0:
            raise DataFormatError(f"{path}:{lineno}: negative count {c}")
        dates.append(d)
        counts.append(c)
    if not dates:
        raise DataFormatError(f"{path}: no data rows")
    offsets = [(d - dates[0]).days for d in dates]
    if any(b <= a for a, b in zip(offsets, offsets[1:])):
        raise DataFormatError(f"{path}: dates are not strictly increasing")
    if offsets[-1] != len(offsets) - 1:
        present = set(offsets)
        missing = [(dates[0] + dt.timedelta(days=k)).isoformat()
                   for k in range(offsets[-1] + 1) if k not in present]
        raise DataFormatError(f"{path}: missing dates {', '.join(missing[:20])}")
    return CaseSeries(days=np.array(offsets), cases=np.array(counts),
                      start_date=dates[0].isoformat())


def write_case_csv(series: CaseSeries, path, start_date: str | None = None) -> None:
    start = dt.date.fromisoformat(start_date or series.start_date or "2023-01-01")
    lines = ["date,cases"]
    for d, c in zip(series.days, series.cases):
        lines.append(f"{(start + dt.timedelta(days=int(d))).isoformat()},{fmt(c)}")
    _write(path, lines)


def _write(path, lines) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# -- rainfall --------------------------------------------------------------


@dataclass
class RainfallSeries:
    months: np.ndarray
    mm: np.ndarray


def load_rainfall_csv(path) -> RainfallSeries:
    """Read a ``month,mm`` CSV with exactly the twelve months 1..12."""
    rows = list(csv.reader(io.StringIO(Path(path).read_text())))
    if not rows or [c.strip().lower() for c in rows[0]] != ["month", "mm"]:
        raise DataFormatError(f"{path}: expected header 'month,mm'")
    months, mm = [], []
    for row in rows[1:]:
        if not row:
            continue
        months.append(int(row[0]))
        mm.append(float(row[1]))
    if sorted(months) != list(range(1, 13)):
        raise DataFormatError(f"{path}: need exactly months 1..12")
    if any(v < 0 for v in mm):
        raise DataFormatError(f"{path}: negative rainfall")
    order = np.argsort(months)
    return RainfallSeries(np.array(months)[order], np.array(mm)[order])


# -- synthetic data -----------------------------------------------------


def generate_synthetic(p: ModelParams, theta_true, sigma_obs: float, T: int = 365,
                       seed: int = 0, init_cases: float = 50.0,
                       observable: str = "incidence", h: float = 0.1) -> CaseSeries:
    """Model curve under ``theta_true`` plus Gaussian noise, clamped at 0.

    The run starts from :func:`initial_state` seeded with ``init_cases``.
    """
    if T < 30:
        raise ValueError("T must be at least 30 days")
    from .inference import model_params_for
    q = model_params_for(theta_true, p)
    init = initial_state(q, init_cases, observable)
    y = integrate(q, init, T - 1, h=h, observable=observable).y
    rng = np.random.default_rng(seed)
    noisy = np.maximum(y + rng.normal(0.0, sigma_obs, T), 0.0) if sigma_obs > 0 else y.copy()
    return CaseSeries(days=np.arange(T), cases=noisy, start_date="2023-01-01")


# -- posterior draws and summaries ----------------------------------------

POSTERIOR_HEADER = ["chain", "iter", *PARAM_NAMES, "log_post"]
SUMMARY_HEADER = ["parameter", "prior", "mean", "ci_low", "ci_high", "r_hat", "ess"]


def write_posterior_csv(chains: PosteriorChains, path) -> None:
    lines = [",".join(POSTERIOR_HEADER)]
    for c in range(chains.n_chains):
        for i in range(chains.n_draws):
            vals = ",".join(fmt(v) for v in chains.draws[c, i])
            lines.append(f"{c},{chains.warmup + i},{vals},{fmt(chains.log_post[c, i])}")
    _write(path, lines)


def load_posterior_csv(path) -> PosteriorChains:
    """Read draws written by :func:`write_posterior_csv`.

    Values are rounded to six significant digits on write, so a round trip
    is exact only at that precision.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != POSTERIOR_HEADER:
            raise DataFormatError(f"{path}: unexpected header {header}")
        rows = [r for r in reader if r]
    arr = np.array(rows, dtype=float)
    chain_ids = arr[:, 0].astype(int)
    ids = sorted(set(chain_ids))
    draws = [arr[chain_ids == c][:, 2:-1] for c in ids]
    lps = [arr[chain_ids == c][:, -1] for c in ids]
    n = min(len(d) for d in draws)
    if any(len(d) != n for d in draws):
        raise DataFormatError(f"{path}: chains have unequal lengths")
    warmup = int(arr[chain_ids == ids[0]][0, 1])
    return PosteriorChains(names=PARAM_NAMES, draws=np.stack(draws), log_post=np.stack(lps),
                           warmup=warmup, accept_rate=np.full(len(ids), np.nan),
                           seeds=[None] * len(ids))


def write_summary_csv(summary, path) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for r in summary.rows:
        w.writerow([r.name, r.prior, fmt(r.mean), fmt(r.ci_low), fmt(r.ci_high),
                    fmt(r.r_hat), fmt(r.ess)])
    _write(path, buf.getvalue().rstrip("\n").split("\n"))


def write_bands_csv(bands, observed, path) -> None:
    lines = ["day,observed,mean,curve,lower,upper"]
    for k, d in enumerate(bands.days):
        lines.append(",".join([str(int(d)), fmt(observed[k]), fmt(bands.mean[k]),
                               fmt(bands.curve[k]), fmt(bands.lower[k]), fmt(bands.upper[k])]))
    _write(path, lines)


def write_trajectory_csv(traj, path) -> None:
    lines = ["t,S,E,I,R,y"]
    for k, t in enumerate(traj.t):
        S, E, I, R = traj.states[k]
        lines.append(",".join(fmt(v) for v in (t, S, E, I, R, traj.y[k])))
    _write(path, lines)


# -- heatmap grids ----------------------------------------------------------


def write_grid_csv(axis1, axis2, values, path) -> None:
    """Matrix CSV: top-left cell ``name1\\name2``, first row axis2 values,
    first column axis1 values, body the grid."""
    name1, vals1 = axis1
    name2, vals2 = axis2
    lines = [",".join([f"{name1}\\{name2}", *(fmt(v) for v in vals2)])]
    for v1, row in zip(vals1, values):
        lines.append(",".join([fmt(v1), *(fmt(v) for v in row)]))
    _write(path, lines)


def load_grid_csv(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    name1, _, name2 = rows[0][0].partition("\\")
    vals2 = np.array(rows[0][1:], dtype=float)
    vals1 = np.array([r[0] for r in rows[1:]], dtype=float)
    body = np.array([r[1:] for r in rows[1:]], dtype=float)
    return (name1, vals1), (name2, vals2), body


def write_path_log(rows, path) -> None:
    lines = ["path_id,outcome,t_end,events"]
    for i, outcome, t_end, events in rows:
        lines.append(f"{i},{outcome},{fmt(t_end)},{events}")
    _write(path, lines)


# -- run configuration --------------------------------------------------


@dataclass
class RunConfig:
    """Every tunable of a run, with defaults.

    ``pop`` is the population for ODE runs and ``ctmc_pop`` the one for
    stochastic runs. ``init_cases`` seeds the ODE start through
    :func:`initial_state`; ``fit`` and ``ppc`` use it only when ``fit_init``
    is ``config``, and otherwise seed from the first observed count; ``days`` is the simulated or synthetic horizon and
    ``sigma_obs`` the synthetic noise sd. ``t_max`` of 0 means
    ``t0 + 5 * omega``. ``grid_n`` is the path count per outbreak-heatmap
    cell. Priors are strings such as ``U(0, 1)``, ``N(220, 30)``,
    ``Exponential(1)``. ``likelihood`` is ``gaussian`` or ``simplified``.
    """

    # model
    beta_np: float = 0.0567
    a_beta: float = 0.047
    t_p: float = 190.72
    sigma: float = 61.817
    beta_peak: float = 0.085
    delta: float = 0.25
    gamma: float = 0.125
    mu: float = 0.0000380
    pop: float = 171_000_000.0
    omega: float = 365.0
    observable: str = "incidence"
    h: float = 0.1
    init_cases: float = 50.0
    fit_init: str = "data"
    days: int = 365
    sigma_obs: float = 25.0
    # priors
    prior_beta_np: str = "U(0, 1)"
    prior_a_beta: str = "U(0, 1)"
    prior_t_p: str = "N(220, 30)"
    prior_sigma: str = "N(60, 10)"
    prior_beta_peak: str = "U(0, 1)"
    prior_sigma_obs: str = "Exponential(1)"
    likelihood: str = "gaussian"
    # mcmc
    chains: int = 4
    iters: int = 50_000
    warmup: int = 5_000
    seed: int = 0
    # ctmc
    n: int = 10_000
    ol: int = 100
    t0: float = 0.0
    t_max: float = 0.0
    ctmc_pop: float = 1_000_000.0
    grid_n: int = 1000
    # grids and output
    grid: str = "20x20"
    x_axis: str = "beta_np:0.02:0.12"
    y_axis: str = "beta_p:0.05:0.6"
    out: str = "out"
    workers: int = 1

    def model_params(self, ctmc: bool = False) -> ModelParams:
        return ModelParams(beta_np=self.beta_np, A_beta=self.a_beta, beta_p=self.beta_peak,
                           t_p=self.t_p, sigma=self.sigma, delta=self.delta, gamma=self.gamma,
                           mu=self.mu, N=self.ctmc_pop if ctmc else self.pop, omega=self.omega)

    def priors(self) -> dict:
        from .inference import parse_prior
        return {
            "beta_np": parse_prior(self.prior_beta_np),
            "A_beta": parse_prior(self.prior_a_beta),
            "t_p": parse_prior(self.prior_t_p),
            "sigma": parse_prior(self.prior_sigma),
            "beta_p": parse_prior(self.prior_beta_peak),
            "sigma_obs": parse_prior(self.prior_sigma_obs),
        }

    def grid_shape(self) -> tuple[int, int]:
        try:
            a, b = self.grid.lower().split("x")
            return int(a), int(b)
        except ValueError:
            raise ConfigError(f"grid must look like 20x20, got {self.grid!r}") from None

    def resolved_t_max(self) -> float:
        return self.t_max if self.t_max > 0 else self.t0 + 5.0 * self.omega


CONFIG_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, raw):
    typ = CONFIG_FIELDS[name].type
    try:
        if typ in ("float", float):
            return float(raw)
        if typ in ("int", int):
            return int(raw)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r}") from None
    return str(raw)


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys fail."""
    cfg = dataclasses.replace(base) if base is not None else RunConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key = value")
        if key not in CONFIG_FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        setattr(cfg, key, _coerce(key, value.strip()))
    return cfg


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    return parse_config(Path(path).read_text(), base)


def serialize_config(cfg: RunConfig) -> str:
    lines = []
    for name in CONFIG_FIELDS:
        v = getattr(cfg, name)
        lines.append(f"{name} = {v!r}" if isinstance(v, float) else f"{name} = {v}")
    return "\n".join(lines) + "\n"


def apply_overrides(cfg: RunConfig, overrides: dict) -> RunConfig:
    cfg = dataclasses.replace(cfg)
    for key, value in overrides.items():
        if key not in CONFIG_FIELDS:
            raise ConfigError(f"unknown key {key!r}")
        if value is not None:
            setattr(cfg, key, _coerce(key, value))
    return cfg
