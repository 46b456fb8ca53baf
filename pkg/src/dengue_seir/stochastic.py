"""Time-nonhomogeneous CTMC version of the SEIR model.

Eight events (births, deaths in each class, infection, progression,
recovery) fire at the rates of the deterministic model. Only infection
depends on time; it is simulated exactly by thinning against the bound
``beta_max * I * S / N``, where ``beta_max = beta_np + A_beta + beta_p``.

Sample paths stop when ``E + I`` hits 0 (extinction), reaches the outbreak
level ``OL`` (outbreak), or time reaches ``t_max`` (censored).
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .model import ModelParams, ParameterError, transmission_rate

OUTCOME_NAMES = {kernels.EXTINCT: "extinct", kernels.OUTBREAK: "outbreak",
                 kernels.CENSORED: "censored"}

# (S, E, I, R) change per event, in rate-table order
EVENT_DELTAS = np.array([
    (+1, 0, 0, 0),   # birth, mu*N
    (-1, 0, 0, 0),   # susceptible death, mu*S
    (0, 0, 0, -1),   # recovered death, mu*R
    (-1, +1, 0, 0),  # infection, beta(t)*I*S/N
    (0, -1, 0, 0),   # exposed death, mu*E
    (0, -1, +1, 0),  # progression, delta*E
    (0, 0, -1, 0),   # infected death, mu*I
    (0, 0, -1, +1),  # recovery, gamma*I
])

DEFAULT_CTMC_N = 1_000_000


def event_rates(p: ModelParams, state, t: float) -> np.ndarray:
    """The eight transition rates at integer ``state`` = (S, E, I, R)."""
    S, E, I, R = state
    return np.array([
        p.mu * p.N, p.mu * S, p.mu * R,
        transmission_rate(p, t) * I * S / p.N,
        p.mu * E, p.delta * E, p.mu * I, p.gamma * I,
    ])


@dataclass
class PathOutcome:
    outcome: str
    t_end: float
    events: int
    log: list | None = None


@dataclass
class EnsembleSummary:
    n: int
    n_ext: int
    n_outbreak: int
    n_censored: int
    outcomes: list = field(default_factory=list, repr=False)

    @property
    def p_ext(self) -> float:
        return self.n_ext / self.n

    @property
    def p_outbreak(self) -> float:
        return 1.0 - self.p_ext

    @property
    def censored_fraction(self) -> float:
        return self.n_censored / self.n

    @property
    def std_error(self) -> float:
        """Binomial standard error of the outbreak probability."""
        pr = self.p_outbreak
        return math.sqrt(pr * (1.0 - pr) / self.n)

    def merge(self, other: "EnsembleSummary") -> "EnsembleSummary":
        return EnsembleSummary(
            n=self.n + other.n, n_ext=self.n_ext + other.n_ext,
            n_outbreak=self.n_outbreak + other.n_outbreak,
            n_censored=self.n_censored + other.n_censored,
            outcomes=self.outcomes + other.outcomes)


def default_init(p: ModelParams) -> tuple:
    """One infective in an otherwise susceptible population."""
    n = int(round(p.N))
    return (n - 1, 0, 1, 0)


def path_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for path ``index`` under master ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def simulate_path(p: ModelParams, init=None, t0: float = 0.0, ol: int = 100,
                  t_max: float | None = None, rng=None, record: bool = False) -> PathOutcome:
    """Simulate one sample path from ``init`` at time ``t0``.

    ``t_max`` is an absolute time and defaults to ``t0 + 5 * omega``.
    """
    init = default_init(p) if init is None else tuple(int(v) for v in init)
    if any(v < 0 for v in init):
        raise ParameterError("initial state must be non-negative")
    if ol <= init[1] + init[2]:
        raise ParameterError(f"outbreak level {ol} must exceed initial E+I={init[1] + init[2]}")
    if t_max is None:
        t_max = t0 + 5.0 * p.omega
    if not t_max > t0:
        raise ParameterError("t_max must exceed t0")
    if rng is None:
        rng = np.random.default_rng()
    code, t_end, events, log = kernels.ctmc_path(
        kernels.pack(p), *init, float(t0), int(ol), float(t_max), rng, record)
    return PathOutcome(OUTCOME_NAMES[code], t_end, events, log)


def _run_block(args):
    p, init, t0, ol, t_max, seed, start, stop = args
    rows = []
    for i in range(start, stop):
        res = simulate_path(p, init, t0, ol, t_max, path_rng(seed, i))
        rows.append((i, res.outcome, res.t_end, res.events))
    return rows


def outbreak_probability(p: ModelParams, init=None, t0: float = 0.0, ol: int = 100,
                         t_max: float | None = None, n: int = 10_000, seed: int = 0,
                         workers: int = 1) -> EnsembleSummary:
    """Monte Carlo outbreak and extinction probabilities from ``n`` paths.

    Path ``i`` draws from its own stream derived from ``(seed, i)``, so the
    tallies do not depend on ``workers``.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    init = default_init(p) if init is None else tuple(int(v) for v in init)
    if init[1] + init[2] == 0:
        # absorbing start; no randomness needed
        rows = [(i, "extinct", float(t0), 0) for i in range(n)]
    else:
        if ol <= init[1] + init[2]:
            raise ParameterError(f"outbreak level {ol} must exceed initial E+I")
        blocks = _blocks(n, workers)
        jobs = [(p, init, t0, ol, t_max, seed, a, b) for a, b in blocks]
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(_run_block, jobs))
        else:
            parts = [_run_block(j) for j in jobs]
        rows = [r for part in parts for r in part]
    counts = {"extinct": 0, "outbreak": 0, "censored": 0}
    for _, outcome, _, _ in rows:
        counts[outcome] += 1
    return EnsembleSummary(n=n, n_ext=counts["extinct"], n_outbreak=counts["outbreak"],
                           n_censored=counts["censored"], outcomes=rows)


def _blocks(n, workers):
    k = max(1, min(n, 4 * workers))
    edges = np.linspace(0, n, k + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def outbreak_probability_grid(p: ModelParams, axis1, axis2, n: int = 1000, ol: int = 100,
                              t0: float = 0.0, t_max: float | None = None, seed: int = 0,
                              workers: int = 1) -> np.ndarray:
    """Outbreak probability on a grid over two parameters.

    Each cell ``(i, j)`` runs ``n`` paths under a sub-seed derived from
    ``SeedSequence(seed, spawn_key=(i, j))``.
    """
    from .grid import evaluate_grid
    return evaluate_grid(_outbreak_cell, p, axis1, axis2, workers=workers,
                         n=n, ol=ol, t0=t0, t_max=t_max, seed=seed)


def _outbreak_cell(p, i, j, n, ol, t0, t_max, seed):
    cell_seed = int(np.random.SeedSequence(seed, spawn_key=(i, j)).generate_state(1, np.uint64)[0])
    return outbreak_probability(p, t0=t0, ol=ol, t_max=t_max, n=n, seed=cell_seed).p_outbreak
