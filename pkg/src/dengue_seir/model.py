"""Deterministic seasonal SEIR model.

The transmission rate is a baseline plus a Gaussian bump centred on the
peak day and a logistic step that decays one width after the peak::

    beta(t) = beta_np + A_beta * exp(-(t - t_p)**2 / (2 sigma**2))
              + beta_p / (1 + exp((t - t_p - sigma) / sigma))

Dynamics use ``t mod omega`` so the rate is periodic; recruitment is
``mu * N`` so the total population is conserved.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from . import kernels


class ParameterError(ValueError):
    """A parameter lies outside its domain."""


class IntegrationError(RuntimeError):
    """A compartment went negative beyond round-off during integration."""


OBSERVABLES = ("incidence", "prevalence")


@dataclass(frozen=True)
class ModelParams:
    """Epidemiological and seasonality constants.

    Defaults are the posterior means and fixed rates used for the
    Bangladesh 2023 fit. Rates are per day, ``t_p`` and ``sigma`` in days.
    """

    beta_np: float = 0.0567
    A_beta: float = 0.047
    beta_p: float = 0.085
    t_p: float = 190.72
    sigma: float = 61.817
    delta: float = 0.25
    gamma: float = 0.125
    mu: float = 0.0000380
    N: float = 171_000_000.0
    omega: float = 365.0

    def __post_init__(self):
        for name in ("beta_np", "A_beta", "beta_p", "delta", "gamma", "mu"):
            v = getattr(self, name)
            if not (v >= 0.0 and math.isfinite(v)):
                raise ParameterError(f"{name} must be a finite rate >= 0, got {v}")
        if not self.N >= 1:
            raise ParameterError(f"N must be >= 1, got {self.N}")
        if not self.omega > 0:
            raise ParameterError(f"omega must be > 0, got {self.omega}")
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be > 0, got {self.sigma}")
        if not 0 <= self.t_p < self.omega:
            raise ParameterError(f"t_p must lie in [0, omega), got {self.t_p}")

    @property
    def recruitment(self) -> float:
        """Birth rate Lambda = mu * N."""
        return self.mu * self.N

    @property
    def beta_max(self) -> float:
        """Upper bound of the transmission rate over all t."""
        return self.beta_np + self.A_beta + self.beta_p

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class SeirState:
    S: float
    E: float
    I: float
    R: float
    t: float = 0.0

    def __post_init__(self):
        for name in ("S", "E", "I", "R"):
            if getattr(self, name) < 0:
                raise ParameterError(f"compartment {name} is negative")

    @property
    def total(self) -> float:
        return self.S + self.E + self.I + self.R

    def as_array(self) -> np.ndarray:
        return np.array([self.S, self.E, self.I, self.R], dtype=np.float64)


@dataclass
class Trajectory:
    """Daily samples of an ODE run.

    ``states`` has one row of (S, E, I, R) per entry of ``t``; ``y`` is the
    observable series compared against case counts.
    """

    t: np.ndarray
    states: np.ndarray
    y: np.ndarray
    observable: str = "incidence"
    meta: dict = field(default_factory=dict)

    @property
    def S(self):
        return self.states[:, 0]

    @property
    def E(self):
        return self.states[:, 1]

    @property
    def I(self):
        return self.states[:, 2]

    @property
    def R(self):
        return self.states[:, 3]


def transmission_rate(p: ModelParams, t):
    """Seasonal transmission rate at time ``t`` (days), wrapped to one period.

    Accepts a scalar or an array of times.
    """
    t = np.asarray(t, dtype=np.float64)
    tw = np.mod(t, p.omega)
    out = _beta_unwrapped(p, tw)
    return float(out) if out.ndim == 0 else out


def _beta_unwrapped(p: ModelParams, t):
    z = t - p.t_p
    gauss = p.A_beta * np.exp(-(z * z) / (2.0 * p.sigma * p.sigma))
    logistic = p.beta_p / (1.0 + np.exp((z - p.sigma) / p.sigma))
    return p.beta_np + gauss + logistic


def mean_transmission_rate(p: ModelParams, step: float = 0.25) -> float:
    """Period average of the transmission rate by composite Simpson.

    The closed-form rate is averaged over ``[0, omega]`` without wrapping;
    on that interval the wrapped and unwrapped forms coincide.
    """
    n = int(math.ceil(p.omega / step))
    if n % 2:
        n += 1
    t = np.linspace(0.0, p.omega, n + 1)
    return float(simpson(_beta_unwrapped(p, t), x=t) / p.omega)


def ode_rhs(p: ModelParams, state, t: float) -> np.ndarray:
    """Right-hand side of the SEIR system at ``state`` = (S, E, I, R)."""
    if isinstance(state, SeirState):
        S, E, I, R = state.S, state.E, state.I, state.R
    else:
        S, E, I, R = (float(v) for v in state)
    b = transmission_rate(p, t)
    force = b * I * S / p.N
    return np.array([
        p.recruitment - force - p.mu * S,
        force - (p.delta + p.mu) * E,
        p.delta * E - (p.gamma + p.mu) * I,
        p.gamma * I - p.mu * R,
    ])


def observe(p: ModelParams, states: np.ndarray, observable: str = "incidence") -> np.ndarray:
    """Map compartment rows to the observed series (delta*E or I)."""
    if observable == "incidence":
        return p.delta * states[:, 1]
    if observable == "prevalence":
        return states[:, 2].copy()
    raise ValueError(f"unknown observable {observable!r}; expected one of {OBSERVABLES}")


def integrate(p: ModelParams, init: SeirState, t_end: float, h: float = 0.1,
              observable: str = "incidence") -> Trajectory:
    """Integrate the SEIR system with fixed-step RK4, sampling every day.

    ``1/h`` must be a whole number of steps and ``t_end - init.t`` a whole
    number of days.

    Raises
    ------
    IntegrationError
        If any compartment drops below ``-1e-9 * N``.
    """
    if not h > 0:
        raise ParameterError(f"step h must be > 0, got {h}")
    steps_per_day = int(round(1.0 / h))
    if steps_per_day < 1 or abs(steps_per_day * h - 1.0) > 1e-9:
        raise ParameterError(f"step h={h} does not divide one day")
    n_days = int(round(t_end - init.t))
    if n_days < 1 or abs(n_days - (t_end - init.t)) > 1e-9:
        raise ParameterError("t_end - init.t must be a positive whole number of days")
    if observable not in OBSERVABLES:
        raise ValueError(f"unknown observable {observable!r}")
    states, fail = kernels.seir_rk4(kernels.pack(p), init.as_array(), float(init.t),
                                    n_days, steps_per_day)
    if fail >= 0:
        raise IntegrationError(
            f"negative compartment at t={init.t + fail * h:.3f} (step {fail})")
    t = init.t + np.arange(n_days + 1, dtype=np.float64)
    return Trajectory(t=t, states=states, y=observe(p, states, observable),
                      observable=observable)


def initial_state(p: ModelParams, first_count: float, observable: str = "incidence",
                  t0: float = 0.0) -> SeirState:
    """Initial condition seeded from the first observed daily count.

    The exposed class is put at its quasi-equilibrium ratio to the
    infectious class, ``E = (gamma + mu) / delta * I``.
    """
    first_count = max(float(first_count), 0.0)
    if not p.delta > 0:
        raise ParameterError("delta must be > 0 to seed the exposed class")
    if observable == "incidence":
        E = first_count / p.delta
        I = p.delta * E / (p.gamma + p.mu)
    elif observable == "prevalence":
        I = first_count
        E = (p.gamma + p.mu) / p.delta * I
    else:
        raise ValueError(f"unknown observable {observable!r}")
    S = p.N - E - I
    if S < 0:
        raise ParameterError("initial infections exceed the population")
    return SeirState(S=S, E=E, I=I, R=0.0, t=t0)
