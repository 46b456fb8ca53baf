"""Basic and seasonal reproduction numbers.

``basic_r0`` is the spectral radius of the next-generation matrix F V^-1
for a constant transmission rate. ``seasonal_r0`` finds the scale ``lam``
at which the dominant Floquet multiplier of

    X' = [F(t)/lam - V] X,   X(0) = I

over one period equals one; that ``lam`` is the seasonal threshold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .model import ModelParams, ParameterError, mean_transmission_rate, transmission_rate


class BracketError(RuntimeError):
    """The Floquet radius does not cross one inside the search bracket."""

    def __init__(self, lo, hi, rho_lo, rho_hi):
        self.lo, self.hi = lo, hi
        self.rho_lo, self.rho_hi = rho_lo, rho_hi
        super().__init__(
            f"no crossing of rho=1 in [{lo}, {hi}]: "
            f"rho({lo})={rho_lo:.6g}, rho({hi})={rho_hi:.6g}")


@dataclass
class LinearizedSystem:
    """Infected-subsystem linearisation around the disease-free state."""

    params: ModelParams

    def F(self, t: float) -> np.ndarray:
        return np.array([[0.0, transmission_rate(self.params, t)], [0.0, 0.0]])

    @property
    def V(self) -> np.ndarray:
        p = self.params
        return np.array([[p.delta + p.mu, 0.0], [-p.delta, p.gamma + p.mu]])

    @property
    def omega(self) -> float:
        return self.params.omega


@dataclass
class FloquetResult:
    r0: float
    rho: float
    iterations: int
    history: list = field(default_factory=list)

    def __float__(self):
        return self.r0


def basic_r0(beta_bar: float, delta: float, gamma: float, mu: float) -> float:
    """R0 = beta_bar * delta / ((delta + mu) * (gamma + mu))."""
    if not delta > 0 or not gamma > 0:
        raise ParameterError("delta and gamma must be > 0")
    if mu < 0 or beta_bar < 0:
        raise ParameterError("beta_bar and mu must be >= 0")
    return beta_bar * delta / ((delta + mu) * (gamma + mu))


def basic_r0_for(p: ModelParams) -> float:
    """R0 of the period-averaged transmission rate."""
    return basic_r0(mean_transmission_rate(p), p.delta, p.gamma, p.mu)


def log_monodromy_radius(sys, lam: float, h: float = 0.05) -> float:
    params = sys.params if isinstance(sys, LinearizedSystem) else sys
    if not lam > 0:
        raise ParameterError(f"lambda must be > 0, got {lam}")
    return kernels.log_monodromy_radius(kernels.pack(params), float(lam), float(h))


def monodromy_spectral_radius(sys, lam: float, h: float = 0.05) -> float:
    """Dominant Floquet multiplier of the lambda-scaled system after one period.

    The kernel renormalises the fundamental matrix as it grows, so the log
    radius stays finite; the exponential here can still overflow to ``inf``
    for very small ``lam``.
    """
    with np.errstate(over="ignore"):
        return float(np.exp(log_monodromy_radius(sys, lam, h)))


def seasonal_r0(p: ModelParams, h: float = 0.05, lo: float = 1e-3, hi: float = 50.0,
                tol: float = 1e-6, xtol: float = 1e-10,
                max_iter: int = 200) -> FloquetResult:
    """Bisect on lambda until ``|rho(X(omega, lam)) - 1| < tol``.

    The radius is strictly decreasing in lambda, so the bracket always
    closes on the single crossing. Near R0 = 1 the radius is flat in
    lambda, so the bracket must also be narrower than ``xtol`` before
    stopping; otherwise ``tol`` alone leaves lambda loose to ~1e-5.
    """
    sys = LinearizedSystem(p)
    if p.beta_max == 0.0:
        # no new infections at any lambda: the threshold is zero
        rho = math.exp(log_monodromy_radius(sys, 1.0, h))
        return FloquetResult(r0=0.0, rho=rho, iterations=0)
    g_lo = log_monodromy_radius(sys, lo, h)
    g_hi = log_monodromy_radius(sys, hi, h)
    if not (g_lo > 0 > g_hi):
        raise BracketError(lo, hi, math.exp(min(g_lo, 700.0)), math.exp(g_hi))
    history = []
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        g = log_monodromy_radius(sys, mid, h)
        rho = math.exp(g)
        history.append((lo, hi, mid, rho))
        if abs(rho - 1.0) < tol and hi - lo < xtol:
            return FloquetResult(r0=mid, rho=rho, iterations=it, history=history)
        if g > 0:
            lo = mid
        else:
            hi = mid
    raise RuntimeError(f"bisection did not reach |rho-1| < {tol} in {max_iter} steps")


def r0_heatmap(p: ModelParams, axis1: tuple, axis2: tuple, h: float = 0.05,
               workers: int = 1) -> np.ndarray:
    """Seasonal R0 over a grid of two parameters.

    ``axis1`` and ``axis2`` are ``(name, values)`` pairs; row ``i`` of the
    result corresponds to ``axis1`` value ``i``.
    """
    from .grid import evaluate_grid
    return evaluate_grid(_r0_cell, p, axis1, axis2, workers=workers, h=h)


def _r0_cell(p: ModelParams, i: int, j: int, h: float) -> float:
    return seasonal_r0(p, h=h).r0
