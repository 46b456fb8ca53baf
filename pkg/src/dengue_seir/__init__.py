"""Seasonal SEIR dengue model: ODE fitting, CTMC outbreaks, reproduction numbers."""
from .diagnostics import effective_sample_size, gelman_rubin, posterior_predictive, summarize
from .inference import CaseSeries, MCMCConfig, PosteriorChains, run_mh
from .kernels import BACKEND
from .model import (IntegrationError, ModelParams, ParameterError, SeirState, Trajectory,
                    initial_state, integrate, mean_transmission_rate, transmission_rate)
from .reproduction import BracketError, FloquetResult, basic_r0, seasonal_r0
from .stochastic import EnsembleSummary, outbreak_probability, simulate_path

__all__ = [
    "BACKEND", "BracketError", "CaseSeries", "EnsembleSummary", "FloquetResult",
    "IntegrationError", "MCMCConfig", "ModelParams", "ParameterError", "PosteriorChains",
    "SeirState", "Trajectory", "basic_r0", "effective_sample_size", "gelman_rubin",
    "initial_state", "integrate", "mean_transmission_rate", "outbreak_probability",
    "posterior_predictive", "run_mh", "seasonal_r0", "simulate_path", "summarize",
    "transmission_rate",
]
__version__ = "0.1.0"
