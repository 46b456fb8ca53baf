"""Backend selection for the numerical kernels.

The compiled ``_kernels`` extension is used when it imports; otherwise the
pure-Python ``_fallback`` module provides the same functions. Setting
``DENGUE_SEIR_PURE=1`` in the environment forces the fallback.
"""
import os

import numpy as np

from . import _fallback

if os.environ.get("DENGUE_SEIR_PURE"):
    _impl = _fallback
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _fallback

BACKEND = "compiled" if _impl is not _fallback else "python"

EXTINCT = _fallback.EXTINCT
OUTBREAK = _fallback.OUTBREAK
CENSORED = _fallback.CENSORED

beta_value = _impl.beta_value
seir_rk4 = _impl.seir_rk4
log_monodromy_radius = _impl.log_monodromy_radius
ctmc_path = _impl.ctmc_path


def pack(p):
    """Flatten a ModelParams into the kernel parameter vector."""
    return np.array(
        [p.beta_np, p.A_beta, p.beta_p, p.t_p, p.sigma, p.omega,
         p.delta, p.gamma, p.mu, p.N],
        dtype=np.float64,
    )


def backends():
    """Return ``{name: module}`` for every importable backend."""
    found = {"python": _fallback}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        found["compiled"] = _kernels
    return found
