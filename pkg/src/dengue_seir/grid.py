"""Two-parameter sweeps shared by the R0 and outbreak heatmaps."""
from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np

from .model import ModelParams


class GridConfigError(ValueError):
    pass


SWEEPABLE = tuple(f.name for f in dataclasses.fields(ModelParams))


def parse_axis(spec: str, n: int) -> tuple[str, np.ndarray]:
    """Parse ``name:lo:hi`` into ``(name, linspace(lo, hi, n))``."""
    try:
        name, lo, hi = spec.split(":")
        lo, hi = float(lo), float(hi)
    except ValueError:
        raise GridConfigError(f"axis spec {spec!r} is not name:lo:hi") from None
    check_axis_name(name)
    return name, np.linspace(lo, hi, n)


def check_axis_name(name: str) -> None:
    if name not in SWEEPABLE:
        raise GridConfigError(f"unknown parameter axis {name!r}; choose from {SWEEPABLE}")


def _cell(fn, base, name1, name2, kwargs, task):
    i, j, v1, v2 = task
    p = base.replace(**{name1: float(v1), name2: float(v2)})
    return fn(p, i, j, **kwargs)


def evaluate_grid(fn, base: ModelParams, axis1, axis2, workers: int = 1, **kwargs) -> np.ndarray:
    """Evaluate ``fn(params, i, j, **kwargs)`` on every grid cell.

    Cells are assembled by index, so the result does not depend on
    ``workers``.
    """
    name1, vals1 = axis1
    name2, vals2 = axis2
    check_axis_name(name1)
    check_axis_name(name2)
    if name1 == name2:
        raise GridConfigError(f"both axes name {name1!r}")
    vals1 = np.asarray(vals1, dtype=float)
    vals2 = np.asarray(vals2, dtype=float)
    tasks = [(i, j, v1, v2) for i, v1 in enumerate(vals1) for j, v2 in enumerate(vals2)]
    job = partial(_cell, fn, base, name1, name2, kwargs)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            flat = list(pool.map(job, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        flat = [job(t) for t in tasks]
    return np.array(flat, dtype=float).reshape(len(vals1), len(vals2))
