"""Independent re-implementation of the discrimination sweep, for testing.

Shares no computation with :mod:`trendvis.visibility` or
:mod:`trendvis.regression`: visibility is summed observation by observation
as ``exp(-d * ln r)`` (no histogram, no ``pow``), and each line is fitted with the textbook
two-pass formulas, residuals included.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DegenerateVariance, EmptyGrid, InvalidGrid, TooFewPoints
from .model import Dataset
from .regression import Boundary, SweepResult


def oracle_sweep(ds: Dataset, grid) -> SweepResult:
    grid = [float(d) for d in grid]
    if not grid:
        raise EmptyGrid("discrimination grid is empty")
    if len(grid) < 2 or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 0:
        raise InvalidGrid("grid must hold >= 2 ascending non-negative points")

    topics = [
        t
        for t in sorted(ds.trajectories)
        if t in ds.meta and ds.meta[t].n_reads > 0 and len(ds.trajectories[t].ranks) > 0
    ]
    n = len(topics)
    if n < 3:
        raise TooFewPoints(f"need at least 3 regressable topics, got {n}")
    ranks = np.concatenate([ds.trajectories[t].ranks for t in topics]).astype(np.float64)
    log_ranks = np.log(ranks)
    owner = np.repeat(np.arange(n), [len(ds.trajectories[t].ranks) for t in topics])
    y = np.array([math.log10(ds.meta[t].n_reads) for t in topics])
    y_mean = y.mean()
    ss_tot = float(np.sum((y - y_mean) ** 2))
    if np.all(y == y[0]):
        raise DegenerateVariance("all log10(reads) values are equal")

    curve = []
    for d in grid:
        v = np.bincount(owner, weights=np.exp(-d * log_ranks), minlength=n)
        x = np.log10(v)
        if np.all(x == x[0]):
            raise DegenerateVariance(f"at d={d:g}: all log10(visibility) values are equal")
        x_mean = x.mean()
        slope = np.sum((x - x_mean) * (y - y_mean)) / np.sum((x - x_mean) ** 2)
        intercept = y_mean - slope * x_mean
        resid = y - (intercept + slope * x)
        curve.append((d, float(1.0 - np.sum(resid**2) / ss_tot)))

    best = max(range(len(grid)), key=lambda i: (curve[i][1], -i))
    if best == 0:
        boundary = Boundary.AT_LOWER_EDGE
    elif best == len(grid) - 1:
        boundary = Boundary.AT_UPPER_EDGE
    else:
        boundary = Boundary.INTERIOR
    return SweepResult(curve, grid[best], curve[best][1], boundary, n)
