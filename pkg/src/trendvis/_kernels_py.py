"""Pure-numpy kernels. Same surface as the compiled ``_kernels`` module.

``hist`` arguments are float64 matrices of shape (n_topics, r_cap) whose
column ``j`` counts minutes at rank ``j + 1``.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"


def rank_weights(d: float, r_cap: int) -> np.ndarray:
    return np.array([math.pow(r, -d) for r in range(1, r_cap + 1)])


def visibility_matrix(hist: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """V for every (grid point, topic); shape (len(grid), n_topics)."""
    hist = np.ascontiguousarray(hist, dtype=np.float64)
    out = np.empty((len(grid), hist.shape[0]))
    for k, d in enumerate(grid):
        # elementwise product then row sum: per-row summation order does not
        # depend on how many rows are present
        out[k] = (hist * rank_weights(float(d), hist.shape[1])).sum(axis=1)
    return out


def loglog_sweep(hist: np.ndarray, y: np.ndarray, grid: np.ndarray):
    """Per grid point: mean of x, Sxx, Sxy and max(x) - min(x), with x = log10 V."""
    hist = np.ascontiguousarray(hist, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    dy = y - y.sum() / y.size
    m = len(grid)
    xbar, sxx, sxy, xspan = np.empty(m), np.empty(m), np.empty(m), np.empty(m)
    for k, d in enumerate(grid):
        x = np.log10((hist * rank_weights(float(d), hist.shape[1])).sum(axis=1))
        xbar[k] = x.sum() / x.size
        dx = x - xbar[k]
        sxx[k] = (dx * dx).sum()
        sxy[k] = (dx * dy).sum()
        xspan[k] = x.max() - x.min()
    return xbar, sxx, sxy, xspan
