"""Visibility of a rank trajectory at a given discrimination level.

For a trajectory with recorded ranks R_1..R_f,

    V(d) = sum_i R_i ** -d

which is evaluated through the dwell histogram as
``sum_r hist[r] * pow(r, -d)``, so the cost per evaluation is O(r_cap)
whatever the trajectory length. ``pow`` rather than ``exp(-d * ln r)``
keeps powers of two exact (``2 ** -30`` is the large-``d`` error bound). ``d = 0`` counts trending minutes; large
``d`` counts only minutes at rank 1.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import EmptyGrid, InvalidBracket, InvalidDiscrimination, InvalidGrid
from .model import Trajectory

DEFAULT_D_MIN = 0.0
DEFAULT_D_MAX = 3.0
DEFAULT_D_STEP = 0.015


def check_discrimination(d: float) -> float:
    d = float(d)
    if not math.isfinite(d) or d < 0:
        raise InvalidDiscrimination(f"discrimination level must be finite and >= 0, got {d}")
    return d


def make_grid(d_min: float = DEFAULT_D_MIN, d_max: float = DEFAULT_D_MAX, step: float = DEFAULT_D_STEP) -> list[float]:
    """Evenly spaced grid from ``d_min`` up to ``d_max`` inclusive.

    Points are ``d_min + i * step`` rounded to 12 decimals so that decimal
    steps print cleanly; the default grid has 201 points.
    """
    if not (math.isfinite(step) and step > 0):
        raise InvalidGrid(f"grid step must be positive, got {step}")
    check_discrimination(d_min)
    check_discrimination(d_max)
    if d_max < d_min:
        raise InvalidGrid(f"d_max {d_max} below d_min {d_min}")
    n = int(math.floor((d_max - d_min) / step + 1e-9)) + 1
    return [round(d_min + i * step, 12) for i in range(n)]


def check_grid(grid: Sequence[float], *, min_points: int = 1) -> np.ndarray:
    g = np.asarray([check_discrimination(d) for d in grid], dtype=np.float64)
    if g.size == 0:
        raise EmptyGrid("discrimination grid is empty")
    if g.size < min_points:
        raise InvalidGrid(f"grid needs at least {min_points} points, got {g.size}")
    if np.any(np.diff(g) <= 0):
        raise InvalidGrid("grid must be strictly ascending")
    return g


def _hist_row(traj: Trajectory) -> np.ndarray:
    return traj.hist[1:].astype(np.float64)[None, :]


def visibility(traj: Trajectory, d: float) -> float:
    """Accumulated importance of ``traj`` at discrimination level ``d``.

    >>> t = Trajectory.from_pairs("x", [(1, 40), (2, 30), (3, 50)])
    >>> round(visibility(t, 1.0), 4)
    0.0783
    """
    d = check_discrimination(d)
    return float(kernels.visibility_matrix(_hist_row(traj), np.array([d]))[0, 0])


def visibility_profile(traj: Trajectory, grid: Sequence[float]) -> list[tuple[float, float]]:
    g = check_grid(grid)
    values = kernels.visibility_matrix(_hist_row(traj), g)[:, 0]
    return [(float(d), float(v)) for d, v in zip(g, values)]


def visibility_direct(traj: Trajectory, d: float) -> float:
    """Reference evaluation by summing over observations one by one."""
    d = check_discrimination(d)
    return math.fsum(math.exp(-d * math.log(r)) for r in traj.ranks.tolist())


@dataclass(frozen=True)
class ImportanceSeries:
    """Per-minute importance weights ``r ** -d`` of a trajectory."""

    times: np.ndarray
    weights: np.ndarray
    d: float

    @property
    def points(self) -> list[tuple[int, float]]:
        return list(zip(self.times.tolist(), self.weights.tolist()))

    def area(self) -> float:
        return math.fsum(self.weights.tolist())


def importance_transform(traj: Trajectory, d: float) -> ImportanceSeries:
    d = check_discrimination(d)
    w = kernels.rank_weights(d, traj.r_cap)
    return ImportanceSeries(traj.times.copy(), np.asarray(w)[traj.ranks - 1], d)


def rank1_dwell(traj: Trajectory) -> int:
    """Minutes spent at rank 1, the large-``d`` limit of V."""
    return int(traj.hist[1])


def crossover_bracket(
    a: Trajectory, b: Trajectory, d_lo: float, d_hi: float, tol: float = 1e-9
) -> tuple[float, float] | None:
    """Bisect on the sign of V_a - V_b; return a bracket of width <= ``tol``.

    Returns None when the difference has the same sign (or is zero) at both
    ends. With several crossings inside the bracket, one of them is found.
    """
    if not d_lo < d_hi:
        raise InvalidBracket(f"need d_lo < d_hi, got [{d_lo}, {d_hi}]")
    if not tol > 0:
        raise InvalidBracket(f"tolerance must be positive, got {tol}")
    check_discrimination(d_lo)
    check_discrimination(d_hi)

    def diff(d: float) -> float:
        return visibility(a, d) - visibility(b, d)

    f_lo, f_hi = diff(d_lo), diff(d_hi)
    if f_lo == 0 and f_hi == 0:
        return None
    if f_lo == 0:
        return d_lo, d_lo
    if f_hi == 0:
        return d_hi, d_hi
    if (f_lo > 0) == (f_hi > 0):
        return None
    lo, hi = d_lo, d_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = diff(mid)
        if f_mid == 0:
            return mid, mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return lo, hi


def find_crossover(
    a: Trajectory, b: Trajectory, d_lo: float, d_hi: float, tol: float = 1e-9
) -> float | None:
    """Discrimination level where the visibilities of ``a`` and ``b`` cross.

    Midpoint of :func:`crossover_bracket`, or None without a sign change.
    """
    br = crossover_bracket(a, b, d_lo, d_hi, tol)
    if br is None:
        return None
    return 0.5 * (br[0] + br[1])
