"""Log-log regression of read counts on visibility and the discrimination sweep.

At each discrimination level ``d`` the regressable topics give points
``x = log10 V(d)``, ``y = log10 N_reads``; an ordinary least-squares line is
fitted and its coefficient of determination recorded. The sweep reports the
``d`` with the largest R^2 and flags maxima that sit on a grid edge.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._backend import kernels
from .errors import DegenerateVariance, TooFewPoints
from .model import Dataset, Diagnostic, TopicId
from .visibility import check_discrimination, check_grid, make_grid, visibility

MIN_FIT_POINTS = 3
DEFAULT_MIN_TOPICS = 30


class Boundary(str, Enum):
    INTERIOR = "interior"
    AT_LOWER_EDGE = "at_lower_edge"
    AT_UPPER_EDGE = "at_upper_edge"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r2: float
    n: int


@dataclass(frozen=True)
class SweepResult:
    curve: list[tuple[float, float]]
    d_max: float
    r2_max: float
    boundary: Boundary
    n: int
    fits: tuple[FitResult, ...] = field(default=(), repr=False, compare=False)
    refined: tuple[float, float] | None = None

    def fit_at(self, d: float) -> FitResult:
        for (gd, _), fit in zip(self.curve, self.fits):
            if gd == d:
                return fit
        raise KeyError(d)


@dataclass(frozen=True)
class CategoryReport:
    category: str
    r2_max: float
    d_max: float
    n_topics: int
    boundary: Boundary


@dataclass(frozen=True)
class CategoryAnalysis:
    reports: list[CategoryReport]
    skipped: list[tuple[str, int, str]]  # (category, n_topics, reason)


def _finish_fit(xbar, ybar, sxx, sxy, syy, n, x_const, y_const) -> FitResult:
    if y_const:
        raise DegenerateVariance("all log10(reads) values are equal")
    if x_const:
        raise DegenerateVariance("all log10(visibility) values are equal")
    slope = sxy / sxx
    return FitResult(slope, ybar - slope * xbar, (sxy * sxy) / (sxx * syy), n)


def _centered_y(y: np.ndarray) -> tuple[float, float]:
    ybar = float(y.sum() / y.size)
    dy = y - ybar
    return ybar, float((dy * dy).sum())


def _log10_reads(reads: Sequence[int]) -> np.ndarray:
    # math.log10 accepts arbitrarily large ints without overflow
    return np.array([math.log10(r) for r in reads], dtype=np.float64)


def ols_loglog(points: Iterable[tuple[float, int]]) -> FitResult:
    """Least-squares line through ``(log10 v, log10 reads)``.

    All ``v`` and ``reads`` must be positive; use
    :func:`filter_regression_points` to drop the others first.
    """
    pts = list(points)
    if len(pts) < MIN_FIT_POINTS:
        raise TooFewPoints(f"need at least {MIN_FIT_POINTS} points, got {len(pts)}")
    if any(not (v > 0 and r > 0) for v, r in pts):
        raise ValueError("visibility and reads must be positive")
    x = np.log10(np.array([v for v, _ in pts], dtype=np.float64))
    y = _log10_reads([r for _, r in pts])
    ybar, syy = _centered_y(y)
    xbar = float(x.sum() / x.size)
    dx = x - xbar
    sxx = float((dx * dx).sum())
    sxy = float((dx * (y - ybar)).sum())
    return _finish_fit(xbar, ybar, sxx, sxy, syy, len(pts), x.min() == x.max(), y.min() == y.max())


def _regressable(ds: Dataset) -> tuple[list[TopicId], list[Diagnostic]]:
    """Topics that can enter the fit, sorted by id, plus exclusion diagnostics.

    Every term of V is positive, so V(d) > 0 iff the trajectory is non-empty
    and the set does not depend on ``d``.
    """
    keep: list[TopicId] = []
    excluded: list[Diagnostic] = []
    for topic in sorted(ds.trajectories):
        meta = ds.meta.get(topic)
        if meta is None:
            excluded.append(Diagnostic("no-meta", "trajectory has no metadata", topic))
        elif meta.n_reads == 0:
            excluded.append(Diagnostic("zero-reads", "log10 of zero reads is undefined", topic))
        elif len(ds.trajectories[topic]) == 0:
            excluded.append(Diagnostic("zero-visibility", "empty trajectory", topic))
        else:
            keep.append(topic)
    for topic in sorted(set(ds.meta) - set(ds.trajectories)):
        excluded.append(Diagnostic("no-trajectory", "metadata has no trajectory", topic))
    return keep, excluded


def filter_regression_points(ds: Dataset, d: float) -> tuple[list[tuple[float, int]], list[Diagnostic]]:
    """Join trajectories with metadata at level ``d``.

    Returns ``(points, exclusions)`` where ``points`` holds ``(V(d), n_reads)``
    per kept topic in topic-id order.
    """
    d = check_discrimination(d)
    topics, excluded = _regressable(ds)
    points = [(visibility(ds.trajectories[t], d), ds.meta[t].n_reads) for t in topics]
    return points, excluded


def _design(ds: Dataset) -> tuple[list[TopicId], np.ndarray, np.ndarray]:
    topics, _ = _regressable(ds)
    if len(topics) < MIN_FIT_POINTS:
        raise TooFewPoints(f"need at least {MIN_FIT_POINTS} regressable topics, got {len(topics)}")
    hist = np.empty((len(topics), ds.r_cap), dtype=np.float64)
    for i, t in enumerate(topics):
        hist[i] = ds.trajectories[t].hist[1:]
    y = _log10_reads([ds.meta[t].n_reads for t in topics])
    return topics, hist, y


def _fits_on_grid(hist: np.ndarray, y: np.ndarray, g: np.ndarray) -> list[FitResult]:
    ybar, syy = _centered_y(y)
    y_const = bool(y.min() == y.max())
    xbar, sxx, sxy, xspan = kernels.loglog_sweep(hist, y, g)
    fits = []
    for k, d in enumerate(g):
        try:
            fits.append(
                _finish_fit(xbar[k], ybar, sxx[k], sxy[k], syy, len(y), xspan[k] == 0, y_const)
            )
        except DegenerateVariance as exc:
            raise DegenerateVariance(f"at d={d:g}: {exc}") from None
    return fits


def sweep_dmax(
    ds: Dataset,
    grid: Sequence[float] | None = None,
    *,
    refine: bool = False,
    refine_tol: float = 1e-6,
) -> SweepResult:
    """Fit at every grid point and locate the R^2 maximum.

    Ties go to the smallest ``d``. ``boundary`` records whether the argmax
    is the first or last grid point, i.e. no interior maximum was found.
    With ``refine=True`` a golden-section search around the argmax is stored
    in ``refined``; ``d_max`` itself stays a grid value.
    """
    g = check_grid(make_grid() if grid is None else grid, min_points=2)
    _, hist, y = _design(ds)
    fits = _fits_on_grid(hist, y, g)
    r2 = np.array([f.r2 for f in fits])
    k = int(np.argmax(r2))
    if k == 0:
        boundary = Boundary.AT_LOWER_EDGE
    elif k == len(g) - 1:
        boundary = Boundary.AT_UPPER_EDGE
    else:
        boundary = Boundary.INTERIOR
    refined = None
    if refine:
        lo, hi = float(g[max(k - 1, 0)]), float(g[min(k + 1, len(g) - 1)])
        refined = golden_section_max(
            lambda d: _fits_on_grid(hist, y, np.array([d]))[0].r2, lo, hi, refine_tol
        )
    return SweepResult(
        curve=[(float(d), float(v)) for d, v in zip(g, r2)],
        d_max=float(g[k]),
        r2_max=float(r2[k]),
        boundary=boundary,
        n=len(y),
        fits=tuple(fits),
        refined=refined,
    )


_INV_PHI = (math.sqrt(5) - 1) / 2


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-6, max_iter: int = 200) -> tuple[float, float]:
    """Maximise a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``.

    The bracket endpoints are also compared so a monotone ``f`` returns
    its better edge.
    """
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    e = a + _INV_PHI * (b - a)
    fc, fe = f(c), f(e)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fe:
            b, e, fe = e, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + _INV_PHI * (b - a)
            fe = f(e)
    best = max([(fc, c), (fe, e), (f(lo), lo), (f(hi), hi)], key=lambda p: p[0])
    return best[1], best[0]


def per_category_sweep(
    ds: Dataset,
    grid: Sequence[float] | None = None,
    min_topics: int = DEFAULT_MIN_TOPICS,
) -> CategoryAnalysis:
    """Run :func:`sweep_dmax` separately for each metadata category.

    Categories with fewer than ``min_topics`` regressable topics, or whose
    fit is degenerate, are listed in ``skipped``. Reports are ordered by
    ``d_max`` then label.
    """
    if min_topics < MIN_FIT_POINTS:
        raise ValueError(f"min_topics must be >= {MIN_FIT_POINTS}")
    topics, _ = _regressable(ds)
    groups: dict[str, list[TopicId]] = {}
    for t in topics:
        groups.setdefault(ds.meta[t].category, []).append(t)
    reports: list[CategoryReport] = []
    skipped: list[tuple[str, int, str]] = []
    for label in sorted(groups):
        members = groups[label]
        if len(members) < min_topics:
            skipped.append((label, len(members), f"fewer than {min_topics} topics"))
            continue
        try:
            res = sweep_dmax(ds.restrict(members), grid)
        except DegenerateVariance as exc:
            skipped.append((label, len(members), str(exc)))
            continue
        reports.append(CategoryReport(label, res.r2_max, res.d_max, res.n, res.boundary))
    reports.sort(key=lambda r: (r.d_max, r.category))
    return CategoryAnalysis(reports, skipped)


def restrict_to_category(ds: Dataset, category: str) -> Dataset:
    return ds.restrict(t for t, m in ds.meta.items() if m.category == category)
