import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trendvis.errors import DegenerateVariance, EmptyGrid, InvalidGrid, TooFewPoints
from trendvis.model import Dataset, TopicMeta, Trajectory
from trendvis.regression import (
    Boundary,
    filter_regression_points,
    golden_section_max,
    ols_loglog,
    per_category_sweep,
    restrict_to_category,
    sweep_dmax,
)
from trendvis.synth import CategorySpec, SynthConfig, generate_dataset, oracle_sweep
from trendvis.visibility import make_grid, visibility


def test_exact_collinear():
    pts = [(v, round(10 * v**2)) for v in (1.0, 2.0, 5.0, 10.0)]
    fit = ols_loglog(pts)
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert fit.intercept == pytest.approx(1.0, abs=1e-12)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)
    assert fit.n == 4


def test_constant_reads_degenerate():
    with pytest.raises(DegenerateVariance):
        ols_loglog([(1, 10), (10, 10), (100, 10)])


def test_constant_visibility_degenerate():
    with pytest.raises(DegenerateVariance):
        ols_loglog([(2.0, 1), (2.0, 10), (2.0, 100)])


def test_too_few_points():
    with pytest.raises(TooFewPoints):
        ols_loglog([(1.0, 1), (2.0, 3)])


def test_non_positive_rejected():
    with pytest.raises(ValueError):
        ols_loglog([(0.0, 1), (2.0, 3), (3.0, 4)])


def test_matches_grid_search_minimizer():
    rng = np.random.default_rng(3)
    v = rng.uniform(0.5, 50, 5)
    reads = rng.integers(1, 10_000, 5)
    fit = ols_loglog(zip(v.tolist(), reads.tolist()))
    x, y = np.log10(v), np.log10(reads)
    # brute-force the squared error on a grid centred near the answer
    step = 1e-3
    slopes = np.round(fit.slope, 1) + np.arange(-400, 401) * step
    intercepts = np.round(fit.intercept, 1) + np.arange(-400, 401) * step
    sse = ((y[None, None, :] - slopes[:, None, None] * x[None, None, :] - intercepts[None, :, None]) ** 2).sum(-1)
    i, j = np.unravel_index(np.argmin(sse), sse.shape)
    assert abs(slopes[i] - fit.slope) <= step
    assert abs(intercepts[j] - fit.intercept) <= step
    resid = y - (fit.slope * x + fit.intercept)
    assert fit.r2 == pytest.approx(1 - (resid**2).sum() / ((y - y.mean()) ** 2).sum(), abs=1e-12)


def _ds(specs, r_cap=50):
    """specs: topic -> (pairs, category, reads or None)."""
    trajs = {t: Trajectory.from_pairs(t, pairs, r_cap) for t, (pairs, _, _) in specs.items()}
    meta = {t: TopicMeta(t, cat, reads) for t, (_, cat, reads) in specs.items() if reads is not None}
    return Dataset(trajs, meta, r_cap)


def test_filter_exclusions():
    ds = _ds(
        {
            "a": ([(0, 1)], "x", 5),
            "b": ([(0, 2)], "x", None),
            "c": ([(0, 3)], "x", 0),
            "d": ([], "x", 7),
        }
    )
    pts, excl = filter_regression_points(ds, 1.0)
    assert pts == [(1.0, 5)]
    assert {(e.topic, e.code) for e in excl} == {("b", "no-meta"), ("c", "zero-reads"), ("d", "zero-visibility")}


def test_filter_ten_joined_topics():
    ds = _ds({f"t{i}": ([(0, i + 1)], "x", i + 1) for i in range(10)})
    pts, excl = filter_regression_points(ds, 0.5)
    assert len(pts) == 10 and excl == []


def _synth(**kw):
    return generate_dataset(SynthConfig(**kw))


def test_noiseless_recovery_interior(backend):
    ds = _synth(n_topics=1500, seed=7, d_star=1.2, c=1e6, sigma=0.0)
    grid = make_grid()
    res = sweep_dmax(ds, grid)
    ref = oracle_sweep(ds, grid)
    step = 0.015
    assert abs(res.d_max - ref.d_max) <= step + 1e-12
    assert res.boundary is Boundary.INTERIOR
    assert res.r2_max >= 0.999
    assert dict(res.curve)[1.2] >= 0.999
    assert len(res.curve) == 201 and res.n == 1500


def test_upper_edge_for_large_d_star(backend):
    ds = _synth(n_topics=800, seed=2, d_star=10.0, c=1e20)
    res = sweep_dmax(ds)
    assert res.boundary is Boundary.AT_UPPER_EDGE
    assert res.d_max == 3.0
    r2 = [v for _, v in res.curve]
    assert all(b > a for a, b in zip(r2, r2[1:]))


def test_lower_edge_when_reads_track_dwell():
    # reads proportional to dwell time: d = 0 fits exactly
    specs = {f"t{i}": ([(t, 1 + (t * 7 + i) % 50) for t in range(i + 1)], "x", 10 * (i + 1)) for i in range(20)}
    res = sweep_dmax(_ds(specs))
    assert res.boundary is Boundary.AT_LOWER_EDGE and res.d_max == 0.0
    assert res.r2_max == pytest.approx(1.0, abs=1e-12)


def test_grid_validation():
    ds = _synth(n_topics=50, seed=1)
    with pytest.raises(InvalidGrid):
        sweep_dmax(ds, [0.8])
    with pytest.raises(EmptyGrid):
        sweep_dmax(ds, [])
    with pytest.raises(InvalidGrid):
        sweep_dmax(ds, [0.81, 0.8])
    res = sweep_dmax(ds, [0.8, 0.81])
    assert len(res.curve) == 2 and res.d_max in (0.8, 0.81)


def test_sweep_needs_three_topics():
    ds = _ds({"a": ([(0, 1)], "x", 5), "b": ([(0, 2)], "x", 3)})
    with pytest.raises(TooFewPoints):
        sweep_dmax(ds, [0.0, 1.0])


def test_tie_goes_to_smallest_d():
    # all ranks 1: V(d) is the same for every d, so every grid point ties
    specs = {f"t{i}": ([(t, 1) for t in range(i + 1)], "x", 3 * i + 1) for i in range(5)}
    res = sweep_dmax(_ds(specs), [0.0, 0.5, 1.0])
    assert res.d_max == 0.0 and res.boundary is Boundary.AT_LOWER_EDGE


def test_sweep_r2_matches_pointwise_fit():
    ds = _synth(n_topics=300, seed=5, sigma=0.3)
    grid = make_grid(0, 3, 0.3)
    res = sweep_dmax(ds, grid)
    for d, r2 in res.curve:
        pts, _ = filter_regression_points(ds, d)
        fit = ols_loglog(pts)
        assert r2 == pytest.approx(fit.r2, abs=1e-12)
        assert res.fit_at(d).slope == pytest.approx(fit.slope, rel=1e-10)


def test_refinement_off_by_default_and_near_grid_answer():
    ds = _synth(n_topics=600, seed=9, d_star=1.1, sigma=0.05)
    assert sweep_dmax(ds).refined is None
    res = sweep_dmax(ds, refine=True)
    d, r2 = res.refined
    assert abs(d - res.d_max) <= 0.015 + 1e-12
    assert r2 >= res.r2_max - 1e-12


def test_golden_section():
    x, fx = golden_section_max(lambda t: -((t - 0.37) ** 2), 0.0, 1.0, 1e-8)
    assert x == pytest.approx(0.37, abs=1e-7) and fx <= 0
    assert golden_section_max(lambda t: t, 0.0, 1.0)[0] == 1.0


def test_per_category_single():
    specs = {f"t{i}": ([(t, 2 + t % 5) for t in range(i + 1)], "only", 10 + i * i) for i in range(5)}
    out = per_category_sweep(_ds(specs), make_grid(0, 1, 0.5), min_topics=3)
    assert [r.category for r in out.reports] == ["only"] and out.skipped == []
    assert out.reports[0].n_topics == 5


def test_per_category_skips_small():
    specs = {f"a{i}": ([(0, i + 1)], "small", i + 1) for i in range(2)}
    specs.update({f"b{i}": ([(t, i + 2) for t in range(i + 1)], "big", 5 * i + 1) for i in range(4)})
    out = per_category_sweep(_ds(specs), make_grid(0, 1, 0.5), min_topics=3)
    assert [r.category for r in out.reports] == ["big"]
    assert [(c, n) for c, n, _ in out.skipped] == [("small", 2)]


def test_per_category_min_topics_validated():
    with pytest.raises(ValueError):
        per_category_sweep(_ds({}), min_topics=2)


def test_per_category_sorted_by_dmax():
    cfg = SynthConfig(
        n_topics=900, seed=4, sigma=0.05,
        categories=(CategorySpec("hi", 1, 2.0), CategorySpec("lo", 1, 0.3), CategorySpec("mid", 1, 1.0)),
    )
    out = per_category_sweep(generate_dataset(cfg), make_grid(0, 3, 0.05))
    assert [r.category for r in out.reports] == ["lo", "mid", "hi"]


def test_restrict_to_category():
    cfg = SynthConfig(n_topics=40, seed=1, categories=(CategorySpec("a"), CategorySpec("b")))
    ds = generate_dataset(cfg)
    sub = restrict_to_category(ds, "a")
    assert len(sub.trajectories) == 20 and {m.category for m in sub.meta.values()} == {"a"}


# ---- properties -------------------------------------------------------------

GRID = make_grid(0, 3, 0.25)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 1000))
def test_scale_invariance(seed, k):
    ds = _synth(n_topics=60, seed=seed, sigma=0.2, max_duration=120)
    scaled = Dataset(
        ds.trajectories,
        {t: TopicMeta(t, m.category, m.n_reads * k) for t, m in ds.meta.items()},
        ds.r_cap,
    )
    a, b = sweep_dmax(ds, GRID), sweep_dmax(scaled, GRID)
    for (d1, r1), (d2, r2) in zip(a.curve, b.curve):
        assert d1 == d2 and abs(r1 - r2) <= 1e-9
    assert a.d_max == b.d_max
    for fa, fb in zip(a.fits, b.fits):
        assert fb.intercept - fa.intercept == pytest.approx(math.log10(k), abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.floats(1e-3, 1e3), st.integers(1, 10**9)), min_size=3, max_size=40))
def test_normal_equations(points):
    try:
        fit = ols_loglog(points)
    except DegenerateVariance:
        return
    x = np.log10([v for v, _ in points])
    y = np.log10([r for _, r in points])
    resid = y - fit.slope * x - fit.intercept
    scale = max(1.0, float(np.abs(y).sum()))
    # d/d(intercept) and d/d(slope) of the squared error vanish
    assert abs(resid.sum()) <= 1e-9 * scale
    assert abs((resid * x).sum()) <= 1e-9 * max(scale, float(np.abs(x * y).sum()))
    assert 0.0 <= fit.r2 <= 1.0 + 1e-15


def test_determinism_bit_identical(backend):
    ds = _synth(n_topics=400, seed=11, sigma=0.2)
    a, b = sweep_dmax(ds), sweep_dmax(ds)
    assert a == b
    assert [f.r2 for f in a.fits] == [f.r2 for f in b.fits]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.001, 6.0))
def test_monotone_filtering(seed, d):
    ds = _synth(n_topics=30, seed=seed, max_duration=40)
    # blank out a few topics so some exclusions occur
    trajs = dict(ds.trajectories)
    for t in list(trajs)[::7]:
        trajs[t] = Trajectory(t)
    ds = Dataset(trajs, ds.meta, ds.r_cap)
    at_d, excl_d = filter_regression_points(ds, d)
    at_0, excl_0 = filter_regression_points(ds, 0.0)
    assert len(at_d) == len(at_0)
    assert [(e.topic, e.code) for e in excl_d] == [(e.topic, e.code) for e in excl_0]
    assert all(v > 0 for v, _ in at_d)
    kept = [t for t in sorted(ds.trajectories) if len(ds.trajectories[t]) > 0]
    assert [visibility(ds.trajectories[t], d) for t in kept] == [v for v, _ in at_d]
