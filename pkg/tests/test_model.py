import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trendvis.errors import CorruptTrajectory, DuplicateTimestamp, RankOutOfRange
from trendvis.model import (
    Dataset,
    RankObservation,
    TopicMeta,
    Trajectory,
    append_observation,
    dwell_time,
    normalize_topic_id,
    validate_dataset,
)

from .conftest import PAPER_TRAJECTORIES


def test_append_to_empty():
    traj = append_observation(Trajectory("x"), RankObservation(7, 40))
    assert len(traj) == 1
    assert traj.hist[40] == 1
    assert traj.hist.sum() == 1


def test_append_builds_paper_trajectory_1():
    traj = Trajectory.from_pairs("traj1", [(1, 40), (2, 30)])
    traj = append_observation(traj, RankObservation(3, 50))
    assert traj == Trajectory.from_pairs("traj1", PAPER_TRAJECTORIES[1])
    assert traj.pairs() == PAPER_TRAJECTORIES[1]


def test_append_duplicate_lenient_keeps_better_rank():
    traj = Trajectory.from_pairs("x", [(1, 40)])
    traj = append_observation(traj, RankObservation(1, 30))
    assert traj.pairs() == [(1, 30)]
    assert traj.hist[30] == 1 and traj.hist[40] == 0
    # a worse rank at the same minute leaves it alone
    assert append_observation(traj, RankObservation(1, 45)).pairs() == [(1, 30)]


def test_append_duplicate_strict_raises():
    traj = Trajectory.from_pairs("x", [(1, 40)])
    with pytest.raises(DuplicateTimestamp):
        append_observation(traj, RankObservation(1, 30), strict=True)


def test_rank_above_cap():
    with pytest.raises(RankOutOfRange):
        append_observation(Trajectory("x"), RankObservation(1, 51))


@pytest.mark.parametrize("rank", [0, -3])
def test_rank_below_one(rank):
    with pytest.raises(RankOutOfRange):
        RankObservation(1, rank)


def test_configurable_r_cap():
    traj = append_observation(Trajectory("x", r_cap=100), RankObservation(0, 75))
    assert traj.hist[75] == 1
    with pytest.raises(RankOutOfRange):
        append_observation(Trajectory("x", r_cap=10), RankObservation(0, 11))


def test_from_pairs_strict_duplicates():
    with pytest.raises(DuplicateTimestamp):
        Trajectory.from_pairs("x", [(1, 5), (1, 3)], strict=True)
    assert Trajectory.from_pairs("x", [(1, 5), (1, 3), (0, 9)]).pairs() == [(0, 9), (1, 3)]


def test_gaps_are_allowed():
    traj = Trajectory.from_pairs("x", [(7, 40), (8, 30), (10, 50)])
    assert traj.times.tolist() == [7, 8, 10]


@pytest.mark.parametrize("k, expected", [(1, 3), (2, 6), (3, 6), (4, 6)])
def test_dwell_time_paper(paper, k, expected):
    assert dwell_time(paper[k]) == expected


def test_dwell_time_empty():
    assert dwell_time(Trajectory("x")) == 0


def test_trajectory_is_immutable(paper):
    with pytest.raises(AttributeError):
        paper[1].topic = "y"
    with pytest.raises(ValueError):
        paper[1].ranks[0] = 1


def test_topic_id_normalization():
    assert normalize_topic_id("  a b ") == "a b"
    with pytest.raises(ValueError):
        normalize_topic_id("   ")


def test_topic_meta_invariants():
    with pytest.raises(ValueError):
        TopicMeta("a", "sports", -1)
    with pytest.raises(ValueError):
        TopicMeta("a", "", 1)


def test_dataset_rejects_mismatched_keys():
    with pytest.raises(ValueError):
        Dataset({"a": Trajectory("b")})
    with pytest.raises(ValueError):
        Dataset({"a": Trajectory("a", r_cap=10)}, r_cap=50)


def test_validate_unjoined():
    ds = Dataset({"b": Trajectory.from_pairs("b", [(0, 1)])}, {"a": TopicMeta("a", "x", 5)})
    diags = validate_dataset(ds)
    assert [d.code for d in diags] == ["unjoined", "unjoined"]
    assert {d.topic for d in diags} == {"a", "b"}


def test_validate_clean():
    ds = Dataset({"a": Trajectory.from_pairs("a", [(0, 1)])}, {"a": TopicMeta("a", "x", 5)})
    assert validate_dataset(ds) == []


def test_validate_zero_reads():
    ds = Dataset({"a": Trajectory.from_pairs("a", [(0, 1)])}, {"a": TopicMeta("a", "x", 0)})
    (diag,) = validate_dataset(ds)
    assert diag.code == "excluded-from-regression"


def test_validate_detects_histogram_corruption():
    bad = Trajectory("a", [0, 1], [3, 4], hist=np.zeros(51, dtype=np.int64))
    with pytest.raises(CorruptTrajectory):
        validate_dataset(Dataset({"a": bad}))


observations = st.lists(
    st.tuples(st.integers(0, 10_000), st.integers(1, 50)), max_size=80, unique_by=lambda p: p[0]
)


@given(observations)
def test_incremental_histogram_matches_rebuild(pairs):
    traj = Trajectory("x")
    for t, r in pairs:
        traj = append_observation(traj, RankObservation(t, r))
    rebuilt = np.bincount(traj.ranks, minlength=51)
    assert np.array_equal(traj.hist, rebuilt)
    traj.check_invariants()


@given(st.lists(st.tuples(st.integers(0, 500), st.integers(1, 50)), max_size=80))
def test_incremental_histogram_with_duplicates(pairs):
    traj = Trajectory("x")
    for t, r in pairs:
        traj = append_observation(traj, RankObservation(t, r))
    traj.check_invariants()
    assert traj == Trajectory.from_pairs("x", pairs)


@given(observations)
def test_dwell_time_counts_observations(pairs):
    traj = Trajectory.from_pairs("x", pairs)
    assert dwell_time(traj) == len(pairs) == int(traj.hist.sum())


@settings(max_examples=50)
@given(observations, st.randoms(use_true_random=False))
def test_append_order_does_not_matter(pairs, rnd):
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    traj = Trajectory("x")
    for t, r in shuffled:
        traj = append_observation(traj, RankObservation(t, r))
    assert np.all(np.diff(traj.times) > 0)
    assert traj == Trajectory.from_pairs("x", pairs)
