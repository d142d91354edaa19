"""Domain types: rank observations, trajectories, topic metadata, datasets.

Times are integer minutes since a dataset epoch. A trajectory keeps every
recorded (minute, rank) pair of one topic in time order; minutes where the
topic sat outside the ranked list are simply absent. Alongside the
observations each trajectory carries a dwell histogram ``hist`` of length
``r_cap + 1`` where ``hist[r]`` counts minutes spent at rank ``r``
(index 0 is always zero).
"""

from __future__ import annotations

import bisect
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from datetime import datetime, timezone
from types import MappingProxyType

import numpy as np

from .errors import CorruptTrajectory, DuplicateTimestamp, RankOutOfRange

DEFAULT_R_CAP = 50

TopicId = str


def normalize_topic_id(raw: str) -> TopicId:
    topic = raw.strip()
    if not topic:
        raise ValueError("topic id must be non-empty")
    return topic


def parse_epoch(text: str) -> datetime:
    """Parse an ISO-8601 timestamp; ``Z`` and naive values mean UTC."""
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.int64)
    a.setflags(write=False)
    return a


def _check_rank(r: int, r_cap: int) -> None:
    if not 1 <= r <= r_cap:
        raise RankOutOfRange(f"rank {r} outside 1..{r_cap}")


@dataclass(frozen=True)
class RankObservation:
    t: int
    r: int

    def __post_init__(self) -> None:
        if self.t < 0:
            raise ValueError(f"time must be non-negative, got {self.t}")
        if self.r < 1:
            raise RankOutOfRange(f"rank {self.r} below 1")


class Trajectory:
    """Immutable rank trajectory of one topic.

    Build with :meth:`from_pairs` (sorts, applies the duplicate policy) or
    grow one observation at a time with :func:`append_observation`.
    """

    __slots__ = ("topic", "times", "ranks", "r_cap", "hist")

    def __init__(
        self,
        topic: TopicId,
        times: Iterable[int] | np.ndarray = (),
        ranks: Iterable[int] | np.ndarray = (),
        r_cap: int = DEFAULT_R_CAP,
        *,
        hist: np.ndarray | None = None,
    ) -> None:
        times = _frozen(np.asarray(list(times) if not isinstance(times, np.ndarray) else times))
        ranks = _frozen(np.asarray(list(ranks) if not isinstance(ranks, np.ndarray) else ranks))
        if times.shape != ranks.shape or times.ndim != 1:
            raise ValueError("times and ranks must be 1-d sequences of equal length")
        if r_cap < 1:
            raise ValueError("r_cap must be >= 1")
        if ranks.size and (ranks.min() < 1 or ranks.max() > r_cap):
            bad = ranks[(ranks < 1) | (ranks > r_cap)][0]
            raise RankOutOfRange(f"rank {int(bad)} outside 1..{r_cap} for topic {topic!r}")
        if times.size:
            if times[0] < 0:
                raise ValueError(f"negative time {int(times[0])} for topic {topic!r}")
            if np.any(np.diff(times) <= 0):
                raise DuplicateTimestamp(f"times not strictly increasing for topic {topic!r}")
        if hist is None:
            hist = np.bincount(ranks, minlength=r_cap + 1)
        set_ = object.__setattr__
        set_(self, "topic", topic)
        set_(self, "times", times)
        set_(self, "ranks", ranks)
        set_(self, "r_cap", int(r_cap))
        set_(self, "hist", _frozen(hist))

    def __setattr__(self, name, value):
        raise AttributeError("Trajectory is immutable")

    @classmethod
    def from_pairs(
        cls,
        topic: TopicId,
        pairs: Iterable[tuple[int, int]],
        r_cap: int = DEFAULT_R_CAP,
        *,
        strict: bool = False,
    ) -> Trajectory:
        """Build a trajectory from (minute, rank) pairs in any order.

        Duplicate minutes raise :class:`DuplicateTimestamp` when ``strict``;
        otherwise the numerically smaller (better) rank is kept.
        """
        arr = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        times, ranks = arr[:, 0], arr[:, 1]
        for r in ranks[(ranks < 1) | (ranks > r_cap)][:1]:
            _check_rank(int(r), r_cap)
        order = np.lexsort((ranks, times))
        times, ranks = times[order], ranks[order]
        if times.size > 1:
            dup = times[1:] == times[:-1]
            if dup.any():
                if strict:
                    t = int(times[1:][dup][0])
                    raise DuplicateTimestamp(f"topic {topic!r} has two ranks at minute {t}")
                keep = np.concatenate(([True], ~dup))
                times, ranks = times[keep], ranks[keep]
        return cls(topic, times, ranks, r_cap)

    @property
    def obs(self) -> tuple[RankObservation, ...]:
        return tuple(RankObservation(int(t), int(r)) for t, r in zip(self.times, self.ranks))

    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.times.tolist(), self.ranks.tolist()))

    def __len__(self) -> int:
        return int(self.times.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.topic == other.topic
            and self.r_cap == other.r_cap
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.ranks, other.ranks)
            and np.array_equal(self.hist, other.hist)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Trajectory(topic={self.topic!r}, n={len(self)}, r_cap={self.r_cap})"

    def check_invariants(self) -> None:
        """Raise :class:`CorruptTrajectory` if sort or histogram invariants fail."""
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise CorruptTrajectory(f"topic {self.topic!r}: times not strictly increasing")
        if self.hist.shape != (self.r_cap + 1,):
            raise CorruptTrajectory(f"topic {self.topic!r}: histogram has wrong length")
        rebuilt = np.bincount(self.ranks, minlength=self.r_cap + 1)
        if rebuilt.shape != self.hist.shape or not np.array_equal(rebuilt, self.hist):
            raise CorruptTrajectory(f"topic {self.topic!r}: histogram disagrees with observations")


def append_observation(traj: Trajectory, o: RankObservation, *, strict: bool = False) -> Trajectory:
    """Return a new trajectory with ``o`` inserted at its time position.

    The histogram is updated incrementally rather than rebuilt.
    """
    _check_rank(o.r, traj.r_cap)
    times = traj.times.tolist()
    i = bisect.bisect_left(times, o.t)
    hist = traj.hist.copy()
    ranks = traj.ranks.tolist()
    if i < len(times) and times[i] == o.t:
        if strict:
            raise DuplicateTimestamp(f"topic {traj.topic!r} already has minute {o.t}")
        if o.r >= ranks[i]:
            return traj
        hist[ranks[i]] -= 1
        hist[o.r] += 1
        ranks[i] = o.r
    else:
        times.insert(i, o.t)
        ranks.insert(i, o.r)
        hist[o.r] += 1
    return Trajectory(traj.topic, times, ranks, traj.r_cap, hist=hist)


def dwell_time(traj: Trajectory) -> int:
    """Minutes spent anywhere in the ranked list; equals V(0)."""
    return len(traj)


@dataclass(frozen=True)
class TopicMeta:
    topic: TopicId
    category: str
    n_reads: int

    def __post_init__(self) -> None:
        if self.n_reads < 0:
            raise ValueError(f"n_reads must be non-negative, got {self.n_reads}")
        if not self.category:
            raise ValueError("category must be non-empty")


@dataclass(frozen=True)
class Dataset:
    """A corpus of trajectories plus metadata, keyed by topic id.

    ``meta`` may cover more or fewer topics than ``trajectories``; any join
    is done explicitly by the consumer.
    """

    trajectories: Mapping[TopicId, Trajectory] = field(default_factory=dict)
    meta: Mapping[TopicId, TopicMeta] = field(default_factory=dict)
    r_cap: int = DEFAULT_R_CAP
    epoch: datetime | None = None

    def __post_init__(self) -> None:
        if self.r_cap < 1:
            raise ValueError("r_cap must be >= 1")
        for key, traj in self.trajectories.items():
            if key != traj.topic:
                raise ValueError(f"trajectory keyed {key!r} belongs to topic {traj.topic!r}")
            if traj.r_cap != self.r_cap:
                raise ValueError(f"trajectory {key!r} has r_cap {traj.r_cap}, dataset has {self.r_cap}")
        object.__setattr__(self, "trajectories", MappingProxyType(dict(self.trajectories)))
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.r_cap == other.r_cap
            and self.epoch == other.epoch
            and dict(self.trajectories) == dict(other.trajectories)
            and dict(self.meta) == dict(other.meta)
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def n_observations(self) -> int:
        return sum(len(t) for t in self.trajectories.values())

    def categories(self) -> list[str]:
        return sorted({m.category for m in self.meta.values()})

    def restrict(self, topics: Iterable[TopicId]) -> Dataset:
        """Sub-dataset holding only ``topics`` (missing ones are ignored)."""
        keep = set(topics)
        return Dataset(
            {k: v for k, v in self.trajectories.items() if k in keep},
            {k: v for k, v in self.meta.items() if k in keep},
            self.r_cap,
            self.epoch,
        )


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    topic: TopicId | None = None
    line: int | None = None
    source: str | None = None

    def as_dict(self) -> dict:
        return {k: v for k, v in vars(self).items() if v is not None}


def validate_dataset(ds: Dataset) -> list[Diagnostic]:
    """Preflight check of a dataset.

    Reports unjoined topics and topics that the regression will drop.
    Internal corruption (unsorted times, histogram drift) raises
    :class:`CorruptTrajectory` instead of being reported.
    """
    out: list[Diagnostic] = []
    for topic, traj in ds.trajectories.items():
        traj.check_invariants()
        if topic not in ds.meta:
            out.append(Diagnostic("unjoined", "trajectory has no metadata", topic))
        elif ds.meta[topic].n_reads == 0:
            out.append(Diagnostic("excluded-from-regression", "zero reads", topic))
        elif len(traj) == 0:
            out.append(Diagnostic("excluded-from-regression", "empty trajectory", topic))
    for topic in ds.meta:
        if topic not in ds.trajectories:
            out.append(Diagnostic("unjoined", "metadata has no trajectory", topic))
    return out
