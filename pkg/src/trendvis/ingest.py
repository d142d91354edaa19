"""Parsers for recorded crawls and pre-extracted tables.

Snapshot line format, one crawl of the ranked list per line::

    2023-01-01T08:00:00Z<TAB>1:topic a<TAB>2:topic b ...

Ranks ascend from 1. Topic tokens percent-encode ``%``, tab, CR, LF and
``:``. Timestamps become whole minutes since the epoch (seconds are
floored).

Tables are UTF-8 CSV with headers ``topic_id,t_minute,rank`` (trajectories)
and ``topic_id,category,n_reads`` (metadata).

Every parser takes ``strict``. Strict parsing raises on the first bad
record; lenient parsing skips it and appends a :class:`Diagnostic` to the
``diagnostics`` list passed in (or logs a warning if none is given).
"""

from __future__ import annotations

import csv
import io
import logging
import os
from collections.abc import Iterable, Iterator, Sequence
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import IO, Union
from urllib.parse import unquote

from .errors import (
    DuplicateTimestamp,
    DuplicateTopic,
    DuplicateTopicInSnapshot,
    MalformedLine,
    NegativeReads,
    NonMonotonicRanks,
    RankOutOfRange,
    TrendvisError,
)
from .model import (
    DEFAULT_R_CAP,
    Diagnostic,
    TopicId,
    TopicMeta,
    Trajectory,
    normalize_topic_id,
    parse_epoch,
)

logger = logging.getLogger(__name__)

Source = Union[str, os.PathLike, IO[str], IO[bytes], Iterable[str]]

TRAJECTORY_HEADER = ["topic_id", "t_minute", "rank"]
METADATA_HEADER = ["topic_id", "category", "n_reads"]

_ENCODE = {"%": "%25", "\t": "%09", "\n": "%0A", "\r": "%0D", ":": "%3A"}


def encode_topic(topic: str) -> str:
    return "".join(_ENCODE.get(ch, ch) for ch in topic)


def decode_topic(token: str) -> str:
    return unquote(token, errors="strict")


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Snapshot:
    t: int
    entries: tuple[tuple[int, TopicId], ...]
    source: str = ""


def format_snapshot_line(ts: datetime, topics: Sequence[TopicId]) -> str:
    """Serialise one crawl; ``topics`` are in rank order starting at 1."""
    fields = [format_timestamp(ts)] + [f"{i}:{encode_topic(t)}" for i, t in enumerate(topics, 1)]
    return "\t".join(fields) + "\n"


@contextmanager
def _text(source: Source, newline: str | None = None) -> Iterator[Iterable[str]]:
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8", newline=newline) as fh:
            yield fh
    elif isinstance(source, (io.RawIOBase, io.BufferedIOBase)):
        yield io.TextIOWrapper(source, encoding="utf-8", newline=newline)  # type: ignore[arg-type]
    else:
        yield source  # type: ignore[misc]


def _source_name(source: Source) -> str:
    if isinstance(source, (str, os.PathLike)):
        return os.fspath(source)
    name = getattr(source, "name", None)
    return name if isinstance(name, str) else "<stream>"


class _Reporter:
    def __init__(self, strict: bool, diagnostics: list[Diagnostic] | None, source: str) -> None:
        self.strict = strict
        self.diagnostics = diagnostics
        self.source = source

    def __call__(self, exc: TrendvisError, topic: TopicId | None = None) -> None:
        if self.strict:
            raise exc
        diag = Diagnostic(type(exc).__name__, str(exc), topic, exc.line, self.source)
        if self.diagnostics is None:
            logger.warning("%s: %s", self.source, exc)
        else:
            self.diagnostics.append(diag)


def _parse_snapshot_fields(fields: list[str], lineno: int, r_cap: int) -> tuple[datetime, list[tuple[int, TopicId]]]:
    try:
        ts = parse_epoch(fields[0])
    except ValueError:
        raise MalformedLine(f"bad timestamp {fields[0]!r}", line=lineno) from None
    entries: list[tuple[int, TopicId]] = []
    seen: set[TopicId] = set()
    for token in fields[1:]:
        rank_s, sep, topic_s = token.partition(":")
        try:
            if not sep:
                raise ValueError
            rank = int(rank_s)
            topic = normalize_topic_id(decode_topic(topic_s))
        except (ValueError, UnicodeDecodeError):
            raise MalformedLine(f"bad entry {token!r}", line=lineno) from None
        if not 1 <= rank <= r_cap:
            raise RankOutOfRange(f"rank {rank} outside 1..{r_cap}", line=lineno)
        if entries and rank <= entries[-1][0]:
            raise NonMonotonicRanks(f"rank {rank} follows rank {entries[-1][0]}", line=lineno)
        if topic in seen:
            raise DuplicateTopicInSnapshot(f"topic {topic!r} listed twice", line=lineno)
        seen.add(topic)
        entries.append((rank, topic))
    return ts, entries


def parse_snapshot_stream(
    source: Source,
    *,
    epoch: datetime | None = None,
    r_cap: int = DEFAULT_R_CAP,
    strict: bool = False,
    diagnostics: list[Diagnostic] | None = None,
) -> list[Snapshot]:
    """Parse snapshot lines in file order.

    Times are minutes since ``epoch``; by default the epoch is the first
    valid record's timestamp. Blank lines are ignored.
    """
    name = _source_name(source)
    report = _Reporter(strict, diagnostics, name)
    out: list[Snapshot] = []
    with _text(source) as lines:
        for lineno, raw in enumerate(lines, 1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            try:
                ts, entries = _parse_snapshot_fields(line.split("\t"), lineno, r_cap)
                if epoch is None:
                    epoch = ts
                seconds = (ts - epoch).total_seconds()
                if seconds < 0:
                    raise MalformedLine(f"timestamp {format_timestamp(ts)} precedes the epoch", line=lineno)
            except TrendvisError as exc:
                report(exc)
                continue
            out.append(Snapshot(int(seconds // 60), tuple(entries), name))
    return out


def first_timestamp(source: Source) -> datetime | None:
    """Timestamp of the first parseable line, used to pick a shared epoch."""
    with _text(source) as lines:
        for raw in lines:
            head = raw.split("\t", 1)[0].strip()
            if not head:
                continue
            try:
                return parse_epoch(head)
            except ValueError:
                continue
    return None


def _duplicate_minutes(pairs: list[tuple[int, int]]) -> list[int]:
    seen: set[int] = set()
    dups = []
    for t, _ in pairs:
        if t in seen:
            dups.append(t)
        seen.add(t)
    return dups


def _build(
    grouped: dict[TopicId, list[tuple[int, int]]],
    r_cap: int,
    report: _Reporter,
) -> dict[TopicId, Trajectory]:
    out: dict[TopicId, Trajectory] = {}
    for topic in sorted(grouped):
        pairs = grouped[topic]
        for t in _duplicate_minutes(pairs):
            report(DuplicateTimestamp(f"topic {topic!r} has several ranks at minute {t}"), topic)
        out[topic] = Trajectory.from_pairs(topic, pairs, r_cap, strict=False)
    return out


def snapshots_to_trajectories(
    snaps: Iterable[Snapshot],
    *,
    r_cap: int = DEFAULT_R_CAP,
    strict: bool = False,
    diagnostics: list[Diagnostic] | None = None,
) -> dict[TopicId, Trajectory]:
    """Collect each topic's (minute, rank) pairs across snapshots.

    Topics that never appear are absent from the result; minutes where a
    topic is missing become gaps. Keys are sorted by topic id.
    """
    grouped: dict[TopicId, list[tuple[int, int]]] = {}
    for snap in sorted(snaps, key=lambda s: s.t):
        for rank, topic in snap.entries:
            grouped.setdefault(topic, []).append((snap.t, rank))
    return _build(grouped, r_cap, _Reporter(strict, diagnostics, "<snapshots>"))


def merge_snapshot_sources(
    sources: Sequence[Source],
    *,
    epoch: datetime | None = None,
    r_cap: int = DEFAULT_R_CAP,
    strict: bool = False,
    diagnostics: list[Diagnostic] | None = None,
) -> tuple[datetime | None, list[Snapshot]]:
    """Parse several snapshot files against one epoch.

    Without an explicit epoch the earliest first-record timestamp across
    sources is used. Snapshots are merged by minute, then source name.
    """
    if epoch is None:
        firsts = [ts for ts in map(first_timestamp, sources) if ts is not None]
        epoch = min(firsts) if firsts else None
    snaps: list[Snapshot] = []
    for src in sources:
        snaps.extend(parse_snapshot_stream(src, epoch=epoch, r_cap=r_cap, strict=strict, diagnostics=diagnostics))
    snaps.sort(key=lambda s: (s.t, s.source))
    return epoch, snaps


def _check_header(reader: Iterator[list[str]], expected: list[str]) -> None:
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedLine(f"missing header {','.join(expected)}", line=1) from None
    if [h.strip() for h in header] != expected:
        raise MalformedLine(f"expected header {','.join(expected)}, got {','.join(header)}", line=1)


def parse_trajectory_csv(
    source: Source,
    *,
    r_cap: int = DEFAULT_R_CAP,
    strict: bool = False,
    diagnostics: list[Diagnostic] | None = None,
) -> dict[TopicId, Trajectory]:
    """Read ``topic_id,t_minute,rank`` rows (any order) into trajectories."""
    report = _Reporter(strict, diagnostics, _source_name(source))
    grouped: dict[TopicId, list[tuple[int, int]]] = {}
    with _text(source, newline="") as fh:
        reader = csv.reader(fh)
        _check_header(reader, TRAJECTORY_HEADER)
        for row in reader:
            lineno = reader.line_num
            if not row:
                continue
            try:
                if len(row) != 3:
                    raise MalformedLine(f"expected 3 fields, got {len(row)}", line=lineno)
                try:
                    topic = normalize_topic_id(row[0])
                    t, rank = int(row[1]), int(row[2])
                except ValueError:
                    raise MalformedLine(f"bad row {','.join(row)!r}", line=lineno) from None
                if t < 0:
                    raise MalformedLine(f"negative minute {t}", line=lineno)
                if not 1 <= rank <= r_cap:
                    raise RankOutOfRange(f"rank {rank} outside 1..{r_cap}", line=lineno)
            except TrendvisError as exc:
                report(exc)
                continue
            grouped.setdefault(topic, []).append((t, rank))
    return _build(grouped, r_cap, report)


def parse_metadata_csv(
    source: Source,
    *,
    strict: bool = False,
    diagnostics: list[Diagnostic] | None = None,
) -> dict[TopicId, TopicMeta]:
    """Read ``topic_id,category,n_reads`` rows. Later duplicates win when lenient."""
    report = _Reporter(strict, diagnostics, _source_name(source))
    out: dict[TopicId, TopicMeta] = {}
    with _text(source, newline="") as fh:
        reader = csv.reader(fh)
        _check_header(reader, METADATA_HEADER)
        for row in reader:
            lineno = reader.line_num
            if not row:
                continue
            try:
                if len(row) != 3:
                    raise MalformedLine(f"expected 3 fields, got {len(row)}", line=lineno)
                try:
                    topic = normalize_topic_id(row[0])
                    reads = int(row[2])
                except ValueError:
                    raise MalformedLine(f"bad row {','.join(row)!r}", line=lineno) from None
                category = row[1].strip()
                if not category:
                    raise MalformedLine("empty category", line=lineno)
                if reads < 0:
                    raise NegativeReads(f"n_reads {reads} is negative", line=lineno)
                if topic in out:
                    report(DuplicateTopic(f"topic {topic!r} listed again", line=lineno), topic)
            except TrendvisError as exc:
                report(exc)
                continue
            out[topic] = TopicMeta(topic, category, reads)
    return out


def write_trajectory_csv(trajectories: dict[TopicId, Trajectory] | Iterable[Trajectory], fh: IO[str]) -> None:
    trajs = trajectories.values() if isinstance(trajectories, dict) else trajectories
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRAJECTORY_HEADER)
    for traj in sorted(trajs, key=lambda tr: tr.topic):
        for t, r in traj.pairs():
            w.writerow([traj.topic, t, r])


def write_metadata_csv(meta: dict[TopicId, TopicMeta] | Iterable[TopicMeta], fh: IO[str]) -> None:
    rows = meta.values() if isinstance(meta, dict) else meta
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(METADATA_HEADER)
    for m in sorted(rows, key=lambda m: m.topic):
        w.writerow([m.topic, m.category, m.n_reads])
