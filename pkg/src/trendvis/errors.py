"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`TrendvisError`.
Parse errors carry the 1-based line number of the offending record when known.
"""

from __future__ import annotations


class TrendvisError(Exception):
    """Base class for all package errors."""

    def __init__(self, message: str, *, line: int | None = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RankOutOfRange(TrendvisError, ValueError):
    pass


class DuplicateTimestamp(TrendvisError, ValueError):
    pass


class CorruptTrajectory(TrendvisError):
    """A trajectory violates its sort or histogram invariants. Always fatal."""


class MalformedLine(TrendvisError, ValueError):
    pass


class NonMonotonicRanks(MalformedLine):
    pass


class DuplicateTopicInSnapshot(MalformedLine):
    pass


class NegativeReads(MalformedLine):
    pass


class DuplicateTopic(MalformedLine):
    pass


class InvalidDiscrimination(TrendvisError, ValueError):
    pass


class InvalidGrid(TrendvisError, ValueError):
    pass


class EmptyGrid(InvalidGrid):
    pass


class InvalidBracket(TrendvisError, ValueError):
    pass


class TooFewPoints(TrendvisError):
    pass


class DegenerateVariance(TrendvisError):
    pass


class InvalidConfig(TrendvisError, ValueError):
    pass


class UnknownTopic(TrendvisError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return Exception.__str__(self)
