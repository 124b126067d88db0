"""Per-component reservation table with safe-interval queries.

Occupied intervals are half-open [start, end) so a departure at t and an
arrival at t on the same component never conflict. Safe intervals are the
complement of the occupied set over [0, inf); the last one is unbounded.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Hashable

INF = float("inf")


@dataclass(frozen=True, order=True)
class TimeInterval:
    start: int
    end: float  # int ns or math.inf

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"empty interval [{self.start}, {self.end})")

    def contains(self, t: int) -> bool:
        return self.start <= t < self.end

    def overlaps(self, other: "TimeInterval") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class SafeInterval:
    comp: Hashable
    index: int
    span: TimeInterval


class ReservationError(ValueError):
    """An overlapping reservation: always a scheduler bug, never retried."""


class ReservationTable:
    """Occupied time intervals per component, kept sorted and disjoint."""

    def __init__(self):
        self._occupied: dict[Hashable, list[TimeInterval]] = {}

    def components(self) -> list[Hashable]:
        return list(self._occupied)

    def occupied(self, comp: Hashable) -> list[TimeInterval]:
        return list(self._occupied.get(comp, []))

    def reserve(self, comp: Hashable, interval: TimeInterval) -> None:
        """Insert an occupied interval; overlap raises ReservationError."""
        spans = self._occupied.setdefault(comp, [])
        pos = bisect.bisect_left(spans, interval)
        for neighbor in spans[max(0, pos - 1):pos + 1]:
            if neighbor.overlaps(interval):
                raise ReservationError(
                    f"{comp}: [{interval.start}, {interval.end}) overlaps "
                    f"existing [{neighbor.start}, {neighbor.end})")
        spans.insert(pos, interval)

    def release(self, comp: Hashable, interval: TimeInterval) -> None:
        """Remove an interval previously passed to reserve (exact match)."""
        spans = self._occupied.get(comp, [])
        try:
            spans.remove(interval)
        except ValueError:
            raise ReservationError(
                f"{comp}: [{interval.start}, {interval.end}) not reserved") from None

    def safe_intervals(self, comp: Hashable) -> list[SafeInterval]:
        """Complement of the occupied set over [0, inf), in start order."""
        out: list[SafeInterval] = []
        cursor = 0
        for occ in self._occupied.get(comp, []):
            if occ.start > cursor:
                out.append(SafeInterval(comp, len(out),
                                        TimeInterval(cursor, occ.start)))
            cursor = max(cursor, occ.end)
        if cursor < INF:  # a reservation to infinity leaves no final interval
            out.append(SafeInterval(comp, len(out), TimeInterval(cursor, INF)))
        return out

    def interval_containing(self, comp: Hashable, t: int) -> SafeInterval | None:
        for si in self.safe_intervals(comp):
            if si.span.contains(t):
                return si
        return None

    def is_free(self, comp: Hashable, interval: TimeInterval) -> bool:
        return not any(occ.overlaps(interval)
                       for occ in self._occupied.get(comp, []))

    def copy(self) -> "ReservationTable":
        dup = ReservationTable()
        dup._occupied = {comp: list(spans) for comp, spans in self._occupied.items()}
        return dup
