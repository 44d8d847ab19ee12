"""Duration helpers and the throughput result type shared by both mining paradigms."""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from datetime import datetime, timedelta

ZERO = timedelta(0)


def wait_between(pred_start: datetime, pred_end: datetime | None, succ_start: datetime) -> timedelta:
    """Idle time from a predecessor to its successor.

    Measured from the predecessor's end when known, else from its start.
    Overlapping executions are clamped to zero.
    """
    anchor = pred_end if pred_end is not None else pred_start
    return max(ZERO, succ_start - anchor)


def summarize(durations: list[timedelta]) -> dict[str, timedelta | None]:
    if not durations:
        return {"mean": None, "median": None, "min": None, "max": None}
    total = sum(durations, ZERO)
    ordered = sorted(durations)
    return {
        "mean": total / len(durations),
        "median": statistics.median(ordered),
        "min": ordered[0],
        "max": ordered[-1],
    }


@dataclass(frozen=True)
class ThroughputRow:
    from_entity: tuple[str, str]
    to_entity: tuple[str, str]
    path_entities: tuple[tuple[str, str], ...]
    duration: timedelta
    from_ts: datetime
    to_ts: datetime
    # event identities; used to collapse duplicate measurements
    from_event: str = ""
    to_event: str = ""


@dataclass(frozen=True)
class ThroughputResult:
    rows: tuple[ThroughputRow, ...]
    skipped_negative: int = 0
    aggregate: dict[str, timedelta | None] = field(default_factory=dict)

    @classmethod
    def from_rows(cls, rows: list[ThroughputRow], skipped_negative: int = 0) -> ThroughputResult:
        return cls(tuple(rows), skipped_negative, summarize([r.duration for r in rows]))

    def durations(self) -> list[timedelta]:
        return [r.duration for r in self.rows]
