"""ISO-8601 timestamp handling.

All timestamps inside the engine are timezone-aware UTC datetimes truncated to
millisecond precision, so that parse/serialize round-trips are exact.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone


def normalize(ts: datetime) -> datetime:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    ts = ts.astimezone(timezone.utc)
    return ts.replace(microsecond=ts.microsecond // 1000 * 1000)


def parse_timestamp(text: str) -> datetime:
    """Parse an ISO-8601 string; naive values are taken as UTC.

    Raises ValueError on malformed input.
    """
    raw = text.strip()
    if not raw:
        raise ValueError("empty timestamp")
    if raw[-1] in "zZ":
        raw = raw[:-1] + "+00:00"
    return normalize(datetime.fromisoformat(raw))


def format_timestamp(ts: datetime) -> str:
    return normalize(ts).isoformat(timespec="milliseconds")


def seconds(delta: timedelta) -> float:
    return delta.total_seconds()
