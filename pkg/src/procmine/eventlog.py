"""Flat (single case notion) event logs.

Covers the classic case/activity/timestamp table: CSV ingestion and
serialization, directly-follows discovery, and flattening of an
object-centric log onto one object type.  Flattening is where the
convergence (duplicated events) and divergence (false rework) problems of
the single-case view show up, so it returns a report measuring both.
"""

from __future__ import annotations

import csv
import io
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from decimal import Decimal, InvalidOperation
from typing import TYPE_CHECKING, BinaryIO, Mapping

from procmine.errors import EmptyLogError, RowError, SchemaError
from procmine.measures import wait_between
from procmine.timestamps import format_timestamp, normalize, parse_timestamp

if TYPE_CHECKING:
    from procmine.ocel import OCELog

ROLES = ("case_id", "activity", "start_ts", "end_ts", "resource", "cost", "automated")
MANDATORY_ROLES = ("case_id", "activity", "start_ts")
DEFAULT_COLUMNS = {role: role for role in ROLES}

_TRUE = {"true", "1", "yes", "y", "t"}
_FALSE = {"false", "0", "no", "n", "f"}


@dataclass(frozen=True)
class FlatEvent:
    case_id: str
    activity: str
    start_ts: datetime
    end_ts: datetime | None = None
    resource: str | None = None
    cost: Decimal | None = None
    automated: bool | None = None
    attributes: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.case_id:
            raise ValueError("case_id must be non-empty")
        if not self.activity:
            raise ValueError("activity must be non-empty")
        object.__setattr__(self, "start_ts", normalize(self.start_ts))
        if self.end_ts is not None:
            object.__setattr__(self, "end_ts", normalize(self.end_ts))
            if self.end_ts < self.start_ts:
                raise ValueError("end_ts precedes start_ts")
        if self.cost is not None and self.cost < 0:
            raise ValueError("cost must be non-negative")
        object.__setattr__(self, "attributes", dict(self.attributes))

    @property
    def duration(self) -> timedelta | None:
        if self.end_ts is None:
            return None
        return self.end_ts - self.start_ts

    def to_dict(self) -> dict:
        out: dict = {
            "case_id": self.case_id,
            "activity": self.activity,
            "start_ts": format_timestamp(self.start_ts),
        }
        if self.end_ts is not None:
            out["end_ts"] = format_timestamp(self.end_ts)
        if self.resource is not None:
            out["resource"] = self.resource
        if self.cost is not None:
            out["cost"] = str(self.cost)
        if self.automated is not None:
            out["automated"] = self.automated
        out["attributes"] = dict(sorted(self.attributes.items()))
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> FlatEvent:
        end = data.get("end_ts")
        cost = data.get("cost")
        return cls(
            case_id=str(data["case_id"]),
            activity=str(data["activity"]),
            start_ts=parse_timestamp(data["start_ts"]),
            end_ts=parse_timestamp(end) if end is not None else None,
            resource=data.get("resource"),
            cost=Decimal(str(cost)) if cost is not None else None,
            automated=data.get("automated"),
            attributes={str(k): str(v) for k, v in (data.get("attributes") or {}).items()},
        )


@dataclass(frozen=True)
class FlatLog:
    events: tuple[FlatEvent, ...]
    source_name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "events", tuple(self.events))

    def __len__(self) -> int:
        return len(self.events)

    def activities(self) -> list[str]:
        return sorted({e.activity for e in self.events})

    def cases(self) -> dict[str, list[FlatEvent]]:
        """Events grouped by case, each case time-ordered.

        Cases appear in order of first occurrence; ties on start_ts keep
        input order (sorted() is stable).
        """
        grouped: dict[str, list[FlatEvent]] = {}
        for event in self.events:
            grouped.setdefault(event.case_id, []).append(event)
        return {cid: sorted(evs, key=lambda e: e.start_ts) for cid, evs in grouped.items()}

    def to_dict(self) -> dict:
        return {"source_name": self.source_name, "events": [e.to_dict() for e in self.events]}

    @classmethod
    def from_dict(cls, data: Mapping) -> FlatLog:
        return cls(tuple(FlatEvent.from_dict(e) for e in data["events"]), data.get("source_name", ""))


@dataclass
class EdgeStats:
    frequency: int = 0
    durations: list[timedelta] = field(default_factory=list)


@dataclass
class DirectlyFollowsGraph:
    activity_nodes: dict[str, int]
    edges: dict[tuple[str, str], EdgeStats]
    case_count: int

    def edge_total(self) -> int:
        return sum(s.frequency for s in self.edges.values())


@dataclass
class FlatteningReport:
    duplicated_event_count: int
    false_rework_edge_count: int
    per_activity_inflation: dict[str, tuple[int, int]]
    dropped_event_count: int = 0
    false_rework_edges: dict[tuple[str, str], int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "duplicated_event_count": self.duplicated_event_count,
            "false_rework_edge_count": self.false_rework_edge_count,
            "dropped_event_count": self.dropped_event_count,
            "per_activity_inflation": {
                a: {"flat": f, "distinct": d} for a, (f, d) in sorted(self.per_activity_inflation.items())
            },
            "false_rework_edges": [
                {"from": a, "to": b, "occurrences": n} for (a, b), n in sorted(self.false_rework_edges.items())
            ],
        }


# -- CSV ---------------------------------------------------------------------


def _read_bytes(source: bytes | BinaryIO) -> str:
    data = source if isinstance(source, (bytes, bytearray)) else source.read()
    return bytes(data).decode("utf-8-sig")


def parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def read_csv_table(source: bytes | BinaryIO) -> tuple[list[str], list[dict[str, str]]]:
    """Read a comma-separated, double-quoted CSV with a mandatory header."""
    reader = csv.DictReader(io.StringIO(_read_bytes(source), newline=""))
    header = list(reader.fieldnames or [])
    return header, list(reader)


def resolve_columns(header: list[str], column_config: Mapping[str, str] | None,
                    mandatory: tuple[str, ...] = MANDATORY_ROLES) -> dict[str, str]:
    config = dict(DEFAULT_COLUMNS if column_config is None else column_config)
    for role in mandatory:
        column = config.get(role)
        if column is None or column not in header:
            raise SchemaError(f"missing mandatory column for role {role!r} ({column!r})")
    return {role: col for role, col in config.items() if role in ROLES and col in header}


def parse_optional_fields(record: Mapping[str, str], columns: Mapping[str, str], row_number: int) -> dict:
    """Parse end_ts/resource/cost/automated cells; empty cells mean absent."""

    def cell(role: str) -> str:
        col = columns.get(role)
        return (record.get(col) or "").strip() if col else ""

    out: dict = {}
    try:
        out["end_ts"] = parse_timestamp(cell("end_ts")) if cell("end_ts") else None
    except ValueError as exc:
        raise RowError(row_number, f"unparseable end timestamp: {exc}") from None
    out["resource"] = cell("resource") or None
    if cell("cost"):
        try:
            out["cost"] = Decimal(cell("cost"))
        except InvalidOperation:
            raise RowError(row_number, f"unparseable cost {cell('cost')!r}") from None
    else:
        out["cost"] = None
    try:
        out["automated"] = parse_bool(cell("automated")) if cell("automated") else None
    except ValueError as exc:
        raise RowError(row_number, str(exc)) from None
    return out


def parse_flat_csv(source: bytes | BinaryIO, column_config: Mapping[str, str] | None = None,
                   source_name: str = "") -> FlatLog:
    """Parse a flat event log CSV.

    ``column_config`` maps roles (``case_id``, ``activity``, ``start_ts`` and
    optionally ``end_ts``, ``resource``, ``cost``, ``automated``) to header
    names.  Columns not bound to a role become string attributes.  Row
    numbers in errors count data rows from 1.
    """
    header, records = read_csv_table(source)
    columns = resolve_columns(header, column_config)
    if not records:
        raise EmptyLogError(f"empty log: {source_name or 'input'} has no data rows")
    role_columns = set(columns.values())
    extra = [h for h in header if h not in role_columns]
    events = []
    for number, record in enumerate(records, start=1):
        case_id = (record.get(columns["case_id"]) or "").strip()
        activity = (record.get(columns["activity"]) or "").strip()
        if not case_id or not activity:
            raise RowError(number, "case_id and activity must be non-empty")
        try:
            start = parse_timestamp(record.get(columns["start_ts"]) or "")
        except ValueError as exc:
            raise RowError(number, f"unparseable timestamp: {exc}") from None
        optional = parse_optional_fields(record, columns, number)
        attributes = {h: record[h] for h in extra if record.get(h)}
        try:
            events.append(FlatEvent(case_id, activity, start, attributes=attributes, **optional))
        except ValueError as exc:
            raise RowError(number, str(exc)) from None
    return FlatLog(tuple(events), source_name)


def write_flat_csv(log: FlatLog, column_config: Mapping[str, str] | None = None) -> bytes:
    config = dict(DEFAULT_COLUMNS if column_config is None else column_config)
    roles = list(MANDATORY_ROLES)
    for role in ("end_ts", "resource", "cost", "automated"):
        if any(getattr(e, role) is not None for e in log.events):
            roles.append(role)
    attr_keys = sorted({k for e in log.events for k in e.attributes})
    buffer = io.StringIO(newline="")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([config[r] for r in roles] + attr_keys)
    for event in log.events:
        payload = event.to_dict()
        row = []
        for role in roles:
            value = payload.get(role)
            if value is None:
                row.append("")
            elif isinstance(value, bool):
                row.append("true" if value else "false")
            else:
                row.append(str(value))
        row.extend(event.attributes.get(k, "") for k in attr_keys)
        writer.writerow(row)
    return buffer.getvalue().encode("utf-8")


# -- discovery ---------------------------------------------------------------


def discover_dfg(log: FlatLog) -> DirectlyFollowsGraph:
    if not log.events:
        raise EmptyLogError()
    nodes: Counter[str] = Counter()
    edges: dict[tuple[str, str], EdgeStats] = defaultdict(EdgeStats)
    cases = log.cases()
    for trace in cases.values():
        nodes.update(e.activity for e in trace)
        for pred, succ in zip(trace, trace[1:]):
            stats = edges[(pred.activity, succ.activity)]
            stats.frequency += 1
            stats.durations.append(wait_between(pred.start_ts, pred.end_ts, succ.start_ts))
    return DirectlyFollowsGraph(dict(nodes), dict(edges), len(cases))


# -- flattening --------------------------------------------------------------


def flatten_ocel(log: OCELog, target_type: str) -> tuple[FlatLog, FlatteningReport]:
    """Project an object-centric log onto one object type.

    Every event is copied once per related object of ``target_type`` (that
    object id becomes the case id); events with no such object are dropped.
    A flattened a->a step counts as false rework when the two events share
    no object outside the target type while at least one of them has such
    objects, i.e. the repetition only exists because sibling objects were
    interleaved into one case.
    """
    if target_type not in log.types:
        raise SchemaError(f"unknown object type {target_type!r}")
    type_of = {oid: obj.type for oid, obj in log.objects.items()}

    rows: list[FlatEvent] = []
    non_target: dict[str, frozenset[str]] = {}
    emitted = dropped = 0
    flat_counts: Counter[str] = Counter()
    distinct_counts: Counter[str] = Counter()
    for event in log.events:
        targets = [oid for oid, _ in event.e2o if type_of[oid] == target_type]
        if not targets:
            dropped += 1
            continue
        emitted += 1
        distinct_counts[event.activity] += 1
        non_target[event.event_id] = frozenset(oid for oid, _ in event.e2o if type_of[oid] != target_type)
        attributes = {k: str(v) for k, v in event.attributes.items()}
        attributes["event_id"] = event.event_id
        for oid in sorted(targets):
            rows.append(FlatEvent(oid, event.activity, event.timestamp, attributes=attributes))
            flat_counts[event.activity] += 1

    flat = FlatLog(tuple(rows), f"{target_type} view")
    false_edges: Counter[tuple[str, str]] = Counter()
    for trace in flat.cases().values():
        for pred, succ in zip(trace, trace[1:]):
            if pred.activity != succ.activity:
                continue
            left = non_target[pred.attributes["event_id"]]
            right = non_target[succ.attributes["event_id"]]
            if not (left & right) and (left or right):
                false_edges[(pred.activity, succ.activity)] += 1

    report = FlatteningReport(
        duplicated_event_count=len(rows) - emitted,
        false_rework_edge_count=sum(false_edges.values()),
        per_activity_inflation={a: (flat_counts[a], distinct_counts[a]) for a in sorted(distinct_counts)},
        dropped_event_count=dropped,
        false_rework_edges=dict(false_edges),
    )
    return flat, report
