"""Object-centric event logs.

A log holds typed objects (with attribute values that may change over time),
events with exactly one timestamp linked to one or more objects, and
qualified object-to-object relations.  Activity characteristics summarize,
per activity, how many objects of each type its events touch.
"""

from __future__ import annotations

import bisect
import json
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Any, Iterable, Mapping

from procmine.errors import EmptyLogError, IntegrityError, SchemaError
from procmine.timestamps import format_timestamp, normalize, parse_timestamp

VALUE_KINDS = ("string", "number", "boolean", "timestamp")


@dataclass(frozen=True)
class OCObjectType:
    name: str
    attribute_schema: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for attr, kind in self.attribute_schema.items():
            if kind not in VALUE_KINDS:
                raise SchemaError(f"type {self.name}: attribute {attr} has unknown kind {kind!r}")


@dataclass(frozen=True)
class OCObject:
    object_id: str
    type: str
    attribute_timeline: tuple[tuple[datetime, str, Any], ...] = ()


@dataclass(frozen=True)
class OCEvent:
    event_id: str
    activity: str
    timestamp: datetime
    e2o: tuple[tuple[str, str | None], ...]
    attributes: Mapping[str, Any] = field(default_factory=dict)

    def object_ids(self) -> list[str]:
        return [oid for oid, _ in self.e2o]


@dataclass(frozen=True)
class O2ORelation:
    source_object_id: str
    target_object_id: str
    qualifier: str | None = None


@dataclass(frozen=True)
class OCELog:
    """Validated object-centric log.

    ``events`` is sorted by timestamp (ties keep input order);
    ``source_order`` remembers the event ids as they were supplied, which
    the quality report needs to detect out-of-order input.
    """

    types: Mapping[str, OCObjectType]
    objects: Mapping[str, OCObject]
    events: tuple[OCEvent, ...]
    o2o: tuple[O2ORelation, ...] = ()
    source_order: tuple[str, ...] = ()

    @classmethod
    def build(cls, types: Iterable[OCObjectType], objects: Iterable[OCObject],
              events: Iterable[OCEvent], o2o: Iterable[O2ORelation] = ()) -> OCELog:
        type_map: dict[str, OCObjectType] = {}
        for t in types:
            if t.name in type_map:
                raise IntegrityError(f"duplicate object type {t.name}", [t.name])
            type_map[t.name] = t
        object_map: dict[str, OCObject] = {}
        for obj in objects:
            if obj.object_id in object_map:
                raise IntegrityError(f"duplicate object id {obj.object_id}", [obj.object_id])
            if obj.type not in type_map:
                raise IntegrityError(f"object {obj.object_id} has unknown type {obj.type}", [obj.object_id])
            timeline = tuple(sorted(((normalize(t), a, v) for t, a, v in obj.attribute_timeline),
                                    key=lambda item: item[0]))
            object_map[obj.object_id] = OCObject(obj.object_id, obj.type, timeline)

        events = list(events)
        seen: set[str] = set()
        dangling: list[str] = []
        for ev in events:
            if ev.event_id in seen:
                raise IntegrityError(f"duplicate event id {ev.event_id}", [ev.event_id])
            seen.add(ev.event_id)
            if not ev.e2o:
                raise IntegrityError(f"event {ev.event_id} is not linked to any object", [ev.event_id])
            ids = ev.object_ids()
            if len(set(ids)) != len(ids):
                raise IntegrityError(f"event {ev.event_id} references an object twice", [ev.event_id])
            dangling.extend(oid for oid in ids if oid not in object_map)
        relations = list(o2o)
        for rel in relations:
            if rel.source_object_id == rel.target_object_id:
                raise IntegrityError(f"self relation on {rel.source_object_id}", [rel.source_object_id])
            dangling.extend(oid for oid in (rel.source_object_id, rel.target_object_id) if oid not in object_map)
        if dangling:
            missing = sorted(set(dangling))
            raise IntegrityError(f"unknown object ids: {', '.join(missing)}", missing)

        normalized = [
            OCEvent(ev.event_id, ev.activity, normalize(ev.timestamp), tuple(ev.e2o), dict(ev.attributes))
            for ev in events
        ]
        ordered = tuple(sorted(normalized, key=lambda e: e.timestamp))
        return cls(type_map, object_map, ordered, tuple(relations), tuple(e.event_id for e in events))

    def event(self, event_id: str) -> OCEvent:
        for ev in self.events:
            if ev.event_id == event_id:
                return ev
        raise KeyError(event_id)

    def activities(self) -> list[str]:
        return sorted({e.activity for e in self.events})

    def type_of(self, object_id: str) -> str:
        return self.objects[object_id].type


# -- JSON --------------------------------------------------------------------


def _load(source: str | bytes | Mapping) -> Mapping:
    if isinstance(source, Mapping):
        return source
    return json.loads(source)


def _timestamp(raw: Any, where: str) -> datetime:
    try:
        return parse_timestamp(str(raw))
    except ValueError as exc:
        raise SchemaError(f"{where}: bad timestamp {raw!r} ({exc})") from None


def parse_ocel_json(source: str | bytes | Mapping) -> OCELog:
    """Parse and validate an OCEL JSON document (see README for the layout)."""
    data = _load(source)
    try:
        types = [
            OCObjectType(t["name"], {a["name"]: a["kind"] for a in t.get("attributes", [])})
            for t in data["objectTypes"]
        ]
        objects = [
            OCObject(o["id"], o["type"], tuple(
                (_timestamp(a["time"], f"object {o['id']}"), a["name"], a["value"])
                for a in o.get("attributes", [])))
            for o in data["objects"]
        ]
        events = [
            OCEvent(
                e["id"], e["activity"], _timestamp(e["time"], f"event {e['id']}"),
                tuple((r["objectId"], r.get("qualifier")) for r in e.get("relationships", [])),
                dict(e.get("attributes") or {}),
            )
            for e in data["events"]
        ]
        o2o = [O2ORelation(r["source"], r["target"], r.get("qualifier")) for r in data.get("o2o", [])]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed OCEL document: missing {exc}") from None
    return OCELog.build(types, objects, events, o2o)


def ocel_to_dict(log: OCELog) -> dict:
    by_id = {e.event_id: e for e in log.events}

    def qualified(entry: dict, qualifier: str | None) -> dict:
        if qualifier is not None:
            entry["qualifier"] = qualifier
        return entry

    return {
        "objectTypes": [
            {"name": t.name, "attributes": [{"name": a, "kind": k} for a, k in t.attribute_schema.items()]}
            for t in log.types.values()
        ],
        "objects": [
            {"id": o.object_id, "type": o.type,
             "attributes": [{"time": format_timestamp(t), "name": a, "value": v} for t, a, v in o.attribute_timeline]}
            for o in log.objects.values()
        ],
        "events": [
            {"id": e.event_id, "activity": e.activity, "time": format_timestamp(e.timestamp),
             "relationships": [qualified({"objectId": oid}, q) for oid, q in e.e2o],
             "attributes": dict(e.attributes)}
            for e in (by_id[eid] for eid in log.source_order)
        ],
        "o2o": [qualified({"source": r.source_object_id, "target": r.target_object_id}, r.qualifier)
                for r in log.o2o],
    }


def write_ocel_json(log: OCELog) -> str:
    return json.dumps(ocel_to_dict(log), indent=2, ensure_ascii=False) + "\n"


# -- quality -----------------------------------------------------------------


@dataclass
class QualityReport:
    out_of_order_pairs: int
    out_of_order_events: list[str]
    unreferenced_objects: list[str]
    accuracy_violations: list[dict]
    latest_timestamp: datetime | None
    log_age: timedelta | None

    def to_dict(self) -> dict:
        return {
            "consistency": {"out_of_order_pairs": self.out_of_order_pairs,
                            "out_of_order_events": self.out_of_order_events},
            "completeness": {"unreferenced_objects": self.unreferenced_objects},
            "accuracy": {"violations": self.accuracy_violations},
            "timeliness": {
                "latest_timestamp": format_timestamp(self.latest_timestamp) if self.latest_timestamp else None,
                "log_age_seconds": self.log_age.total_seconds() if self.log_age is not None else None,
            },
        }


def _value_fits(kind: str, value: Any) -> bool:
    if kind == "string":
        return isinstance(value, str)
    if kind == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind == "boolean":
        return isinstance(value, bool)
    if not isinstance(value, str):
        return False
    try:
        parse_timestamp(value)
    except ValueError:
        return False
    return True


def _count_inversions(values: list[datetime]) -> int:
    """Pairs i < j with values[i] > values[j]."""
    seen: list[datetime] = []
    inversions = 0
    for value in values:
        inversions += len(seen) - bisect.bisect_right(seen, value)
        bisect.insort(seen, value)
    return inversions


def validate_quality(log: OCELog, now: datetime | None = None, *, include_age: bool = True) -> QualityReport:
    """Completeness, consistency, accuracy and timeliness checks.

    Consistency is judged on the order events were supplied in, not the
    sorted order the log keeps internally.
    """
    by_id = {e.event_id: e for e in log.events}
    supplied = [by_id[eid].timestamp for eid in log.source_order]
    late: list[str] = []
    running_max: datetime | None = None
    for eid, ts in zip(log.source_order, supplied):
        if running_max is not None and ts < running_max:
            late.append(eid)
        running_max = ts if running_max is None else max(running_max, ts)

    referenced = {oid for e in log.events for oid in e.object_ids()}
    unreferenced = sorted(oid for oid in log.objects if oid not in referenced)

    violations = []
    for obj in log.objects.values():
        schema = log.types[obj.type].attribute_schema
        for ts, attr, value in obj.attribute_timeline:
            kind = schema.get(attr)
            if kind is None:
                reason = "attribute not declared for type"
            elif not _value_fits(kind, value):
                reason = f"value does not match kind {kind}"
            else:
                continue
            violations.append({"object": obj.object_id, "attribute": attr, "time": format_timestamp(ts),
                               "value": value, "reason": reason})

    latest = max(supplied) if supplied else None
    age = None
    if include_age and latest is not None:
        age = normalize(now or datetime.now(timezone.utc)) - latest
    return QualityReport(_count_inversions(supplied), late, unreferenced, violations, latest, age)


# -- activity characteristics --------------------------------------------------


@dataclass(frozen=True, order=True)
class ExecutionMode:
    """Multiset of object types touched by one event (type -> positive count)."""

    counts: tuple[tuple[str, int], ...]

    @classmethod
    def of(cls, counts: Mapping[str, int]) -> ExecutionMode:
        items = tuple(sorted((t, n) for t, n in counts.items() if n > 0))
        if not items:
            raise ValueError("execution mode needs at least one object")
        return cls(items)

    def as_dict(self) -> dict[str, int]:
        return dict(self.counts)

    def total(self) -> int:
        return sum(n for _, n in self.counts)

    def __str__(self) -> str:
        return "{" + ", ".join(f"{t}:{n}" for t, n in self.counts) + "}"


@dataclass(frozen=True)
class CountStats:
    min: int
    max: int
    mean: float


@dataclass
class ActivityCharacteristics:
    stats: dict[tuple[str, str], CountStats]
    modes: dict[str, Counter[ExecutionMode]]
    aot: frozenset[tuple[str, str]]
    occ: Counter[tuple[str, ExecutionMode]]
    frequency: dict[str, int]

    def to_dict(self) -> dict:
        activities = sorted(self.frequency)
        return {
            "activities": {
                a: {
                    "frequency": self.frequency[a],
                    "execution_modes": [
                        {"mode": mode.as_dict(), "count": n} for mode, n in sorted(self.modes[a].items())
                    ],
                    "object_counts": {
                        ot: {"min": s.min, "max": s.max, "mean": s.mean}
                        for (act, ot), s in sorted(self.stats.items()) if act == a
                    },
                }
                for a in activities
            },
            "aot": [list(pair) for pair in sorted(self.aot)],
            "occ": [{"activity": a, "mode": m.as_dict(), "count": n} for (a, m), n in sorted(self.occ.items())],
        }


def execution_mode(event: OCEvent, log: OCELog) -> ExecutionMode:
    return ExecutionMode.of(Counter(log.type_of(oid) for oid in event.object_ids()))


def activity_characteristics(log: OCELog) -> ActivityCharacteristics:
    """Per-activity object involvement statistics.

    min/max/mean for (activity, type) range over every event of the
    activity, so events that skip the type contribute a zero.
    """
    if not log.events:
        raise EmptyLogError()
    per_activity: dict[str, list[Counter[str]]] = {}
    occ: Counter[tuple[str, ExecutionMode]] = Counter()
    modes: dict[str, Counter[ExecutionMode]] = {}
    for ev in log.events:
        tally = Counter(log.type_of(oid) for oid in ev.object_ids())
        per_activity.setdefault(ev.activity, []).append(tally)
        mode = ExecutionMode.of(tally)
        occ[(ev.activity, mode)] += 1
        modes.setdefault(ev.activity, Counter())[mode] += 1

    stats: dict[tuple[str, str], CountStats] = {}
    aot = set()
    for activity, tallies in per_activity.items():
        for ot in log.types:
            counts = [t[ot] for t in tallies]
            stats[(activity, ot)] = CountStats(min(counts), max(counts), sum(counts) / len(counts))
            if max(counts) > 0:
                aot.add((activity, ot))
    return ActivityCharacteristics(
        stats=stats,
        modes=modes,
        aot=frozenset(aot),
        occ=occ,
        frequency={a: len(t) for a, t in per_activity.items()},
    )
