"""Multilevel process mining.

Rows of a multilevel log belong to typed business entities (Order, Receipt,
Invoice, ...) identified by one ProcessID column per entity type.  A row with
two populated ProcessIDs is a bridge: it links an instance of the earlier
entity type to an instance of the later one, and the later instance owns the
event.  Cases are composed backwards from the last entity type, so every case
holds exactly one instance of its root type plus everything bridged into it.

Statistics are computed over distinct events and distinct instances, never
per case, so instances shared by several cases are counted once.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from decimal import Decimal
from typing import BinaryIO, Callable, Iterable, Mapping

from procmine.errors import EmptyLogError, QueryError, RowError, SchemaError
from procmine.eventlog import parse_optional_fields, read_csv_table
from procmine.measures import ZERO, ThroughputResult, ThroughputRow, summarize, wait_between
from procmine.ocel import O2ORelation, OCEvent, OCELog, OCObject, OCObjectType
from procmine.timestamps import format_timestamp, normalize, parse_timestamp

Instance = tuple[str, str]  # (entity type, instance id)


def instance_label(instance: Instance) -> str:
    return f"{instance[0]}:{instance[1]}"


@dataclass(frozen=True)
class EntitySchema:
    """Entity types in process order plus the ProcessID column of each."""

    entities: tuple[str, ...]
    processid_columns: Mapping[str, str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entities", tuple(self.entities))
        if not self.entities:
            raise SchemaError("schema needs at least one entity type")
        if len(set(self.entities)) != len(self.entities):
            raise SchemaError("entity type names must be unique")
        missing = [e for e in self.entities if e not in self.processid_columns]
        if missing:
            raise SchemaError(f"no ProcessID column for entity {missing[0]!r}")
        extra = set(self.processid_columns) - set(self.entities)
        if extra:
            raise SchemaError(f"ProcessID column declared for unknown entity {sorted(extra)[0]!r}")
        columns = [self.processid_columns[e] for e in self.entities]
        if len(set(columns)) != len(columns):
            raise SchemaError("two entities share a ProcessID column")

    @property
    def terminal(self) -> str:
        return self.entities[-1]

    def rank(self, entity: str) -> int:
        try:
            return self.entities.index(entity)
        except ValueError:
            raise SchemaError(f"unknown entity type {entity!r}") from None


@dataclass(frozen=True)
class MultilevelRow:
    row_index: int
    activity: str
    start_ts: datetime
    links: tuple[Instance, ...]  # ordered by entity rank
    end_ts: datetime | None = None
    resource: str | None = None
    cost: Decimal | None = None
    automated: bool | None = None
    attributes: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 1 <= len(self.links) <= 2:
            raise ValueError("a row links one or two entity instances")
        if len(self.links) == 2 and self.links[0][0] == self.links[1][0]:
            raise ValueError("bridge rows must link two distinct entity types")
        object.__setattr__(self, "start_ts", normalize(self.start_ts))

    @property
    def owner(self) -> Instance:
        return self.links[-1]

    @property
    def is_bridge(self) -> bool:
        return len(self.links) == 2


@dataclass(frozen=True)
class MultilevelEvent:
    event_id: int
    activity: str
    start_ts: datetime
    owner: Instance
    bridge_links: frozenset[Instance] = frozenset()
    merged_row_indices: frozenset[int] = frozenset()
    end_ts: datetime | None = None
    resource: str | None = None
    cost: Decimal | None = None
    automated: bool | None = None

    @property
    def order_key(self) -> tuple[datetime, int]:
        return (self.start_ts, self.event_id)


@dataclass(frozen=True)
class MultilevelCase:
    case_id: str
    root: Instance
    members: frozenset[Instance]
    events: tuple[MultilevelEvent, ...]

    def has_member(self, entity: str | None, instance_id: str) -> bool:
        return any(m[1] == instance_id and (entity is None or m[0] == entity) for m in self.members)


@dataclass
class ActivityStats:
    entity: str
    frequency: int
    rework: int
    total_cost: Decimal | None = None
    mean_cost: Decimal | None = None
    mean_duration: timedelta | None = None
    median_duration: timedelta | None = None


@dataclass
class ModelEdge:
    frequency: int = 0
    durations: list[timedelta] = field(default_factory=list)
    bridge: bool = False


@dataclass
class MultilevelModel:
    cases: tuple[MultilevelCase, ...]
    events: tuple[MultilevelEvent, ...]
    activity_stats: dict[str, ActivityStats]
    entity_cardinality: dict[str, int]
    edges: dict[tuple[str, str], ModelEdge]

    @property
    def event_count(self) -> int:
        return len(self.events)

    def instances(self) -> set[Instance]:
        return {m for case in self.cases for m in case.members}

    def to_dict(self) -> dict:
        def td(value: timedelta | None) -> float | None:
            return value.total_seconds() if value is not None else None

        return {
            "case_count": len(self.cases),
            "event_count": self.event_count,
            "row_count": sum(len(e.merged_row_indices) for e in self.events),
            "entity_cardinality": dict(self.entity_cardinality),
            "cases": [
                {"case_id": c.case_id,
                 "members": sorted(instance_label(m) for m in c.members),
                 "events": [e.event_id for e in c.events],
                 "rows": sorted(r for e in c.events for r in e.merged_row_indices)}
                for c in self.cases
            ],
            "activities": {
                a: {"entity": s.entity, "frequency": s.frequency, "rework": s.rework,
                    "total_cost": str(s.total_cost) if s.total_cost is not None else None,
                    "mean_cost": str(s.mean_cost) if s.mean_cost is not None else None,
                    "mean_duration_seconds": td(s.mean_duration),
                    "median_duration_seconds": td(s.median_duration)}
                for a, s in sorted(self.activity_stats.items())
            },
            "edges": [
                {"from": a, "to": b, "frequency": e.frequency, "bridge": e.bridge,
                 "mean_wait_seconds": td(summarize(e.durations)["mean"])}
                for (a, b), e in sorted(self.edges.items())
            ],
        }


# -- parsing -----------------------------------------------------------------


def parse_multilevel_csv(source: bytes | BinaryIO, schema: EntitySchema,
                         column_config: Mapping[str, str] | None = None) -> list[MultilevelRow]:
    """Parse a multilevel CSV; an empty ProcessID cell means "not linked".

    ``column_config`` maps ``activity`` and ``start_ts`` (plus optional
    ``end_ts``, ``resource``, ``cost``, ``automated``) to header names.
    """
    config = dict(column_config or {"activity": "activity", "start_ts": "start_ts"})
    header, records = read_csv_table(source)
    for entity in schema.entities:
        if schema.processid_columns[entity] not in header:
            raise SchemaError(f"missing ProcessID column {schema.processid_columns[entity]!r} for {entity}")
    for role in ("activity", "start_ts"):
        if config.get(role) not in header:
            raise SchemaError(f"missing mandatory column for role {role!r} ({config.get(role)!r})")
    if not records:
        raise EmptyLogError()
    columns = {role: col for role, col in config.items() if col in header}
    used = set(columns.values()) | set(schema.processid_columns.values())
    extra = [h for h in header if h not in used]

    rows = []
    for number, record in enumerate(records, start=1):
        links = tuple(
            (entity, (record.get(schema.processid_columns[entity]) or "").strip())
            for entity in schema.entities
            if (record.get(schema.processid_columns[entity]) or "").strip()
        )
        if not links:
            raise RowError(number, "no ProcessID column populated")
        if len(links) > 2:
            raise RowError(number, f"canonical two-link rule violated ({len(links)} ProcessID columns populated)")
        activity = (record.get(columns["activity"]) or "").strip()
        if not activity:
            raise RowError(number, "activity must be non-empty")
        try:
            start = parse_timestamp(record.get(columns["start_ts"]) or "")
        except ValueError as exc:
            raise RowError(number, f"unparseable timestamp: {exc}") from None
        optional = parse_optional_fields(record, columns, number)
        if optional["end_ts"] is not None and optional["end_ts"] < start:
            raise RowError(number, "end_ts precedes start_ts")
        rows.append(MultilevelRow(number, activity, start, links,
                                  attributes={h: record[h] for h in extra if record.get(h)}, **optional))
    return rows


# -- merge and case composition ----------------------------------------------


def merge_bridge_rows(rows: Iterable[MultilevelRow]) -> list[MultilevelEvent]:
    """Collapse bridge rows that describe one event.

    Bridge rows sharing activity, timestamp and owning (later) instance are
    one event linked to several earlier instances.  Event ids are 1-based
    and follow the input position of each event's first row.
    """
    drafts: list[dict] = []
    by_key: dict[tuple[str, datetime, Instance], dict] = {}
    for row in rows:
        key = (row.activity, row.start_ts, row.owner)
        if row.is_bridge and key in by_key:
            draft = by_key[key]
            draft["bridge_links"].add(row.links[0])
            draft["rows"].add(row.row_index)
            continue
        draft = {"row": row, "bridge_links": {row.links[0]} if row.is_bridge else set(), "rows": {row.row_index}}
        drafts.append(draft)
        if row.is_bridge:
            by_key[key] = draft
    events = []
    for number, draft in enumerate(drafts, start=1):
        row = draft["row"]
        events.append(MultilevelEvent(
            event_id=number, activity=row.activity, start_ts=row.start_ts, owner=row.owner,
            bridge_links=frozenset(draft["bridge_links"]), merged_row_indices=frozenset(draft["rows"]),
            end_ts=row.end_ts, resource=row.resource, cost=row.cost, automated=row.automated,
        ))
    return events


def _bridge_parents(events: Iterable[MultilevelEvent]) -> dict[Instance, set[Instance]]:
    parents: dict[Instance, set[Instance]] = {}
    for ev in events:
        parents.setdefault(ev.owner, set())
        for link in ev.bridge_links:
            parents[ev.owner].add(link)
            parents.setdefault(link, set())
    return parents


def _children(parents: Mapping[Instance, set[Instance]]) -> dict[Instance, set[Instance]]:
    children: dict[Instance, set[Instance]] = {inst: set() for inst in parents}
    for later, earlier_set in parents.items():
        for earlier in earlier_set:
            children[earlier].add(later)
    return children


def _closure(start: Instance, graph: Mapping[Instance, set[Instance]]) -> set[Instance]:
    seen = {start}
    stack = [start]
    while stack:
        for nxt in graph.get(stack.pop(), ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def compose_cases(events: Iterable[MultilevelEvent], schema: EntitySchema) -> list[MultilevelCase]:
    """Build multilevel cases by walking the entity order backwards.

    Each instance of the last entity type roots a case; earlier instances
    bridged (directly or transitively) into a member join it, possibly in
    several cases.  Instances left over are orphans and root their own case,
    earlier entity types being processed after later ones.
    """
    events = list(events)
    parents = _bridge_parents(events)
    for inst in parents:
        schema.rank(inst[0])
    owned: dict[Instance, list[MultilevelEvent]] = {}
    for ev in events:
        owned.setdefault(ev.owner, []).append(ev)

    covered: set[Instance] = set()
    cases = []
    for entity in reversed(schema.entities):
        for root in sorted(i for i in parents if i[0] == entity):
            if root in covered:
                continue
            members = _closure(root, parents)
            covered |= members
            case_events = sorted((e for m in members for e in owned.get(m, ())), key=lambda e: e.order_key)
            cases.append(MultilevelCase(instance_label(root), root, frozenset(members), tuple(case_events)))
    return cases


# -- model -------------------------------------------------------------------


def traces(events: Iterable[MultilevelEvent]) -> dict[Instance, list[MultilevelEvent]]:
    """Time-ordered events per owning instance."""
    out: dict[Instance, list[MultilevelEvent]] = {}
    for ev in sorted(events, key=lambda e: e.order_key):
        out.setdefault(ev.owner, []).append(ev)
    return out


def event_edges(events: Iterable[MultilevelEvent]) -> list[tuple[MultilevelEvent, MultilevelEvent, bool]]:
    """Directly-follows steps as (predecessor, successor, is_bridge).

    Steps come from each instance's own trace; a bridge event is also
    preceded by the latest earlier event of every instance it links.
    """
    by_owner = traces(events)
    steps = []
    for trace in by_owner.values():
        steps.extend((a, b, False) for a, b in zip(trace, trace[1:]))
    for trace in by_owner.values():
        for ev in trace:
            for link in sorted(ev.bridge_links):
                prior = [p for p in by_owner.get(link, ()) if p.order_key < ev.order_key]
                if prior:
                    steps.append((prior[-1], ev, True))
    return steps


def _aggregate(cases: Iterable[MultilevelCase]) -> MultilevelModel:
    cases = tuple(cases)
    unique: dict[int, MultilevelEvent] = {}
    for case in cases:
        for ev in case.events:
            unique.setdefault(ev.event_id, ev)
    events = tuple(sorted(unique.values(), key=lambda e: e.event_id))

    cardinality: Counter[str] = Counter()
    for inst in {m for c in cases for m in c.members}:
        cardinality[inst[0]] += 1

    owners: dict[str, Counter[str]] = {}
    for ev in events:
        owners.setdefault(ev.activity, Counter())[ev.owner[0]] += 1
    rework: Counter[str] = Counter()
    for trace in traces(events).values():
        for activity, n in Counter(e.activity for e in trace).items():
            rework[activity] += n - 1

    stats = {}
    for activity in sorted(owners):
        members = [e for e in events if e.activity == activity]
        costs = [e.cost for e in members if e.cost is not None]
        durations = [e.end_ts - e.start_ts for e in members if e.end_ts is not None]
        summary = summarize(durations)
        stats[activity] = ActivityStats(
            entity="/".join(sorted(owners[activity])),
            frequency=len(members),
            rework=rework[activity],
            total_cost=sum(costs, Decimal(0)) if costs else None,
            mean_cost=sum(costs, Decimal(0)) / len(costs) if costs else None,
            mean_duration=summary["mean"],
            median_duration=summary["median"],
        )

    edges: dict[tuple[str, str], ModelEdge] = {}
    for pred, succ, is_bridge in event_edges(events):
        edge = edges.setdefault((pred.activity, succ.activity), ModelEdge())
        edge.frequency += 1
        edge.durations.append(wait_between(pred.start_ts, pred.end_ts, succ.start_ts))
        edge.bridge = edge.bridge or is_bridge
    return MultilevelModel(cases, events, stats, dict(sorted(cardinality.items())), edges)


def build_model(cases: Iterable[MultilevelCase]) -> MultilevelModel:
    cases = tuple(cases)
    if not cases:
        raise EmptyLogError("empty model: no cases")
    return _aggregate(cases)


def filter_cases(model: MultilevelModel, predicate: Callable[[MultilevelCase], bool]) -> MultilevelModel:
    """Keep or drop whole cases; statistics are recomputed on what is kept."""
    return _aggregate(c for c in model.cases if predicate(c))


def member_filter(expr: str) -> Callable[[MultilevelCase], bool]:
    """Predicate from ``"Type:id"`` or a bare ``"id"`` (any entity type)."""
    entity, sep, instance_id = expr.partition(":")
    if not sep:
        entity, instance_id = None, expr
    return lambda case: case.has_member(entity, instance_id)


def mine(rows: Iterable[MultilevelRow], schema: EntitySchema) -> MultilevelModel:
    return build_model(compose_cases(merge_bridge_rows(rows), schema))


# -- conformance ---------------------------------------------------------------


@dataclass(frozen=True)
class ReferenceModel:
    """Multi-entity reference: allowed activities and directly-follows steps.

    Entity cardinalities are deliberately absent.  An activity whose entity
    is ``None`` is accepted for any owning entity type.  Empty start/end sets
    disable those checks.
    """

    activities: frozenset[tuple[str, str | None]]
    allowed_edges: frozenset[tuple[str, str]]
    start_activities: frozenset[str] = frozenset()
    end_activities: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        names = {a for a, _ in self.activities}
        for a, b in self.allowed_edges:
            if a not in names or b not in names:
                raise SchemaError(f"reference edge {a} -> {b} uses an undeclared activity")

    def allows_activity(self, activity: str, entity: str) -> bool:
        return (activity, entity) in self.activities or (activity, None) in self.activities

    @classmethod
    def from_model(cls, model: MultilevelModel) -> ReferenceModel:
        steps = event_edges(model.events)
        has_pred = {s.event_id for _, s, _ in steps}
        has_succ = {p.event_id for p, _, _ in steps}
        return cls(
            activities=frozenset((e.activity, e.owner[0]) for e in model.events),
            allowed_edges=frozenset(model.edges),
            start_activities=frozenset(e.activity for e in model.events if e.event_id not in has_pred),
            end_activities=frozenset(e.activity for e in model.events if e.event_id not in has_succ),
        )

    @classmethod
    def from_dict(cls, data: Mapping) -> ReferenceModel:
        try:
            return cls(
                activities=frozenset((a["activity"], a.get("entity")) for a in data["activities"]),
                allowed_edges=frozenset((a, b) for a, b in data.get("edges", [])),
                start_activities=frozenset(data.get("start", [])),
                end_activities=frozenset(data.get("end", [])),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed reference model: {exc}") from None

    def to_dict(self) -> dict:
        return {
            "activities": [{"activity": a, "entity": e}
                           for a, e in sorted(self.activities, key=lambda p: (p[0], p[1] or ""))],
            "edges": [list(edge) for edge in sorted(self.allowed_edges)],
            "start": sorted(self.start_activities),
            "end": sorted(self.end_activities),
        }


@dataclass
class CaseConformance:
    conformant: bool
    violations: list[tuple[int, str]]


@dataclass
class ConformanceResult:
    per_case: dict[str, CaseConformance]
    entity_flags: dict[Instance, bool]  # True = conformant

    def non_conformant_entities(self) -> set[Instance]:
        return {inst for inst, ok in self.entity_flags.items() if not ok}

    def to_dict(self) -> dict:
        return {
            "cases": {
                cid: {"conformant": r.conformant,
                      "violations": [{"event_id": eid, "reason": why} for eid, why in r.violations]}
                for cid, r in self.per_case.items()
            },
            "entities": {instance_label(i): ok for i, ok in sorted(self.entity_flags.items())},
            "conformant_cases": sum(r.conformant for r in self.per_case.values()),
            "total_cases": len(self.per_case),
        }


def check_conformance(model: MultilevelModel, reference: ReferenceModel) -> ConformanceResult:
    """Replay every case against the reference.

    The replayed steps are the case's own directly-follows steps (instance
    traces plus bridge steps).  One violation makes the whole case, and every
    entity in it, non-conformant; entity ratios are never examined.
    """
    if not reference.activities:
        raise SchemaError("empty reference model")
    per_case: dict[str, CaseConformance] = {}
    flags: dict[Instance, bool] = {}
    for case in model.cases:
        violations: list[tuple[int, str]] = []
        steps = event_edges(case.events)
        incoming: dict[int, list[MultilevelEvent]] = {}
        outgoing: set[int] = set()
        for pred, succ, _ in steps:
            incoming.setdefault(succ.event_id, []).append(pred)
            outgoing.add(pred.event_id)
        for ev in case.events:
            if not reference.allows_activity(ev.activity, ev.owner[0]):
                violations.append((ev.event_id, f"activity {ev.activity!r} ({ev.owner[0]}) not in reference"))
            for pred in incoming.get(ev.event_id, ()):
                if (pred.activity, ev.activity) not in reference.allowed_edges:
                    violations.append((ev.event_id, f"step {pred.activity!r} -> {ev.activity!r} not allowed"))
            if (reference.start_activities and ev.event_id not in incoming
                    and ev.activity not in reference.start_activities):
                violations.append((ev.event_id, f"{ev.activity!r} is not a start activity"))
            if (reference.end_activities and ev.event_id not in outgoing
                    and ev.activity not in reference.end_activities):
                violations.append((ev.event_id, f"{ev.activity!r} is not an end activity"))
        ok = not violations
        per_case[case.case_id] = CaseConformance(ok, violations)
        for member in case.members:
            flags[member] = flags.get(member, True) and ok
    return ConformanceResult(per_case, dict(sorted(flags.items())))


# -- throughput ----------------------------------------------------------------


def _shortest_path(start: Instance, goal: Instance, graph: Mapping[Instance, set[Instance]]) -> list[Instance] | None:
    previous: dict[Instance, Instance | None] = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            path = [node]
            while previous[path[-1]] is not None:
                path.append(previous[path[-1]])
            return path[::-1]
        for nxt in sorted(graph.get(node, ())):
            if nxt not in previous:
                previous[nxt] = node
                queue.append(nxt)
    return None


def throughput(model: MultilevelModel, from_activity: str, to_activity: str,
               occurrence: str = "first", use_end: bool = False) -> ThroughputResult:
    """Elapsed time between two activities for every linked instance pair.

    Within each case, an instance executing ``from_activity`` is paired with
    every instance executing ``to_activity`` that is the same instance or is
    reachable from it along bridge links in either direction.  A pair shared
    by several cases is measured once.  ``occurrence`` picks the first or
    last execution per instance.  Duration is start-to-start, or
    end-to-start with ``use_end`` when the source event has an end.
    Pairs whose target precedes the source are skipped and counted.
    """
    known = {e.activity for e in model.events}
    for activity in (from_activity, to_activity):
        if activity not in known:
            raise QueryError(f"unknown activity {activity!r}")
    if occurrence not in ("first", "last"):
        raise QueryError(f"occurrence must be 'first' or 'last', not {occurrence!r}")

    seen: set[tuple[Instance, Instance]] = set()
    rows: list[ThroughputRow] = []
    skipped = 0
    for case in model.cases:
        parents = _bridge_parents(case.events)
        children = _children(parents)
        by_owner = traces(case.events)

        def pick(activity: str) -> dict[Instance, MultilevelEvent]:
            chosen = {}
            for inst, trace in by_owner.items():
                hits = [e for e in trace if e.activity == activity]
                if hits:
                    chosen[inst] = hits[0] if occurrence == "first" else hits[-1]
            return chosen

        sources, targets = pick(from_activity), pick(to_activity)
        for source in sorted(sources):
            forward = _closure(source, children)
            backward = _closure(source, parents)
            for target in sorted(targets):
                if (source, target) in seen:
                    continue
                if target in forward:
                    path = _shortest_path(source, target, children)
                elif target in backward:
                    path = _shortest_path(source, target, parents)
                else:
                    continue
                seen.add((source, target))
                s_ev, t_ev = sources[source], targets[target]
                anchor = s_ev.end_ts if use_end and s_ev.end_ts is not None else s_ev.start_ts
                duration = t_ev.start_ts - anchor
                if duration < ZERO:
                    skipped += 1
                    continue
                rows.append(ThroughputRow(source, target, tuple(path), duration, anchor, t_ev.start_ts,
                                          str(s_ev.event_id), str(t_ev.event_id)))
    rows.sort(key=lambda r: (r.from_entity, r.to_entity))
    return ThroughputResult.from_rows(rows, skipped)


# -- object-centric view -------------------------------------------------------


def to_ocel(events: Iterable[MultilevelEvent], schema: EntitySchema) -> OCELog:
    """Express merged multilevel events as an object-centric log.

    Each event is related to its owner, its bridge links and every later
    instance its owner is bridged into, which is what a flat extraction
    keyed on a later entity would replicate the event for.
    """
    events = list(events)
    parents = _bridge_parents(events)
    children = _children(parents)
    types = [OCObjectType(e) for e in schema.entities]
    objects = [OCObject(instance_label(i), i[0]) for i in sorted(parents, key=lambda i: (schema.rank(i[0]), i[1]))]
    oc_events = []
    for ev in events:
        related = {ev.owner} | set(ev.bridge_links) | _closure(ev.owner, children)
        e2o = tuple((instance_label(i), None) for i in sorted(related, key=lambda i: (schema.rank(i[0]), i[1])))
        attributes = {"rows": ",".join(str(r) for r in sorted(ev.merged_row_indices))}
        oc_events.append(OCEvent(f"e{ev.event_id}", ev.activity, ev.start_ts, e2o, attributes))
    o2o = [O2ORelation(instance_label(earlier), instance_label(later), "bridge")
           for later in sorted(parents) for earlier in sorted(parents[later])]
    return OCELog.build(types, objects, oc_events, o2o)


def rows_to_csv_records(rows: Iterable[MultilevelRow], schema: EntitySchema,
                        activity_column: str = "activity", timestamp_column: str = "start_ts") -> list[dict[str, str]]:
    records = []
    for row in rows:
        links = dict(row.links)
        record = {schema.processid_columns[e]: links.get(e, "") for e in schema.entities}
        record[activity_column] = row.activity
        record[timestamp_column] = format_timestamp(row.start_ts)
        records.append(record)
    return records
