"""Queries over an organizational model: measures, path statistics,
throughput and conformance primitives."""

from __future__ import annotations

import csv
import io
import itertools
import statistics
from collections import Counter
from dataclasses import dataclass, field
from datetime import timedelta
from decimal import Decimal

from procmine.errors import ConfigError, QueryError
from procmine.measures import ZERO, ThroughputResult, ThroughputRow, wait_between
from procmine.orgmine.graph import ObjectRef
from procmine.orgmine.model import OrgModel, UnifiedEntry, related


def _require(model: OrgModel, *activities: str) -> None:
    for activity in activities:
        if activity not in model.nodes:
            raise QueryError(f"unknown activity {activity!r}")


@dataclass
class ActivityMeasures:
    activity: str
    process_name: str
    frequency: int
    rework: int
    average_duration: timedelta | None
    median_duration: timedelta | None
    cost: Decimal | None
    overall_cost: Decimal | None
    automated_ratio: float
    model_coverage: float

    def to_dict(self) -> dict:
        def td(v: timedelta | None) -> float | None:
            return v.total_seconds() if v is not None else None

        return {
            "process": self.process_name,
            "frequency": self.frequency,
            "rework": self.rework,
            "average_duration_seconds": td(self.average_duration),
            "median_duration_seconds": td(self.median_duration),
            "cost": str(self.cost) if self.cost is not None else None,
            "overall_cost": str(self.overall_cost) if self.overall_cost is not None else None,
            "automated_ratio": self.automated_ratio,
            "model_coverage": self.model_coverage,
        }


def activity_stats(model: OrgModel, activity: str) -> ActivityMeasures:
    _require(model, activity)
    entries = [e for e in model.unified.entries if e.activity == activity]
    per_case = Counter(e.event.case_id for e in entries)
    durations = sorted(e.event.duration for e in entries if e.event.duration is not None)
    costs = [e.event.cost for e in entries if e.event.cost is not None]
    incident = [k for k in model.edges if activity in k]
    visible = [k for k in incident if k not in model.hidden_edges]
    return ActivityMeasures(
        activity=activity,
        process_name=model.nodes[activity].process_name,
        frequency=len(entries),
        rework=sum(n - 1 for n in per_case.values()),
        average_duration=sum(durations, ZERO) / len(durations) if durations else None,
        median_duration=statistics.median(durations) if durations else None,
        cost=sum(costs, Decimal(0)) / len(costs) if costs else None,
        overall_cost=sum(costs, Decimal(0)) if costs else None,
        automated_ratio=sum(1 for e in entries if e.event.automated) / len(entries),
        model_coverage=len(visible) / len(incident) if incident else 1.0,
    )


# -- path statistics -----------------------------------------------------------


def join_tuples(model: OrgModel, root: ObjectRef) -> list[dict[str, str | None]]:
    """Outer-join tuples over the path tables, anchored at ``root``.

    A table with no row joined to its neighbour on the root side gets
    ``None``, as does everything beyond it.
    """
    graph = model.unified.graph
    edges = model.unified.path.edges_used
    tables = model.unified.path.tables_in_order

    def subtree(table: str, parent: str | None) -> list[str]:
        out = [table]
        for e in edges:
            if e.touches(table) and e.other(table) != parent:
                out.extend(subtree(e.other(table), table))
        return out

    def expand(table: str, key: str, parent: str | None) -> list[dict[str, str | None]]:
        branches: list[list[dict[str, str | None]]] = []
        for e in edges:
            if not e.touches(table) or e.other(table) == parent:
                continue
            child = e.other(table)
            keys = sorted(graph.joined_keys(e, table, [key]))
            if keys:
                branches.append([a for k in keys for a in expand(child, k, table)])
            else:
                branches.append([{t: None for t in subtree(child, table)}])
        combos = []
        for parts in itertools.product(*branches):
            merged: dict[str, str | None] = {table: key}
            for part in parts:
                merged.update(part)
            combos.append(merged)
        return combos

    return [{t: a[t] for t in tables} for a in expand(root[0], root[1], None)]


@dataclass
class PathStatsRow:
    ids: tuple[str | None, ...]
    count: int = 0
    wait_times: list[timedelta] = field(default_factory=list)

    @property
    def wait_time(self) -> timedelta:
        return sum(self.wait_times, ZERO) / len(self.wait_times)


@dataclass
class PathStats:
    roles: tuple[str, ...]
    rows: list[PathStatsRow]

    def as_records(self) -> list[dict]:
        return [dict(zip(self.roles, r.ids)) | {"count": r.count, "wait_time_seconds": r.wait_time.total_seconds()}
                for r in self.rows]

    def to_csv(self) -> str:
        buffer = io.StringIO(newline="")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(list(self.roles) + ["count", "wait_time_seconds"])
        for row in self.rows:
            writer.writerow([i or "" for i in row.ids] + [row.count, f"{row.wait_time.total_seconds():g}"])
        return buffer.getvalue()


def path_stats(model: OrgModel, from_activity: str, to_activity: str) -> PathStats:
    """Object tuples behind the model edge from one activity to another.

    Each occurrence of the edge contributes the join tuples anchored at the
    first event's case object that also contain the second's; identical
    tuples aggregate their count and wait times.
    """
    _require(model, from_activity, to_activity)
    roles = model.unified.path.tables_in_order
    edge = model.edges.get((from_activity, to_activity))
    if edge is None:
        return PathStats(roles, [])
    rows: dict[tuple[str | None, ...], PathStatsRow] = {}
    for i, j in edge.occurrences:
        first, second = model.entry(i), model.entry(j)
        wait = wait_between(first.event.start_ts, first.event.end_ts, second.event.start_ts)
        target_table, target_key = second.case_object
        for assignment in join_tuples(model, first.case_object):
            if assignment.get(target_table) != target_key:
                continue
            ids = tuple(assignment[r] for r in roles)
            row = rows.setdefault(ids, PathStatsRow(ids))
            row.count += 1
            row.wait_times.append(wait)
    return PathStats(roles, [rows[k] for k in sorted(rows, key=lambda ids: [i or "" for i in ids])])


# -- throughput ----------------------------------------------------------------


def org_throughput(model: OrgModel, from_activity: str, to_activity: str) -> ThroughputResult:
    """Start of the "from" event to end of the "to" event, per related pair.

    Only the two boundary events matter, so intermediate steps and the
    number of routes between them never change a measurement.
    """
    _require(model, from_activity, to_activity)
    sources = [e for e in model.unified.entries if e.activity == from_activity]
    targets = [e for e in model.unified.entries if e.activity == to_activity]
    rows = []
    skipped = 0
    for src in sources:
        for dst in targets:
            if src.position != dst.position and not related(src, dst):
                continue
            finish = dst.event.end_ts or dst.event.start_ts
            duration = finish - src.event.start_ts
            if duration < ZERO:
                skipped += 1
                continue
            rows.append(ThroughputRow(src.case_object, dst.case_object, (), duration,
                                      src.event.start_ts, finish, src.label(), dst.label()))
    rows.sort(key=lambda r: (r.from_ts, r.to_ts, r.from_event, r.to_event))
    return ThroughputResult.from_rows(rows, skipped)


# -- conformance ---------------------------------------------------------------


@dataclass(frozen=True)
class TraceFilter:
    """Either forbidden activities or a required activity sequence."""

    name: str
    forbidden_activities: frozenset[str] = frozenset()
    required_sequence: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if bool(self.forbidden_activities) == bool(self.required_sequence):
            raise ConfigError(f"filter {self.name}: give forbidden activities or a required sequence")

    def activities(self) -> set[str]:
        return set(self.forbidden_activities) | set(self.required_sequence)


@dataclass(frozen=True)
class CustomMetric:
    name: str
    from_activity: str
    to_activity: str
    minimum: timedelta | None = None
    maximum: timedelta | None = None

    def __post_init__(self) -> None:
        if self.minimum is not None and self.maximum is not None and self.minimum > self.maximum:
            raise ConfigError(f"metric {self.name}: min bound exceeds max bound")

    def out_of_bounds(self, value: timedelta) -> bool:
        return (self.minimum is not None and value < self.minimum) or (
            self.maximum is not None and value > self.maximum)


def _is_subsequence(needle: tuple[str, ...], haystack: list[str]) -> bool:
    it = iter(haystack)
    return all(step in it for step in needle)


def _trace_matches(flt: TraceFilter, activities: list[str]) -> bool:
    if flt.forbidden_activities:
        return any(a in flt.forbidden_activities for a in activities)
    if not set(flt.required_sequence) & set(activities):
        return False
    return not _is_subsequence(flt.required_sequence, activities)


def evaluate_conformance(model: OrgModel, filters: list[TraceFilter], metrics: list[CustomMetric]) -> dict:
    """Run trace filters over every object trace and check metric bounds.

    A forbidden-activity filter matches traces containing any listed
    activity; a sequence filter matches traces that touch the sequence
    without completing it in order.  Forbidden activities need not occur
    in the log at all; sequence and metric activities must.  Returns a
    JSON-ready report.
    """
    for flt in filters:
        _require(model, *flt.required_sequence)
    for metric in metrics:
        _require(model, metric.from_activity, metric.to_activity)
    traces = model.object_traces()

    def trace_record(obj: ObjectRef, trace: list[UnifiedEntry]) -> dict:
        return {"object": {"table": obj[0], "id": obj[1]}, "activities": [e.activity for e in trace]}

    filter_reports = []
    for flt in filters:
        matches = [trace_record(obj, trace) for obj, trace in sorted(traces.items())
                   if _trace_matches(flt, [e.activity for e in trace])]
        filter_reports.append({
            "name": flt.name,
            "forbidden_activities": sorted(flt.forbidden_activities),
            "required_sequence": list(flt.required_sequence),
            "matching_traces": len(matches),
            "total_traces": len(traces),
            "matches": matches,
        })

    metric_reports = []
    for metric in metrics:
        result = org_throughput(model, metric.from_activity, metric.to_activity)
        flagged = [
            {"from": {"table": r.from_entity[0], "id": r.from_entity[1], "event": r.from_event},
             "to": {"table": r.to_entity[0], "id": r.to_entity[1], "event": r.to_event},
             "duration_seconds": r.duration.total_seconds()}
            for r in result.rows if metric.out_of_bounds(r.duration)
        ]
        metric_reports.append({
            "name": metric.name,
            "from": metric.from_activity,
            "to": metric.to_activity,
            "min_seconds": metric.minimum.total_seconds() if metric.minimum is not None else None,
            "max_seconds": metric.maximum.total_seconds() if metric.maximum is not None else None,
            "measurements": len(result.rows),
            "out_of_bounds": len(flagged),
            "flagged": flagged,
        })
    return {"filters": filter_reports, "metrics": metric_reports}
