"""Unified multi-process log and the interleaved organizational model."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import timedelta
from typing import Mapping

from procmine.errors import AssumptionError, ConfigError, EmptyLogError
from procmine.eventlog import FlatEvent
from procmine.measures import wait_between
from procmine.orgmine.graph import JoinGraph, ObjectRef
from procmine.orgmine.paths import DiscoveredPath, linked_objects


@dataclass(frozen=True)
class UnifiedEntry:
    position: int
    process_name: str
    event: FlatEvent
    case_object: ObjectRef
    linked_objects: frozenset[ObjectRef]

    @property
    def activity(self) -> str:
        return self.event.activity

    def label(self) -> str:
        """Identity that survives insertion of unrelated events."""
        return f"{self.process_name}/{self.event.case_id}/{self.activity}/{self.event.start_ts.isoformat()}"


@dataclass(frozen=True)
class UnifiedLog:
    entries: tuple[UnifiedEntry, ...]
    activity_process: Mapping[str, str]
    path: DiscoveredPath
    graph: JoinGraph = field(compare=False, repr=False, default=None)

    def __len__(self) -> int:
        return len(self.entries)


def build_unified_log(graph: JoinGraph, path: DiscoveredPath) -> UnifiedLog:
    """Merge the selected logs into one stable, time-ordered sequence.

    Each event carries the object instances reachable from its case object
    along the path's joins.
    """
    if not path.accepted:
        raise ConfigError("unified log requires an accepted path")
    processes = sorted(path.bindings_covered)
    owner: dict[str, str] = {}
    for process in processes:
        for event in graph.bindings[process].log.events:
            known = owner.setdefault(event.activity, process)
            if known != process:
                raise AssumptionError(
                    f"activity {event.activity!r} appears in processes {known!r} and {process!r}; "
                    "each activity must belong to a single process")

    cache: dict[ObjectRef, frozenset[ObjectRef]] = {}
    drafts = []
    for process in processes:
        table = graph.bindings[process].case_table
        for event in graph.bindings[process].log.events:
            ref = (table, event.case_id)
            if ref not in cache:
                cache[ref] = linked_objects(graph, path, table, event.case_id)
            drafts.append((process, event, ref, cache[ref]))
    drafts.sort(key=lambda d: d[1].start_ts)
    entries = tuple(UnifiedEntry(i, *d) for i, d in enumerate(drafts))
    return UnifiedLog(entries, dict(sorted(owner.items())), path, graph)


@dataclass
class OrgNode:
    process_name: str
    frequency: int


@dataclass
class OrgEdge:
    cross_process: bool
    occurrences: list[tuple[int, int]] = field(default_factory=list)
    wait_times: list[timedelta] = field(default_factory=list)
    witnesses: dict[str, set[str]] = field(default_factory=dict)

    @property
    def frequency(self) -> int:
        return len(self.occurrences)

    @property
    def role_counts(self) -> dict[str, int]:
        """Distinct object instances per table witnessing the edge."""
        return {table: len(keys) for table, keys in sorted(self.witnesses.items())}


@dataclass
class OrgModel:
    unified: UnifiedLog
    nodes: dict[str, OrgNode]
    edges: dict[tuple[str, str], OrgEdge]
    hidden_edges: frozenset[tuple[str, str]] = frozenset()

    def entry(self, position: int) -> UnifiedEntry:
        return self.unified.entries[position]

    def visible_edges(self) -> dict[tuple[str, str], OrgEdge]:
        return {k: v for k, v in self.edges.items() if k not in self.hidden_edges}

    def hide_edges_below(self, min_frequency: int) -> OrgModel:
        hidden = frozenset(k for k, v in self.edges.items() if v.frequency < min_frequency)
        return replace(self, hidden_edges=hidden)

    def object_traces(self) -> dict[ObjectRef, list[UnifiedEntry]]:
        traces: dict[ObjectRef, list[UnifiedEntry]] = {}
        for entry in self.unified.entries:
            for obj in sorted(entry.linked_objects):
                traces.setdefault(obj, []).append(entry)
        return traces

    def case_traces(self) -> dict[tuple[str, str], list[UnifiedEntry]]:
        traces: dict[tuple[str, str], list[UnifiedEntry]] = {}
        for entry in self.unified.entries:
            traces.setdefault((entry.process_name, entry.event.case_id), []).append(entry)
        return traces

    def to_dict(self) -> dict:
        return {
            "processes": sorted(set(self.unified.activity_process.values())),
            "event_count": len(self.unified),
            "path": self.unified.path.to_dict(),
            "nodes": {a: {"process": n.process_name, "frequency": n.frequency} for a, n in sorted(self.nodes.items())},
            "edges": [
                {"from": a, "to": b, "cross_process": e.cross_process, "frequency": e.frequency,
                 "object_counts": e.role_counts,
                 "mean_wait_seconds": (sum(e.wait_times, timedelta(0)) / len(e.wait_times)).total_seconds()
                 if e.wait_times else None,
                 "hidden": (a, b) in self.hidden_edges}
                for (a, b), e in sorted(self.edges.items())
            ],
        }


def related(first: UnifiedEntry, second: UnifiedEntry) -> bool:
    """True when the second event's case object is joined to the first's."""
    return second.case_object in first.linked_objects


def generate_org_model(unified: UnifiedLog) -> OrgModel:
    """Interleave the selected workflows into one model.

    Steps inside a process come from each case's own trace, so sibling
    objects never produce rework.  A step between processes is taken from
    the trace of every object the two events are linked to, where they are
    consecutive, the two events are joined, and the first is not later.
    Each distinct event pair counts once; witnessing objects are kept per
    table and reported as distinct counts.
    """
    if not unified.entries:
        raise EmptyLogError("empty log: unified log has no events")
    nodes: dict[str, OrgNode] = {}
    for entry in unified.entries:
        node = nodes.setdefault(entry.activity, OrgNode(entry.process_name, 0))
        node.frequency += 1
    model = OrgModel(unified, nodes, {})
    edges: dict[tuple[str, str], OrgEdge] = {}
    pairs: dict[tuple[str, str], set[tuple[int, int]]] = {}

    def record(first: UnifiedEntry, second: UnifiedEntry, cross: bool, witness: ObjectRef) -> None:
        key = (first.activity, second.activity)
        edge = edges.setdefault(key, OrgEdge(cross))
        edge.witnesses.setdefault(witness[0], set()).add(witness[1])
        occurrence = (first.position, second.position)
        if occurrence not in pairs.setdefault(key, set()):
            pairs[key].add(occurrence)
            edge.occurrences.append(occurrence)
            edge.wait_times.append(wait_between(first.event.start_ts, first.event.end_ts, second.event.start_ts))

    for trace in model.case_traces().values():
        for first, second in zip(trace, trace[1:]):
            record(first, second, False, first.case_object)
    for obj, trace in model.object_traces().items():
        for first, second in zip(trace, trace[1:]):
            if first.process_name != second.process_name and related(first, second):
                record(first, second, True, obj)
    model.edges = dict(sorted(edges.items()))
    return model
