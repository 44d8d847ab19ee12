"""Automatic discovery of join paths connecting selected processes.

A candidate path is a tree of joins over object tables that contains the
case table of every selected process and has only those tables as leaves.
A candidate is accepted when

* every table on it takes part through its primary key (it is the target
  of one of the path's joins, or the case table of a selected log), and
* the case ids of every selected log are linked by the path's joins, at
  least ``coverage_threshold`` of them per log.

Everything else is reported as discarded, with the reason.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from procmine.errors import ConfigError, QueryError
from procmine.orgmine.graph import JoinEdge, JoinGraph, ObjectRef

MAX_TABLES = 8


@dataclass(frozen=True)
class DiscoveredPath:
    tables_in_order: tuple[str, ...]
    edges_used: tuple[JoinEdge, ...]
    bindings_covered: frozenset[str]
    verdict: str  # "accepted" | "discarded"
    discard_reason: str | None = None
    coverage: tuple[tuple[str, float], ...] = field(default=())

    @property
    def accepted(self) -> bool:
        return self.verdict == "accepted"

    def to_dict(self) -> dict:
        return {
            "tables": list(self.tables_in_order),
            "joins": [e.to_dict() for e in self.edges_used],
            "processes": sorted(self.bindings_covered),
            "verdict": self.verdict,
            "discard_reason": self.discard_reason,
            "case_id_coverage": dict(self.coverage),
        }


def _tree_tables(start: str, edges: Iterable[JoinEdge]) -> tuple[str, ...]:
    """Tables in depth-first order from ``start``, neighbours alphabetical."""
    edges = list(edges)
    order: list[str] = []
    stack = [start]
    while stack:
        table = stack.pop()
        if table in order:
            continue
        order.append(table)
        nxt = sorted({e.other(table) for e in edges if e.touches(table)} - set(order), reverse=True)
        stack.extend(nxt)
    return tuple(order)


def reachable_objects(graph: JoinGraph, edges: Iterable[JoinEdge], table: str, key: str) -> dict[str, set[str]]:
    """Rows of every path table linked to ``(table, key)`` through the joins."""
    edges = list(edges)
    found = {table: {key}}
    queue = deque([table])
    used: set[JoinEdge] = set()
    while queue:
        current = queue.popleft()
        for edge in edges:
            if edge in used or not edge.touches(current):
                continue
            used.add(edge)
            other = edge.other(current)
            found.setdefault(other, set()).update(graph.joined_keys(edge, current, found[current]))
            queue.append(other)
    return found


def _case_ids(graph: JoinGraph, process: str) -> list[str]:
    return sorted({e.case_id for e in graph.bindings[process].log.events})


def evaluate_path(graph: JoinGraph, edges: tuple[JoinEdge, ...], processes: list[str],
                  coverage_threshold: float = 1.0) -> DiscoveredPath:
    case_tables = {graph.bindings[p].case_table for p in processes}
    start = min(case_tables)
    tables = _tree_tables(start, edges)
    join_targets = {e.to_table for e in edges}

    reasons = []
    for table in sorted(tables):
        if table not in join_targets and table not in case_tables:
            reasons.append(f"primary key of {table} not on path")

    coverage = []
    for process in processes:
        table = graph.bindings[process].case_table
        ids = _case_ids(graph, process)
        incident = [e for e in edges if e.touches(table)]
        if not incident:
            linked = len(ids)
        else:
            linked = sum(1 for cid in ids if any(graph.joined_keys(e, table, [cid]) for e in incident))
        share = linked / len(ids) if ids else 1.0
        coverage.append((process, share))
        if share < coverage_threshold:
            reasons.append(f"{process}: {len(ids) - linked} of {len(ids)} case ids not linked "
                           f"(coverage {share:.2f} < {coverage_threshold:.2f})")
    return DiscoveredPath(
        tables_in_order=tables,
        edges_used=tuple(sorted(edges)),
        bindings_covered=frozenset(processes),
        verdict="discarded" if reasons else "accepted",
        discard_reason="; ".join(reasons) or None,
        coverage=tuple(coverage),
    )


def candidate_trees(graph: JoinGraph, terminals: set[str], max_tables: int = MAX_TABLES) -> list[tuple[JoinEdge, ...]]:
    """Join trees containing all terminal tables whose leaves are terminals.

    Trees are grown one join at a time from the smallest terminal; a grown
    tree stops expanding once every terminal is in it, since anything added
    afterwards could only hang off as a non-terminal leaf.
    """
    start = min(terminals)
    usable = [e for e in graph.edges if e.from_table != e.to_table]
    found = []
    seen: set[frozenset[JoinEdge]] = {frozenset()}
    queue: deque[tuple[frozenset[str], frozenset[JoinEdge]]] = deque([(frozenset([start]), frozenset())])
    while queue:
        tables, edges = queue.popleft()
        if terminals <= tables:
            degree: dict[str, int] = {}
            for e in edges:
                degree[e.from_table] = degree.get(e.from_table, 0) + 1
                degree[e.to_table] = degree.get(e.to_table, 0) + 1
            if all(t in terminals for t, d in degree.items() if d == 1):
                found.append(tuple(sorted(edges)))
            continue
        if len(tables) >= max_tables:
            continue
        for edge in usable:
            if (edge.from_table in tables) == (edge.to_table in tables):
                continue
            grown = edges | {edge}
            if grown in seen:
                continue
            seen.add(grown)
            queue.append((tables | {edge.from_table, edge.to_table}, grown))
    return found


def discover_paths(graph: JoinGraph, selected_processes: Iterable[str],
                   coverage_threshold: float = 1.0) -> list[DiscoveredPath]:
    """All candidate join paths for the selection, accepted and discarded.

    Ordered by the sorted table names of each path, then its joins.
    """
    processes = sorted(set(selected_processes))
    if not processes:
        raise ConfigError("select at least one process")
    unknown = [p for p in processes if p not in graph.bindings]
    if unknown:
        raise QueryError(f"unknown process {unknown[0]!r}")
    if not 0.0 <= coverage_threshold <= 1.0:
        raise ConfigError("coverage threshold must lie in [0, 1]")
    terminals = {graph.bindings[p].case_table for p in processes}
    paths = [evaluate_path(graph, tree, processes, coverage_threshold) for tree in candidate_trees(graph, terminals)]
    paths.sort(key=lambda p: (sorted(p.tables_in_order), p.edges_used))
    return paths


def linked_objects(graph: JoinGraph, path: DiscoveredPath, table: str, key: str) -> frozenset[ObjectRef]:
    reached = reachable_objects(graph, path.edges_used, table, key)
    return frozenset((t, k) for t, keys in reached.items() for k in keys)
