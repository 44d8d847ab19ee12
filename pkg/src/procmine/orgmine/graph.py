"""Object tables, event-log bindings and declared foreign-key joins."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import BinaryIO, Iterable, Mapping

from procmine.errors import IntegrityError, SchemaError
from procmine.eventlog import FlatLog, read_csv_table

ObjectRef = tuple[str, str]  # (table, primary key value)


@dataclass(frozen=True)
class ObjectTable:
    name: str
    primary_key_column: str
    columns: Mapping[str, str]
    rows: tuple[Mapping[str, str], ...]

    def __post_init__(self) -> None:
        if self.primary_key_column not in self.columns:
            raise SchemaError(f"table {self.name}: primary key column {self.primary_key_column!r} not declared")
        seen: set[str] = set()
        for row in self.rows:
            key = row.get(self.primary_key_column) or ""
            if not key:
                raise IntegrityError(f"table {self.name}: null primary key")
            if key in seen:
                raise IntegrityError(f"table {self.name}: duplicate primary key {key}", [key])
            seen.add(key)

    @cached_property
    def by_key(self) -> dict[str, Mapping[str, str]]:
        return {row[self.primary_key_column]: row for row in self.rows}

    def keys(self) -> list[str]:
        return [row[self.primary_key_column] for row in self.rows]

    @cached_property
    def _indexes(self) -> dict[str, dict[str, list[str]]]:
        return {}

    def index(self, column: str) -> dict[str, list[str]]:
        """Non-empty column value -> primary keys of rows holding it."""
        if column not in self._indexes:
            idx: dict[str, list[str]] = defaultdict(list)
            for row in self.rows:
                value = row.get(column) or ""
                if value:
                    idx[value].append(row[self.primary_key_column])
            self._indexes[column] = dict(idx)
        return self._indexes[column]


def read_object_table_csv(source: bytes | BinaryIO, name: str, primary_key: str) -> ObjectTable:
    header, records = read_csv_table(source)
    if primary_key not in header:
        raise SchemaError(f"table {name}: primary key column {primary_key!r} missing from header")
    rows = tuple({k: (v or "").strip() for k, v in r.items() if k is not None} for r in records)
    return ObjectTable(name, primary_key, {h: "string" for h in header}, rows)


@dataclass(frozen=True)
class LogBinding:
    """A process event log whose case ids are primary keys of ``case_table``."""

    process_name: str
    log: FlatLog
    case_table: str


@dataclass(frozen=True, order=True)
class JoinEdge:
    from_table: str
    from_column: str
    to_table: str
    to_column: str

    def other(self, table: str) -> str:
        return self.to_table if table == self.from_table else self.from_table

    def touches(self, table: str) -> bool:
        return table in (self.from_table, self.to_table)

    def __str__(self) -> str:
        return f"{self.from_table}.{self.from_column} -> {self.to_table}.{self.to_column}"

    def to_dict(self) -> dict:
        return {"from": {"table": self.from_table, "column": self.from_column},
                "to": {"table": self.to_table, "column": self.to_column}}


@dataclass(frozen=True)
class JoinGraph:
    tables: Mapping[str, ObjectTable]
    bindings: Mapping[str, LogBinding]
    edges: tuple[JoinEdge, ...]
    dangling: Mapping[JoinEdge, tuple[str, ...]] = field(default_factory=dict)

    def dangling_count(self) -> int:
        return sum(len(v) for v in self.dangling.values())

    def components(self) -> list[frozenset[str]]:
        """Connected groups of tables (joins taken as undirected)."""
        parent = {name: name for name in self.tables}

        def find(x: str) -> str:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for edge in self.edges:
            parent[find(edge.from_table)] = find(edge.to_table)
        groups: dict[str, set[str]] = defaultdict(set)
        for name in self.tables:
            groups[find(name)].add(name)
        return sorted((frozenset(g) for g in groups.values()), key=lambda g: sorted(g))

    def process_components(self) -> list[frozenset[str]]:
        """Bound processes grouped by the table component they attach to."""
        out = []
        for component in self.components():
            procs = frozenset(p for p, b in self.bindings.items() if b.case_table in component)
            if procs:
                out.append(procs)
        return out

    def joined_keys(self, edge: JoinEdge, table: str, keys: Iterable[str]) -> set[str]:
        """Primary keys of the table across ``edge`` joined to ``keys`` of ``table``."""
        if table == edge.from_table:
            source = self.tables[edge.from_table].by_key
            target = self.tables[edge.to_table].by_key
            values = {source[k].get(edge.from_column) or "" for k in keys if k in source}
            return {v for v in values if v in target}
        index = self.tables[edge.from_table].index(edge.from_column)
        return {pk for k in keys for pk in index.get(k, ())}


def build_join_graph(tables: Iterable[ObjectTable], bindings: Iterable[LogBinding],
                     edges: Iterable[JoinEdge]) -> JoinGraph:
    """Assemble and check a join graph.

    Unknown tables/columns and duplicate edges are schema errors; log case
    ids that are not primary keys of their table are an integrity error.
    Foreign-key values that match no primary key are recorded per edge.
    """
    table_map: dict[str, ObjectTable] = {}
    for table in tables:
        if table.name in table_map:
            raise SchemaError(f"duplicate table {table.name}")
        table_map[table.name] = table

    binding_map: dict[str, LogBinding] = {}
    for binding in bindings:
        if binding.process_name in binding_map:
            raise SchemaError(f"duplicate process {binding.process_name}")
        if binding.case_table not in table_map:
            raise SchemaError(f"process {binding.process_name}: unknown table {binding.case_table}")
        keys = table_map[binding.case_table].by_key
        unresolved = sorted({e.case_id for e in binding.log.events if e.case_id not in keys})
        if unresolved:
            raise IntegrityError(
                f"process {binding.process_name}: {len(unresolved)} case ids not in {binding.case_table} "
                f"(e.g. {', '.join(unresolved[:5])})", unresolved[:5])
        binding_map[binding.process_name] = binding

    edge_list: list[JoinEdge] = []
    dangling: dict[JoinEdge, tuple[str, ...]] = {}
    for edge in edges:
        for tname in (edge.from_table, edge.to_table):
            if tname not in table_map:
                raise SchemaError(f"join {edge}: unknown table {tname}")
        if edge.from_column not in table_map[edge.from_table].columns:
            raise SchemaError(f"join {edge}: unknown column {edge.from_column}")
        if edge.to_column != table_map[edge.to_table].primary_key_column:
            raise SchemaError(f"join {edge}: target column is not the primary key of {edge.to_table}")
        if edge in edge_list:
            raise SchemaError(f"duplicate join {edge}")
        edge_list.append(edge)
        targets = table_map[edge.to_table].by_key
        missing = tuple(pk for pk, row in table_map[edge.from_table].by_key.items()
                        if (row.get(edge.from_column) or "") and row[edge.from_column] not in targets)
        if missing:
            dangling[edge] = missing
    return JoinGraph(table_map, binding_map, tuple(sorted(edge_list)), dangling)


def join_edge(graph_tables: Mapping[str, ObjectTable], from_table: str, from_column: str, to_table: str) -> JoinEdge:
    """Declare a join whose target is ``to_table``'s primary key."""
    if to_table not in graph_tables:
        raise SchemaError(f"join target {to_table!r} is not a declared table")
    return JoinEdge(from_table, from_column, to_table, graph_tables[to_table].primary_key_column)
