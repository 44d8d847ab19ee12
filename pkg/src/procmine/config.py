"""JSON project files: one per run, paths relative to the file itself."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import timedelta
from pathlib import Path
from typing import Any, Mapping

from procmine.errors import ConfigError
from procmine.eventlog import FlatLog, parse_flat_csv
from procmine.multilevel import EntitySchema, MultilevelRow, ReferenceModel, parse_multilevel_csv
from procmine.ocel import OCELog, parse_ocel_json
from procmine.orgmine.analysis import CustomMetric, TraceFilter
from procmine.orgmine.graph import JoinEdge, JoinGraph, LogBinding, build_join_graph, read_object_table_csv

MODES = ("flat", "multilevel", "ocel", "org")


@dataclass
class ProjectConfig:
    mode: str
    base_dir: Path
    raw: Mapping[str, Any] = field(repr=False)

    def path(self, relative: str) -> Path:
        path = self.base_dir / relative
        if not path.is_file():
            raise ConfigError(f"input file not found: {path}")
        return path

    def require(self, key: str) -> Any:
        if key not in self.raw:
            raise ConfigError(f"{self.mode} project needs {key!r}")
        return self.raw[key]


def load_config(path: str | Path) -> ProjectConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path}: expected a JSON object")
    mode = raw.get("mode")
    if mode not in MODES:
        raise ConfigError(f"config {path}: mode must be one of {', '.join(MODES)}")
    return ProjectConfig(mode, path.parent, raw)


def load_flat(config: ProjectConfig) -> FlatLog:
    source = config.path(config.require("input"))
    return parse_flat_csv(source.read_bytes(), config.raw.get("columns"), source.name)


def multilevel_schema(config: ProjectConfig) -> tuple[EntitySchema, dict[str, str]]:
    spec = config.require("schema")
    try:
        schema = EntitySchema(tuple(spec["entities"]), dict(spec["processid_columns"]))
    except KeyError as exc:
        raise ConfigError(f"schema needs {exc.args[0]!r}") from None
    columns = {"activity": spec.get("activity_column", "activity"),
               "start_ts": spec.get("timestamp_column", "start_ts")}
    for role in ("end_ts", "resource", "cost", "automated"):
        if f"{role}_column" in spec:
            columns[role] = spec[f"{role}_column"]
    return schema, columns


def load_multilevel(config: ProjectConfig) -> tuple[EntitySchema, list[MultilevelRow]]:
    schema, columns = multilevel_schema(config)
    rows = parse_multilevel_csv(config.path(config.require("input")).read_bytes(), schema, columns)
    return schema, rows


def load_reference(config: ProjectConfig) -> ReferenceModel | None:
    ref = config.raw.get("reference")
    if ref is None:
        return None
    if isinstance(ref, str):
        try:
            ref = json.loads(config.path(ref).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"reference model: invalid JSON ({exc.msg})") from None
    return ReferenceModel.from_dict(ref)


def load_ocel(config: ProjectConfig) -> OCELog:
    return parse_ocel_json(config.path(config.require("input")).read_bytes())


def _malformed(section: str, exc: Exception) -> ConfigError:
    return ConfigError(f"{section}: malformed entry (missing {exc})")


def load_join_graph(config: ProjectConfig) -> JoinGraph:
    try:
        return _load_join_graph(config)
    except (KeyError, TypeError) as exc:
        raise _malformed("org project", exc) from None


def _load_join_graph(config: ProjectConfig) -> JoinGraph:
    tables = []
    for spec in config.require("tables"):
        tables.append(read_object_table_csv(config.path(spec["file"]).read_bytes(), spec["name"], spec["primary_key"]))
    by_name = {t.name: t for t in tables}
    bindings = []
    for spec in config.require("logs"):
        source = config.path(spec["file"])
        log = parse_flat_csv(source.read_bytes(), spec.get("columns"), spec["process_name"])
        bindings.append(LogBinding(spec["process_name"], log, spec["case_target"]["table"]))
    edges = []
    for spec in config.raw.get("joins", []):
        target = spec["to"]["table"]
        if target not in by_name:
            raise ConfigError(f"join target {target!r} is not a declared table")
        column = spec["to"].get("column", by_name[target].primary_key_column)
        edges.append(JoinEdge(spec["from"]["table"], spec["from"]["column"], target, column))
    return build_join_graph(tables, bindings, edges)


def selected_processes(config: ProjectConfig, graph: JoinGraph) -> list[str]:
    return list(config.raw.get("processes") or sorted(graph.bindings))


def _seconds(value: Any) -> timedelta | None:
    return None if value is None else timedelta(seconds=float(value))


def conformance_rules(config: ProjectConfig) -> tuple[list[TraceFilter], list[CustomMetric]]:
    spec = config.raw.get("conformance") or {}
    try:
        return _rules(spec)
    except (KeyError, TypeError) as exc:
        raise _malformed("conformance", exc) from None


def _rules(spec: Mapping[str, Any]) -> tuple[list[TraceFilter], list[CustomMetric]]:
    filters = [TraceFilter(f["name"], frozenset(f.get("forbidden", ())), tuple(f.get("sequence", ())))
               for f in spec.get("filters", [])]
    metrics = [CustomMetric(m["name"], m["from"], m["to"], _seconds(m.get("min_seconds")), _seconds(m.get("max_seconds")))
               for m in spec.get("metrics", [])]
    return filters, metrics
