"""``procmine`` command line.

Exit codes: 0 success, 1 invalid input (one diagnostic line on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

from procmine import __version__, config as cfg, dot, fixtures
from procmine.errors import ProcessMiningError
from procmine.eventlog import DirectlyFollowsGraph, discover_dfg, flatten_ocel
from procmine.measures import ThroughputResult
from procmine.multilevel import (
    MultilevelModel, ReferenceModel, check_conformance, filter_cases, instance_label, member_filter, mine, throughput,
)
from procmine.ocel import activity_characteristics, validate_quality
from procmine.orgmine import (
    activity_stats, build_unified_log, discover_paths, evaluate_conformance, generate_org_model, org_throughput,
    path_stats,
)
from procmine.timestamps import format_timestamp


class UsageError(Exception):
    pass


# -- output helpers ------------------------------------------------------------


def _write(out: Path, name: str, payload: str | bytes) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_bytes(payload.encode("utf-8") if isinstance(payload, str) else payload)
    return path


def _json_text(data: object) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _with_metadata(data: dict, args: argparse.Namespace) -> dict:
    meta = {"tool": "procmine", "version": __version__, "command": args.command}
    if not args.deterministic:
        meta["generated_at"] = format_timestamp(datetime.now(timezone.utc))
    return {"metadata": meta, **data}


def _dfg_dict(dfg: DirectlyFollowsGraph) -> dict:
    return {
        "case_count": dfg.case_count,
        "activities": dict(sorted(dfg.activity_nodes.items())),
        "edges": [{"from": a, "to": b, "frequency": s.frequency} for (a, b), s in sorted(dfg.edges.items())],
    }


def _throughput_csv(result: ThroughputResult) -> str:
    buffer = io.StringIO(newline="")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["from_object", "to_object", "from_event", "to_event", "from_ts", "to_ts", "duration_seconds"])
    for r in result.rows:
        writer.writerow([instance_label(r.from_entity), instance_label(r.to_entity), r.from_event, r.to_event,
                         format_timestamp(r.from_ts), format_timestamp(r.to_ts), f"{r.duration.total_seconds():g}"])
    return buffer.getvalue()


# -- per-mode model building ----------------------------------------------------


def _multilevel_model(project: cfg.ProjectConfig, args: argparse.Namespace) -> MultilevelModel:
    schema, rows = cfg.load_multilevel(project)
    model = mine(rows, schema)
    if getattr(args, "filter", None):
        model = filter_cases(model, member_filter(args.filter))
    return model


def _org_model(project: cfg.ProjectConfig, args: argparse.Namespace):
    graph = cfg.load_join_graph(project)
    selected = cfg.selected_processes(project, graph)
    paths = discover_paths(graph, selected, float(project.raw.get("coverage_threshold", 1.0)))
    accepted = [p for p in paths if p.accepted]
    if not accepted:
        raise ProcessMiningError("no accepted join path connects the selected processes")
    model = generate_org_model(build_unified_log(graph, accepted[0]))
    min_frequency = getattr(args, "min_frequency", None)
    if min_frequency:
        model = model.hide_edges_below(min_frequency)
    return model, paths, graph


def _ocel_flat(project: cfg.ProjectConfig):
    log = cfg.load_ocel(project)
    target = project.raw.get("target_type")
    if target is None:
        return log, None, None
    flat, report = flatten_ocel(log, target)
    return log, flat, report


# -- commands ------------------------------------------------------------------


def cmd_gen(args: argparse.Namespace) -> list[Path]:
    if args.fixture not in fixtures.FIXTURES:
        raise UsageError(f"unknown fixture {args.fixture!r}; choose from {', '.join(fixtures.FIXTURES)}")
    return fixtures.write_fixture(args.fixture, Path(args.out))


def _stats_payload(project: cfg.ProjectConfig, args: argparse.Namespace) -> tuple[dict, str | None]:
    """Statistics document plus DOT text of the discovered model."""
    if project.mode == "flat":
        dfg = discover_dfg(cfg.load_flat(project))
        return {"mode": "flat", "dfg": _dfg_dict(dfg)}, dot.dfg_to_dot(dfg)
    if project.mode == "multilevel":
        model = _multilevel_model(project, args)
        return {"mode": "multilevel", **model.to_dict()}, dot.multilevel_to_dot(model)
    if project.mode == "ocel":
        log, flat, report = _ocel_flat(project)
        quality = validate_quality(log, include_age=not args.deterministic)
        data = {"mode": "ocel", "event_count": len(log.events), "object_count": len(log.objects),
                "quality": quality.to_dict(), "characteristics": activity_characteristics(log).to_dict()}
        text = None
        if flat is not None:
            dfg = discover_dfg(flat)
            data["flattening"] = {"target_type": project.raw["target_type"], **report.to_dict()}
            data["dfg"] = _dfg_dict(dfg)
            text = dot.dfg_to_dot(dfg)
        return data, text
    model, _, _ = _org_model(project, args)
    data = {"mode": "org", **model.to_dict(),
            "activities": {a: activity_stats(model, a).to_dict() for a in sorted(model.nodes)}}
    return data, dot.org_to_dot(model)


def cmd_discover(args: argparse.Namespace) -> list[Path]:
    project = cfg.load_config(args.config)
    data, text = _stats_payload(project, args)
    out = Path(args.out)
    written = []
    if text is not None:
        written.append(_write(out, "model.dot", text))
    written.append(_write(out, "stats.json", _json_text(_with_metadata(data, args))))
    return written


def cmd_stats(args: argparse.Namespace) -> list[Path]:
    project = cfg.load_config(args.config)
    data, _ = _stats_payload(project, args)
    return [_write(Path(args.out), "stats.json", _json_text(_with_metadata(data, args)))]


def cmd_conform(args: argparse.Namespace) -> list[Path]:
    project = cfg.load_config(args.config)
    if project.mode == "multilevel":
        model = _multilevel_model(project, args)
        reference = cfg.load_reference(project) or ReferenceModel.from_model(model)
        data = {"mode": "multilevel", "reference": reference.to_dict(),
                **check_conformance(model, reference).to_dict()}
    elif project.mode == "org":
        model, _, _ = _org_model(project, args)
        filters, metrics = cfg.conformance_rules(project)
        data = {"mode": "org", **evaluate_conformance(model, filters, metrics)}
    else:
        raise UsageError(f"conform does not support mode {project.mode!r}")
    return [_write(Path(args.out), "conformance.json", _json_text(_with_metadata(data, args)))]


def cmd_throughput(args: argparse.Namespace) -> list[Path]:
    project = cfg.load_config(args.config)
    if not args.from_activity or not args.to_activity:
        raise UsageError("throughput needs --from and --to")
    if project.mode == "multilevel":
        model = _multilevel_model(project, args)
        result = throughput(model, args.from_activity, args.to_activity, args.occurrence, args.end_to_start)
    elif project.mode == "org":
        model, _, _ = _org_model(project, args)
        result = org_throughput(model, args.from_activity, args.to_activity)
    else:
        raise UsageError(f"throughput does not support mode {project.mode!r}")
    if result.skipped_negative:
        print(f"skipped {result.skipped_negative} pairs with negative duration", file=sys.stderr)
    return [_write(Path(args.out), "throughput.csv", _throughput_csv(result))]


def cmd_paths(args: argparse.Namespace) -> list[Path]:
    project = cfg.load_config(args.config)
    if project.mode != "org":
        raise UsageError(f"paths does not support mode {project.mode!r}")
    graph = cfg.load_join_graph(project)
    selected = cfg.selected_processes(project, graph)
    paths = discover_paths(graph, selected, float(project.raw.get("coverage_threshold", 1.0)))
    data = {
        "processes": selected,
        "dangling_foreign_keys": {str(e): list(keys) for e, keys in sorted(graph.dangling.items())},
        "paths": [p.to_dict() for p in paths],
    }
    written = [_write(Path(args.out), "paths.json", _json_text(_with_metadata(data, args)))]
    if args.from_activity and args.to_activity:
        model, _, _ = _org_model(project, args)
        stats = path_stats(model, args.from_activity, args.to_activity)
        written.append(_write(Path(args.out), "path_stats.csv", stats.to_csv()))
    return written


COMMANDS: dict[str, Callable[[argparse.Namespace], list[Path]]] = {
    "gen": cmd_gen,
    "discover": cmd_discover,
    "stats": cmd_stats,
    "conform": cmd_conform,
    "throughput": cmd_throughput,
    "paths": cmd_paths,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="procmine", description="Multi-level and object-centric process mining.")
    parser.add_argument("--version", action="version", version=f"procmine {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a demo fixture")
    gen.add_argument("fixture", help=", ".join(fixtures.FIXTURES))
    gen.add_argument("--out", default=".", help="output directory")

    for name, text in [("discover", "discover a model (model.dot, stats.json)"),
                       ("stats", "compute statistics (stats.json)"),
                       ("conform", "check conformance (conformance.json)"),
                       ("throughput", "measure throughput times (throughput.csv)"),
                       ("paths", "list candidate join paths (paths.json)")]:
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="JSON project file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--from", dest="from_activity")
        p.add_argument("--to", dest="to_activity")
        p.add_argument("--occurrence", choices=("first", "last"), default="first")
        p.add_argument("--end-to-start", action="store_true",
                       help="measure from the end of the source event when it has one")
        p.add_argument("--filter", help="keep cases containing this member (Type:id or id)")
        p.add_argument("--min-frequency", type=int, default=0, help="hide org model edges below this frequency")
        p.add_argument("--deterministic", action="store_true", help="omit wall-clock metadata")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        for path in COMMANDS[args.command](args):
            print(path)
    except UsageError as exc:
        print(f"procmine: usage error: {exc}", file=sys.stderr)
        return 2
    except ProcessMiningError as exc:
        print(f"procmine: error: {' '.join(str(exc).split())}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
