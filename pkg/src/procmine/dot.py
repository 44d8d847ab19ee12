"""Minimal Graphviz DOT writer for discovered models."""

from __future__ import annotations

from typing import Iterable, Mapping

from procmine.eventlog import DirectlyFollowsGraph
from procmine.measures import summarize

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def quote(value: object) -> str:
    text = str(value).replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{text}"'


def _attrs(attrs: Mapping[str, object]) -> str:
    if not attrs:
        return ""
    return " [" + ", ".join(f"{quote(k)}={quote(v)}" for k, v in attrs.items()) + "]"


def render(name: str, nodes: Iterable[tuple[str, Mapping[str, object]]],
           edges: Iterable[tuple[str, str, Mapping[str, object]]]) -> str:
    lines = [f"digraph {quote(name)} {{", "  rankdir=LR;", '  node [shape=box, style=rounded];']
    lines.extend(f"  {quote(n)}{_attrs(a)};" for n, a in nodes)
    lines.extend(f"  {quote(s)} -> {quote(t)}{_attrs(a)};" for s, t, a in edges)
    lines.append("}")
    return "\n".join(lines) + "\n"


def colors_for(keys: Iterable[str]) -> dict[str, str]:
    return {k: PALETTE[i % len(PALETTE)] for i, k in enumerate(sorted(set(keys)))}


def _mean_seconds(durations) -> str:
    mean = summarize(list(durations))["mean"]
    return f"{mean.total_seconds():g}" if mean is not None else ""


def dfg_to_dot(dfg: DirectlyFollowsGraph, name: str = "dfg") -> str:
    nodes = [(a, {"label": f"{a}\n{n}", "frequency": n}) for a, n in sorted(dfg.activity_nodes.items())]
    edges = [(a, b, {"label": str(s.frequency), "frequency": s.frequency, "mean_wait_seconds": _mean_seconds(s.durations)})
             for (a, b), s in sorted(dfg.edges.items())]
    return render(name, nodes, edges)


def multilevel_to_dot(model, name: str = "multilevel") -> str:
    colors = colors_for(s.entity for s in model.activity_stats.values())
    nodes = [
        (a, {"label": f"{a}\n{s.frequency}", "entity": s.entity, "frequency": s.frequency, "color": colors[s.entity]})
        for a, s in sorted(model.activity_stats.items())
    ]
    edges = [
        (a, b, {"label": str(e.frequency), "frequency": e.frequency, "bridge": str(e.bridge).lower(),
                "mean_wait_seconds": _mean_seconds(e.durations)})
        for (a, b), e in sorted(model.edges.items())
    ]
    return render(name, nodes, edges)


def org_to_dot(model, name: str = "organization") -> str:
    colors = colors_for(n.process_name for n in model.nodes.values())
    nodes = [
        (a, {"label": f"{a}\n{n.frequency}", "process": n.process_name, "frequency": n.frequency,
             "color": colors[n.process_name]})
        for a, n in sorted(model.nodes.items())
    ]
    edges = []
    for (a, b), e in sorted(model.visible_edges().items()):
        attrs: dict[str, object] = {"label": str(e.frequency), "frequency": e.frequency,
                                    "cross_process": str(e.cross_process).lower(),
                                    "mean_wait_seconds": _mean_seconds(e.wait_times)}
        attrs.update({f"count_{table}": n for table, n in e.role_counts.items()})
        edges.append((a, b, attrs))
    return render(name, nodes, edges)
