"""Organization mining: several process logs joined through shared object tables."""

from procmine.orgmine.analysis import (
    ActivityMeasures,
    CustomMetric,
    PathStats,
    TraceFilter,
    activity_stats,
    evaluate_conformance,
    org_throughput,
    path_stats,
)
from procmine.orgmine.graph import (
    JoinEdge,
    JoinGraph,
    LogBinding,
    ObjectTable,
    build_join_graph,
    join_edge,
    read_object_table_csv,
)
from procmine.orgmine.model import OrgModel, UnifiedLog, build_unified_log, generate_org_model
from procmine.orgmine.paths import DiscoveredPath, discover_paths

__all__ = [
    "ActivityMeasures",
    "CustomMetric",
    "DiscoveredPath",
    "JoinEdge",
    "JoinGraph",
    "LogBinding",
    "ObjectTable",
    "OrgModel",
    "PathStats",
    "TraceFilter",
    "UnifiedLog",
    "activity_stats",
    "build_join_graph",
    "build_unified_log",
    "discover_paths",
    "evaluate_conformance",
    "generate_org_model",
    "join_edge",
    "org_throughput",
    "path_stats",
    "read_object_table_csv",
]
