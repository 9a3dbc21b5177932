"""Triangle partitions, rigidity and workspaces of isoperimetric truss robots."""

__version__ = "0.1.0"

from .graph import (  # noqa: E402
    Graph,
    canonical_label,
    decode_label,
    graph_label,
    necessary_conditions,
    octahedron,
)
from .partition import (  # noqa: E402
    TrianglePartition,
    check_k3_constraints,
    end_to_end_search,
    exact_cover_partition,
    exhaustive_partition,
    validate_partition,
)
from .rigidity import Framework, is_infinitesimally_rigid, rigidity_report, worst_case_rigidity_index  # noqa: E402

__all__ = [
    "Framework",
    "Graph",
    "TrianglePartition",
    "canonical_label",
    "check_k3_constraints",
    "decode_label",
    "end_to_end_search",
    "exact_cover_partition",
    "exhaustive_partition",
    "graph_label",
    "is_infinitesimally_rigid",
    "necessary_conditions",
    "octahedron",
    "rigidity_report",
    "validate_partition",
    "worst_case_rigidity_index",
]
