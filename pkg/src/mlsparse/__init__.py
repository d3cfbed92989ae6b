"""Multi-level graph sparsifiers: spanners and Steiner trees over nested terminal sets."""

__version__ = "0.1.0"

from .distortion import DistortionFn, parse_distortion
from .estimators import MultiLevelSparsifier, SteinerTree, SubsetwiseSpanner
from .exact import build_ilp, export_lp, solve_exact, solve_exact_multilevel
from .exceptions import (
    DisconnectedGraphError,
    DistortionError,
    GraphFormatError,
    GuardExceededError,
    InfeasibleError,
    MLSparseError,
)
from .graph import EdgeSet, Graph, dump_graph, load_graph
from .multilevel import (
    LevelCostFn,
    MultiLevelSolution,
    Quantizer,
    SparsifierKind,
    TerminalHierarchy,
    composite,
    make_solver,
    quantizer_profile,
    round_mlags,
)
from .ratio import composite_guarantee
from .spanners import greedy_spanner, subsetwise_spanner
from .steiner import metric_closure, steiner_2approx, steiner_exact

__all__ = [
    "__version__",
    "DistortionFn",
    "parse_distortion",
    "MultiLevelSparsifier",
    "SteinerTree",
    "SubsetwiseSpanner",
    "build_ilp",
    "export_lp",
    "solve_exact",
    "solve_exact_multilevel",
    "DisconnectedGraphError",
    "DistortionError",
    "GraphFormatError",
    "GuardExceededError",
    "InfeasibleError",
    "MLSparseError",
    "EdgeSet",
    "Graph",
    "dump_graph",
    "load_graph",
    "LevelCostFn",
    "MultiLevelSolution",
    "Quantizer",
    "SparsifierKind",
    "TerminalHierarchy",
    "composite",
    "make_solver",
    "quantizer_profile",
    "round_mlags",
    "composite_guarantee",
    "greedy_spanner",
    "subsetwise_spanner",
    "metric_closure",
    "steiner_2approx",
    "steiner_exact",
]
