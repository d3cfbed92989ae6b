"""Input validation shared by the estimators and the command line."""

from __future__ import annotations

from numbers import Real

from .distortion import DistortionFn, parse_distortion
from .graph import EdgeSet, Graph, edge_key, load_graph
from .multilevel import LevelCostFn, Quantizer, TerminalHierarchy

__all__ = [
    "check_graph",
    "check_terminals",
    "check_hierarchy",
    "check_distortion",
    "check_level_cost",
    "check_quantizer",
    "check_edges",
    "parse_int_list",
]


def check_graph(graph, *, connected=True):
    """Return a :class:`Graph`; edge-list text and ``(u, v, w)`` lists are accepted."""
    if isinstance(graph, str):
        graph = load_graph(graph, warn_disconnected=False)
    elif not isinstance(graph, Graph):
        try:
            graph = Graph(graph)
        except (TypeError, ValueError) as exc:
            raise TypeError(f"expected a Graph or an iterable of (u, v, w), got {type(graph).__name__}") from exc
    if connected:
        graph.require_connected()
    return graph


def check_terminals(graph, terminals, *, min_size=1):
    T = sorted(set(int(v) for v in terminals))
    if len(T) < min_size:
        raise ValueError(f"need at least {min_size} terminals, got {len(T)}")
    missing = [v for v in T if v not in graph]
    if missing:
        raise ValueError(f"terminals not in graph: {missing}")
    return T


def check_hierarchy(graph, hierarchy):
    """Accept a :class:`TerminalHierarchy`, a ``{v: level}`` map or ``[T_1, ..., T_l]``."""
    if isinstance(hierarchy, TerminalHierarchy):
        h = hierarchy
    elif isinstance(hierarchy, dict):
        h = TerminalHierarchy.from_vertex_levels(hierarchy)
    else:
        h = TerminalHierarchy(list(hierarchy))
    return h.check_graph(graph)


def check_distortion(f):
    if isinstance(f, DistortionFn):
        return f
    if isinstance(f, str):
        return parse_distortion(f)
    if isinstance(f, Real) and not isinstance(f, bool):
        return DistortionFn.multiplicative(f)
    raise TypeError(f"cannot interpret {f!r} as a distortion")


def check_level_cost(g):
    if isinstance(g, LevelCostFn):
        return g
    if g in (None, "linear"):
        return LevelCostFn.linear()
    if g == "constant":
        return LevelCostFn.constant()
    if isinstance(g, str) and g.startswith("table:"):
        return LevelCostFn.table([v for v in g[6:].split(",") if v])
    if isinstance(g, (list, tuple)):
        return LevelCostFn.table(g)
    raise ValueError(f"unknown level cost {g!r}")


def check_quantizer(q, ell):
    """Quantizer from an instance, a preset name or explicit levels."""
    if isinstance(q, Quantizer):
        if q.ell != ell:
            raise ValueError(f"quantizer built for ell={q.ell}, need ell={ell}")
        return q
    if isinstance(q, str):
        if q in ("bu", "td", "powers2"):
            return Quantizer.preset(q, ell)
        return Quantizer(parse_int_list(q), ell)
    return Quantizer(tuple(int(i) for i in q), ell)


def check_edges(graph, edges):
    """Canonical edge keys; every edge must belong to ``graph``."""
    if isinstance(edges, EdgeSet):
        return sorted(edges.edges)
    out = []
    for e in edges:
        u, v = e[0], e[1]
        k = edge_key(u, v)
        if not graph.has_edge(k):
            raise ValueError(f"edge {k} is not in the graph")
        out.append(k)
    return out


def parse_int_list(text):
    """``"1,2, 4"`` -> ``[1, 2, 4]``."""
    items = [s.strip() for s in str(text).split(",") if s.strip()]
    try:
        return [int(s) for s in items]
    except ValueError:
        raise ValueError(f"expected comma-separated integers, got {text!r}") from None
