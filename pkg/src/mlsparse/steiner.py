"""Metric closure and Steiner trees."""

from __future__ import annotations

from itertools import combinations

from .exceptions import GuardExceededError
from .graph import EdgeSet, Graph, apsp, connects, edge_key, is_forest, mst, prune_leaves, spanning_forest

__all__ = [
    "ClosureGraph",
    "metric_closure",
    "expand_paths",
    "steiner_2approx",
    "steiner_exact",
    "STEINER_EXACT_MAX_TERMINALS",
    "STEINER_EXACT_MAX_VERTICES",
]

STEINER_EXACT_MAX_TERMINALS = 10
STEINER_EXACT_MAX_VERTICES = 20


class ClosureGraph:
    """Complete graph on a terminal set weighted by ``d_G``.

    Attributes
    ----------
    graph : Graph
        The closure itself, on the terminal identifiers.
    base : Graph
        The original graph.
    pathmap : dict
        Closure edge ``(u, v)`` (``u < v``) to the edge list of a
        shortest ``u``-``v`` path in ``base``.
    """

    def __init__(self, graph, base, pathmap):
        self.graph = graph
        self.base = base
        self.pathmap = pathmap

    @property
    def terminals(self):
        return self.graph.vertices

    def __repr__(self):
        return f"ClosureGraph(|T|={self.graph.n})"


def _check_terminals(g, terminals):
    T = sorted(set(terminals))
    if not T:
        raise ValueError("terminal set is empty")
    missing = [t for t in T if t not in g]
    if missing:
        raise ValueError(f"terminals not in graph: {missing}")
    return T


def metric_closure(g, terminals, table=None):
    """Metric closure of ``g`` over ``terminals`` with path back-pointers.

    ``table`` may be a precomputed :class:`ShortestPathTable` covering at
    least the terminals as sources.
    """
    T = _check_terminals(g, terminals)
    g.require_connected()
    if table is None:
        table = apsp(g, sources=T)
    edges = []
    pathmap = {}
    for u, v in combinations(T, 2):
        edges.append((u, v, table.dist[u][v]))
        pathmap[(u, v)] = tuple(table.path_edges(u, v))
    return ClosureGraph(Graph(edges, vertices=T), g, pathmap)


def expand_paths(closure, selected):
    """Union of the base-graph paths behind the selected closure edges."""
    out = set()
    for u, v in selected:
        e = edge_key(u, v)
        if e not in closure.pathmap:
            raise KeyError(f"{e} is not a closure edge")
        out.update(closure.pathmap[e])
    return EdgeSet(closure.base, out)


def steiner_2approx(g, terminals):
    """Metric-closure MST Steiner tree, at most twice the optimum.

    The MST of the closure is expanded to base-graph paths; if the union
    of those paths is cyclic it is replaced by its own MST, then
    non-terminal leaves are pruned until none remain.
    """
    T = _check_terminals(g, terminals)
    if len(T) == 1:
        return EdgeSet(g)
    closure = metric_closure(g, T)
    expanded = expand_paths(closure, mst(closure.graph))
    edges = expanded.edges
    if not is_forest(edges):
        edges = spanning_forest(g, edges)
    return EdgeSet(g, prune_leaves(edges, set(T)))


def steiner_exact(g, terminals):
    """Minimum Steiner tree by the Dreyfus-Wagner subset dynamic program.

    Guarded to at most 10 terminals and 20 vertices.
    """
    T = _check_terminals(g, terminals)
    if len(T) > STEINER_EXACT_MAX_TERMINALS or g.n > STEINER_EXACT_MAX_VERTICES:
        raise GuardExceededError(
            f"steiner_exact limited to |T| <= {STEINER_EXACT_MAX_TERMINALS} and "
            f"|V| <= {STEINER_EXACT_MAX_VERTICES} (got {len(T)}, {g.n})"
        )
    if len(T) == 1:
        return EdgeSet(g)
    table = apsp(g)
    d = table.dist
    V = g.vertices
    root, rest = T[0], T[1:]
    k = len(rest)
    full = (1 << k) - 1
    # best[S][v]: cheapest tree spanning {rest[i] : i in S} plus v
    best = [None] * (full + 1)
    how = [None] * (full + 1)
    for i, t in enumerate(rest):
        S = 1 << i
        best[S] = {v: d[t][v] for v in V}
        how[S] = {v: ("path", t) for v in V}
    for S in range(1, full + 1):
        if S & (S - 1) == 0:
            continue
        # merge at u: split S into two nonempty halves containing the low bit
        low = S & -S
        merged = {}
        split = {}
        for u in V:
            cand = None
            sub = (S - 1) & S
            while sub:
                if sub & low:
                    c = best[sub][u] + best[S ^ sub][u]
                    if cand is None or c < cand:
                        cand, split[u] = c, sub
                sub = (sub - 1) & S
            merged[u] = cand
        row, hrow = {}, {}
        for v in V:
            bu = min(V, key=lambda u: (d[v][u] + merged[u], u))
            row[v] = d[v][bu] + merged[bu]
            hrow[v] = ("join", bu, split[bu])
        best[S], how[S] = row, hrow

    edges = set()

    def unwind(S, v):
        kind = how[S][v]
        if kind[0] == "path":
            edges.update(table.path_edges(kind[1], v))
            return
        _, u, sub = kind
        if u != v:
            edges.update(table.path_edges(u, v))
        unwind(sub, u)
        unwind(S ^ sub, u)

    unwind(full, root)
    # the union of the recovered paths weighs at most the optimum, so it is a tree
    if not is_forest(edges) or not connects(edges, T):
        edges = spanning_forest(g, edges)
    return EdgeSet(g, prune_leaves(edges, set(T)))
