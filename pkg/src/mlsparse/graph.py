"""Weighted undirected graphs, shortest paths, spanning trees.

Weights are held exactly: integral weights as ``int`` and everything
else as :class:`fractions.Fraction`.  Floats entering through the public
API are converted through their shortest decimal representation, so
``1.2`` becomes ``Fraction(6, 5)`` rather than the binary expansion.
"""

from __future__ import annotations

import heapq
import warnings
from fractions import Fraction
from numbers import Rational

from .exceptions import DisconnectedGraphError, GraphFormatError

__all__ = [
    "Graph",
    "EdgeSet",
    "ShortestPathTable",
    "as_exact",
    "edge_key",
    "load_graph",
    "dump_graph",
    "dijkstra",
    "apsp",
    "mst",
    "diameter",
]


def as_exact(x):
    """Convert a number to an exact ``int`` or ``Fraction``.

    >>> as_exact(1.2)
    Fraction(6, 5)
    >>> as_exact("3")
    3
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not weights")
    if isinstance(x, int):
        return x
    if isinstance(x, Rational):
        q = Fraction(x)
    elif isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError(f"non-finite value {x!r}")
        q = Fraction(repr(float(x)))
    elif isinstance(x, str):
        q = Fraction(x.strip())
    else:
        # numpy scalars and friends
        q = Fraction(repr(float(x)))
    return q.numerator if q.denominator == 1 else q


def edge_key(u, v):
    """Canonical identifier of the undirected edge {u, v}."""
    return (u, v) if u < v else (v, u)


class Graph:
    """Immutable weighted undirected simple graph.

    Parameters
    ----------
    edges : iterable of (u, v, w)
        Edge list.  ``u != v``, ``w > 0`` and each unordered pair may
        appear only once.
    vertices : iterable, optional
        Extra (possibly isolated) vertices.
    """

    __slots__ = ("_vertices", "_weights", "_adj", "_hash")

    def __init__(self, edges=(), vertices=()):
        weights = {}
        adj = {v: [] for v in vertices}
        for u, v, w in edges:
            if u == v:
                raise GraphFormatError(f"self-loop on vertex {u}")
            w = as_exact(w)
            if w <= 0:
                raise GraphFormatError(f"nonpositive weight {w} on edge ({u}, {v})")
            e = edge_key(u, v)
            if e in weights:
                raise GraphFormatError(f"duplicate edge {e}")
            weights[e] = w
            adj.setdefault(u, []).append((v, w))
            adj.setdefault(v, []).append((u, w))
        for nbrs in adj.values():
            nbrs.sort(key=lambda p: p[0])
        self._vertices = tuple(sorted(adj))
        self._weights = dict(sorted(weights.items()))
        self._adj = {v: tuple(adj[v]) for v in self._vertices}
        self._hash = None

    @property
    def vertices(self):
        return self._vertices

    @property
    def edges(self):
        """Edge identifiers in ascending order."""
        return tuple(self._weights)

    @property
    def n(self):
        return len(self._vertices)

    @property
    def m(self):
        return len(self._weights)

    def weight(self, u, v=None):
        """Weight of edge ``(u, v)``; also accepts a single edge tuple."""
        if v is None:
            u, v = u
        return self._weights[edge_key(u, v)]

    def has_edge(self, u, v=None):
        if v is None:
            u, v = u
        return edge_key(u, v) in self._weights

    def neighbors(self, v):
        """``(neighbor, weight)`` pairs sorted by neighbor."""
        return self._adj[v]

    def weighted_edges(self):
        return [(u, v, w) for (u, v), w in self._weights.items()]

    def total_weight(self):
        return sum(self._weights.values(), 0)

    def __contains__(self, v):
        return v in self._adj

    def __iter__(self):
        return iter(self._vertices)

    def __len__(self):
        return len(self._vertices)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self._vertices == other._vertices and self._weights == other._weights

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._vertices, tuple(self._weights.items())))
        return self._hash

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"

    def is_connected(self):
        if not self._vertices:
            return True
        seen = {self._vertices[0]}
        stack = [self._vertices[0]]
        while stack:
            x = stack.pop()
            for y, _ in self._adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == len(self._vertices)

    def require_connected(self):
        if not self.is_connected():
            raise DisconnectedGraphError(f"graph with {self.n} vertices is not connected")
        return self

    def edge_subgraph(self, edges, vertices=()):
        """Subgraph on the given edge identifiers plus extra vertices."""
        return Graph(((u, v, self._weights[edge_key(u, v)]) for u, v in edges), vertices)

    def relabel_weights(self, func):
        """New graph with ``w(e)`` replaced by ``func(e, w)``."""
        return Graph(((u, v, func((u, v), w)) for (u, v), w in self._weights.items()), self._vertices)


class EdgeSet:
    """A set of edges of a parent graph with its cached total weight."""

    __slots__ = ("graph", "edges", "weight")

    def __init__(self, graph, edges=()):
        keys = frozenset(edge_key(u, v) for u, v in edges)
        for e in keys:
            if not graph.has_edge(e):
                raise ValueError(f"edge {e} is not in the parent graph")
        self.graph = graph
        self.edges = keys
        self.weight = sum((graph.weight(e) for e in keys), 0)

    def __iter__(self):
        return iter(sorted(self.edges))

    def __len__(self):
        return len(self.edges)

    def __contains__(self, e):
        return edge_key(*e) in self.edges

    def __eq__(self, other):
        if isinstance(other, EdgeSet):
            return self.edges == other.edges and self.graph == other.graph
        if isinstance(other, (set, frozenset)):
            return self.edges == frozenset(edge_key(*e) for e in other)
        return NotImplemented

    def __hash__(self):
        return hash(self.edges)

    def __or__(self, other):
        return EdgeSet(self.graph, self.edges | _keys(other))

    def __and__(self, other):
        return EdgeSet(self.graph, self.edges & _keys(other))

    def __sub__(self, other):
        return EdgeSet(self.graph, self.edges - _keys(other))

    def __le__(self, other):
        return self.edges <= _keys(other)

    def __repr__(self):
        return f"EdgeSet({sorted(self.edges)}, weight={self.weight})"

    def sorted(self):
        return sorted(self.edges)

    def vertices(self):
        return sorted({x for e in self.edges for x in e})

    def as_graph(self, vertices=()):
        return self.graph.edge_subgraph(self.edges, vertices)


def _keys(x):
    if isinstance(x, EdgeSet):
        return x.edges
    return frozenset(edge_key(u, v) for u, v in x)


# -- text format -------------------------------------------------------------


def load_graph(text, *, warn_disconnected=True):
    """Parse an edge-list document.

    Each non-blank, non-comment line is ``u v w`` with integer vertex
    identifiers and a positive weight (integer, decimal or ``p/q``).
    ``#`` starts a comment.  A disconnected result only triggers a
    :class:`UserWarning`; solvers reject it later.
    """
    edges = []
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise GraphFormatError(f"expected 'u v w', got {raw.strip()!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"vertex identifiers must be integers: {raw.strip()!r}", lineno) from None
        try:
            w = as_exact(parts[2])
        except (ValueError, ZeroDivisionError):
            raise GraphFormatError(f"bad weight {parts[2]!r}", lineno) from None
        if u == v:
            raise GraphFormatError(f"self-loop on vertex {u}", lineno)
        if w <= 0:
            raise GraphFormatError(f"nonpositive weight {parts[2]}", lineno)
        e = edge_key(u, v)
        if e in seen:
            raise GraphFormatError(f"duplicate edge {e} (first on line {seen[e]})", lineno)
        seen[e] = lineno
        edges.append((u, v, w))
    g = Graph(edges)
    if warn_disconnected and not g.is_connected():
        warnings.warn(f"graph with {g.n} vertices is disconnected", UserWarning, stacklevel=2)
    return g


def format_weight(w):
    return str(w)


def dump_graph(g):
    """Serialize to the edge-list format; byte-stable for equal graphs."""
    lines = [f"{u} {v} {format_weight(w)}" for u, v, w in g.weighted_edges()]
    return "\n".join(lines) + ("\n" if lines else "")


# -- shortest paths ------------------------------------------------------------


def dijkstra(g, source, *, cutoff=None, target=None):
    """Single-source shortest paths.

    Returns ``(dist, parent)``.  Among equally short routes the parent of
    a vertex is its smallest-identifier predecessor, so the shortest-path
    tree is a deterministic function of the graph.  With ``cutoff`` only
    vertices at distance ``<= cutoff`` are reported.  With ``target`` the
    search stops once the target is settled (parents are then omitted).
    """
    dist = {source: 0}
    done = set()
    heap = [(0, source)]
    adj = g._adj
    while heap:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        if x == target:
            return {y: dist[y] for y in done}, None
        for y, w in adj[x]:
            nd = d + w
            if cutoff is not None and nd > cutoff:
                continue
            if y not in dist or nd < dist[y]:
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    parent = {}
    for y, dy in dist.items():
        if y == source:
            continue
        parent[y] = min(x for x, w in adj[y] if x in dist and dist[x] + w == dy)
    return dist, parent


def distance(g, u, v, cutoff=None):
    """``d_g(u, v)``; ``inf`` when unreachable (or beyond ``cutoff``)."""
    if u not in g or v not in g:
        return float("inf")
    if u == v:
        return 0
    dist, _ = dijkstra(g, u, cutoff=cutoff, target=v)
    return dist.get(v, float("inf"))


class ShortestPathTable:
    """All-pairs distances plus one shortest-path tree per source."""

    def __init__(self, graph, dist, parent):
        self.graph = graph
        self.dist = dist
        self.parent = parent

    def __getitem__(self, pair):
        u, v = pair
        return self.dist[u][v]

    def path(self, u, v):
        """Vertex sequence of the recorded shortest ``u``-``v`` path."""
        if v not in self.dist[u]:
            raise DisconnectedGraphError(f"no path between {u} and {v}")
        par = self.parent[u]
        out = [v]
        while out[-1] != u:
            out.append(par[out[-1]])
        out.reverse()
        return out

    def path_edges(self, u, v):
        p = self.path(u, v)
        return [edge_key(a, b) for a, b in zip(p, p[1:])]


def apsp(g, sources=None):
    """Exact all-pairs (or multi-source) shortest paths of a connected graph."""
    g.require_connected()
    srcs = g.vertices if sources is None else sorted(sources)
    dist, parent = {}, {}
    for s in srcs:
        dist[s], parent[s] = dijkstra(g, s)
    return ShortestPathTable(g, dist, parent)


def diameter(g):
    """Largest shortest-path distance between two vertices."""
    table = apsp(g)
    return max((d for row in table.dist.values() for d in row.values()), default=0)


# -- spanning trees ------------------------------------------------------------


class _DisjointSet:
    def __init__(self, items=()):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = self.parent.setdefault(x, x)
        while root != self.parent[root]:
            root = self.parent[root]
        while x != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


def spanning_forest(g, edges=None, *, forced=()):
    """Kruskal over ``edges`` (default: all), ``forced`` edges taken first.

    Ties are broken by edge identifier.  Forced edges must be acyclic.
    """
    ds = _DisjointSet(g.vertices)
    chosen = []
    for e in sorted(forced):
        if not ds.union(*e):
            raise ValueError("forced edges contain a cycle")
        chosen.append(e)
    pool = g.edges if edges is None else edges
    forced = set(forced)
    for e in sorted((e for e in pool if e not in forced), key=lambda e: (g.weight(e), e)):
        if ds.union(*e):
            chosen.append(e)
    return chosen


def mst(g):
    """Minimum spanning tree of a connected graph as an :class:`EdgeSet`."""
    g.require_connected()
    return EdgeSet(g, spanning_forest(g))


def prune_leaves(edges, keep):
    """Remove leaves not in ``keep`` until none remain."""
    edges = set(edges)
    deg = {}
    inc = {}
    for e in edges:
        for x in e:
            deg[x] = deg.get(x, 0) + 1
            inc.setdefault(x, set()).add(e)
    stack = [x for x, d in deg.items() if d == 1 and x not in keep]
    while stack:
        x = stack.pop()
        if deg.get(x) != 1:
            continue
        (e,) = inc[x]
        edges.discard(e)
        for y in e:
            inc[y].discard(e)
            deg[y] -= 1
            if deg[y] == 1 and y not in keep:
                stack.append(y)
    return edges


def is_forest(edges):
    ds = _DisjointSet()
    return all(ds.union(u, v) for u, v in edges)


def connects(edges, terminals):
    """True when all ``terminals`` lie in one component of ``edges``."""
    terminals = list(terminals)
    if len(terminals) <= 1:
        return True
    ds = _DisjointSet()
    for u, v in edges:
        ds.union(u, v)
    roots = {ds.find(t) for t in terminals}
    return len(roots) == 1
