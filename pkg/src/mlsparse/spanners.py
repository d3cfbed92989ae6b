"""Single-level spanners: greedy, metric-closure subsetwise, stretch checks."""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass
from itertools import combinations

from .distortion import DistortionFn
from .exceptions import GuardExceededError, InfeasibleError
from .graph import EdgeSet, Graph, as_exact, dijkstra
from .steiner import expand_paths, metric_closure

__all__ = [
    "greedy_spanner",
    "subsetwise_spanner",
    "check_stretch",
    "StretchReport",
    "SubsetSpanner",
    "CLOSURE_ORACLE_MAX_TERMINALS",
]

CLOSURE_ORACLE_MAX_TERMINALS = 10
_TOL = 1e-9


def greedy_spanner(g, t):
    """Greedy ``t``-spanner.

    Edges are scanned by ``(weight, identifier)``; an edge ``uv`` is kept
    iff the spanner built so far has no ``u``-``v`` path of length at
    most ``t * w(uv)``.  The result contains the MST of ``g``.
    """
    t = as_exact(t)
    if t < 1:
        raise ValueError(f"stretch must be >= 1, got {t}")
    g.require_connected()
    adj = {v: [] for v in g.vertices}
    kept = []
    for e in sorted(g.edges, key=lambda e: (g.weight(e), e)):
        u, v = e
        w = g.weight(e)
        if _bounded_distance(adj, u, v, t * w) > t * w:
            kept.append(e)
            adj[u].append((v, w))
            adj[v].append((u, w))
    return EdgeSet(g, kept)


def _bounded_distance(adj, source, target, cutoff):
    """Dijkstra on a raw adjacency dict, abandoned past ``cutoff``."""
    dist = {source: 0}
    heap = [(0, source)]
    done = set()
    while heap:
        d, x = heapq.heappop(heap)
        if x == target:
            return d
        if x in done:
            continue
        done.add(x)
        for y, w in adj[x]:
            nd = d + w
            if nd <= cutoff and (y not in dist or nd < dist[y]):
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return float("inf")


@dataclass(frozen=True)
class StretchReport:
    ok: bool
    worst_pair: tuple | None
    worst_ratio: object

    def __bool__(self):
        return self.ok


def check_stretch(g, edges, pairs, f):
    """Verify ``d_E'(u, v) <= f(d_G(u, v))`` for every pair.

    Returns a :class:`StretchReport` whose ``worst_ratio`` is the largest
    ``d_E'/f(d_G)`` seen (``inf`` for a pair left disconnected).
    """
    sub = edges.as_graph() if isinstance(edges, EdgeSet) else g.edge_subgraph(edges)
    by_source = {}
    for u, v in pairs:
        if u != v:
            by_source.setdefault(min(u, v), set()).add(max(u, v))
    ok = True
    worst_pair, worst = None, 0
    for u in sorted(by_source):
        dg, _ = dijkstra(g, u)
        ds, _ = dijkstra(sub, u) if u in sub else ({u: 0}, None)
        for v in sorted(by_source[u]):
            budget = f(dg[v])
            dv = ds.get(v, float("inf"))
            ratio = dv / budget if dv != float("inf") else float("inf")
            if dv > budget + _TOL:
                ok = False
            if worst_pair is None or ratio > worst:
                worst_pair, worst = (u, v), ratio
    return StretchReport(ok, worst_pair, worst)


@dataclass
class SubsetSpanner:
    """Result of :func:`subsetwise_spanner`."""

    graph: Graph
    edges: EdgeSet
    terminals: tuple
    distortion: DistortionFn
    max_ratio: object
    closure_seconds: float = 0.0
    spanner_seconds: float = 0.0

    @property
    def weight(self):
        return self.edges.weight


def subsetwise_spanner(g, terminals, f, *, subroutine=None):
    """Subsetwise ``f``-spanner via the metric closure over the terminals.

    The closure over ``terminals`` is sparsified with the greedy spanner
    when ``f`` is multiplicative and with the exact oracle otherwise
    (``|T| <= 10``); the selected closure edges are expanded back into
    shortest paths of ``g``.  ``subroutine`` may replace the closure
    sparsifier: it is called as ``subroutine(closure_graph, f)`` and must
    return closure edges.
    """
    T = tuple(sorted(set(terminals)))
    if len(T) <= 1:
        return SubsetSpanner(g, EdgeSet(g), T, f, 0)
    t0 = time.perf_counter()
    closure = metric_closure(g, T)
    t1 = time.perf_counter()
    if subroutine is not None:
        selected = subroutine(closure.graph, f)
    elif f.is_multiplicative:
        selected = greedy_spanner(closure.graph, f.stretch)
    else:
        if len(T) > CLOSURE_ORACLE_MAX_TERMINALS:
            raise GuardExceededError(
                f"non-multiplicative distortion on the closure needs |T| <= "
                f"{CLOSURE_ORACLE_MAX_TERMINALS}, got {len(T)}"
            )
        from .exact import solve_exact

        selected = solve_exact(closure.graph, combinations(T, 2), f, max_edges=None)
    edges = expand_paths(closure, selected)
    t2 = time.perf_counter()
    report = check_stretch(g, edges, combinations(T, 2), f)
    if not report.ok:
        raise InfeasibleError(f"subsetwise spanner violates f on {report.worst_pair}")
    return SubsetSpanner(g, edges, T, f, report.worst_ratio, t1 - t0, t2 - t1)

