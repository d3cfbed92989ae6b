"""Exact pairwise spanners: ILP model, LP-file export, in-process solvers.

The flow ILP has one binary ``x_e`` per edge and, for every pair
``(u, v)`` with ``u < v``, one binary per direction of every edge that
routes a ``u``-``v`` path of length at most ``f(d_G(u, v))`` through
selected edges.  :func:`solve_exact` finds the optimum either by a
combinatorial branch and bound (feasibility checked with shortest
paths, so arbitrary, even discontinuous, ``f`` is fine) or by handing
the ILP to HiGHS.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from ._io import atomic_write_text
from .distortion import DistortionFn
from .exceptions import GuardExceededError, InfeasibleError
from .graph import EdgeSet, Graph, dijkstra, edge_key
from .spanners import check_stretch

__all__ = [
    "PairSet",
    "ILPModel",
    "Constraint",
    "build_ilp",
    "export_lp",
    "format_lp",
    "solve_exact",
    "solve_exact_multilevel",
    "pair_budgets",
    "BNB_MAX_EDGES",
    "MULTILEVEL_DP_MAX_EDGES",
]

BNB_MAX_EDGES = 24
MULTILEVEL_DP_MAX_EDGES = 20


class PairSet(frozenset):
    """Unordered vertex pairs stored as ``(u, v)`` with ``u < v``."""

    def __new__(cls, pairs=()):
        out = set()
        for u, v in pairs:
            if u == v:
                raise ValueError(f"pair ({u}, {v}) has identical endpoints")
            out.add(edge_key(u, v))
        return super().__new__(cls, out)

    @classmethod
    def all_pairs(cls, vertices):
        return cls(combinations(sorted(set(vertices)), 2))

    def sorted(self):
        return sorted(self)


def pair_budgets(g, pairs, f):
    """``{(u, v): f(d_G(u, v))}``; rejects graphs that cannot satisfy ``f``."""
    by_source = {}
    for u, v in pairs:
        by_source.setdefault(u, []).append(v)
    budgets = {}
    for u in sorted(by_source):
        dist, _ = dijkstra(g, u)
        for v in by_source[u]:
            if v not in dist:
                raise InfeasibleError(f"{u} and {v} are disconnected in the input graph")
            budgets[(u, v)] = f(dist[v])
    return dict(sorted(budgets.items()))


# -- ILP model ----------------------------------------------------------------------


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple  # ((variable, coefficient), ...)
    sense: str  # "<=", "=", ">="
    rhs: object


@dataclass
class ILPModel:
    """Minimum-weight pairwise spanner ILP over binary variables."""

    graph: Graph
    pairs: tuple
    distortion: DistortionFn
    budgets: dict
    variables: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)
    constraints: list = field(default_factory=list)

    @property
    def n_variables(self):
        return len(self.variables)

    def group(self, prefix):
        return [c for c in self.constraints if c.name.startswith(prefix + "_")]


def edge_var(e):
    return f"x_e_{e[0]}_{e[1]}"


def arc_var(pair, i, j):
    return f"xp_{pair[0]}_{pair[1]}_{i}_{j}"


def build_ilp(g, pairs, f, *, unweighted=False):
    """Build the flow ILP for ``g``, pair set ``pairs`` and distortion ``f``.

    Constraint groups (prefix of the constraint name): ``budget`` (one per
    pair), ``flow`` and ``outdeg`` (one per pair and vertex), ``link``
    (one per pair and edge).  ``unweighted=True`` minimizes the edge
    count instead of the weight; path budgets still use the weights.
    """
    P = PairSet(pairs)
    if not P:
        raise ValueError("pair set is empty")
    g.require_connected()
    budgets = pair_budgets(g, P, f)
    E = g.edges
    V = g.vertices
    model = ILPModel(g, tuple(sorted(P)), f, budgets)
    model.variables = [edge_var(e) for e in E]
    model.objective = {edge_var(e): (1 if unweighted else g.weight(e)) for e in E}
    arcs = sorted([(i, j) for i, j in E] + [(j, i) for i, j in E])
    out_arcs = {v: [] for v in V}
    in_arcs = {v: [] for v in V}
    for i, j in arcs:
        out_arcs[i].append((i, j))
        in_arcs[j].append((i, j))
    for p in model.pairs:
        u, v = p
        model.variables.extend(arc_var(p, i, j) for i, j in arcs)
        model.constraints.append(
            Constraint(f"budget_{u}_{v}", tuple((arc_var(p, i, j), g.weight(i, j)) for i, j in arcs), "<=", budgets[p])
        )
        for x in V:
            terms = [(arc_var(p, i, j), 1) for i, j in out_arcs[x]]
            terms += [(arc_var(p, i, j), -1) for i, j in in_arcs[x]]
            rhs = 1 if x == u else -1 if x == v else 0
            model.constraints.append(Constraint(f"flow_{u}_{v}_{x}", tuple(terms), "=", rhs))
        for x in V:
            terms = tuple((arc_var(p, i, j), 1) for i, j in out_arcs[x])
            model.constraints.append(Constraint(f"outdeg_{u}_{v}_{x}", terms, "<=", 1))
        for i, j in E:
            terms = ((arc_var(p, i, j), 1), (arc_var(p, j, i), 1), (edge_var((i, j)), -1))
            model.constraints.append(Constraint(f"link_{u}_{v}_{i}_{j}", terms, "<=", 0))
    return model


def _fmt(x):
    """Deterministic decimal text for an exact or float coefficient."""
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        d = x.denominator
        while d % 2 == 0:
            d //= 2
        while d % 5 == 0:
            d //= 5
        if d == 1:
            # terminating decimal: print it exactly
            digits = 0
            q = x
            while q.denominator != 1:
                q *= 10
                digits += 1
            s = f"{abs(q.numerator):0{digits + 1}d}"
            body = s[:-digits] + "." + s[-digits:]
            return ("-" if x < 0 else "") + body
        return repr(float(x))
    return repr(float(x))


def _signed(x):
    s = _fmt(x)
    return s if s.startswith("-") else "+" + s


def format_lp(model):
    """CPLEX LP text of ``model``; deterministic for identical inputs."""
    lines = [
        "\\* pairwise spanner ILP *\\",
        f"\\* pairs={len(model.pairs)} edges={model.graph.m} distortion={model.distortion} *\\",
        "",
        "Minimize",
        " obj:",
    ]
    for var in model.variables:
        if var in model.objective:
            lines.append(f" {_signed(model.objective[var])} {var}")
    lines.append("")
    lines.append("Subject To")
    for c in model.constraints:
        lines.append(f" {c.name}:")
        for var, coef in c.terms:
            lines.append(f" {_signed(coef)} {var}")
        lines.append(f" {c.sense} {_fmt(c.rhs)}")
        lines.append("")
    lines.append("Binary")
    lines.extend(f" {var}" for var in model.variables)
    lines.append("")
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_lp(model, path):
    """Write :func:`format_lp` output atomically to ``path``."""
    atomic_write_text(path, format_lp(model))
    return path


# -- solvers -----------------------------------------------------------------------


class _Feasibility:
    """Shortest-path feasibility of candidate edge sets against pair budgets."""

    def __init__(self, g, budgets):
        self.g = g
        self.edges = list(g.edges)
        self.w = [g.weight(e) for e in self.edges]
        self.budgets = budgets
        self.by_source = {}
        for (u, v), b in budgets.items():
            self.by_source.setdefault(u, []).append((v, b))

    def _adj(self, idx):
        adj = {}
        for k in idx:
            u, v = self.edges[k]
            w = self.w[k]
            adj.setdefault(u, []).append((v, w))
            adj.setdefault(v, []).append((u, w))
        return adj

    def violated(self, idx):
        """Pairs whose budget ``idx`` fails to meet."""
        adj = self._adj(idx)
        bad = []
        for u, targets in self.by_source.items():
            cutoff = max(b for _, b in targets)
            dist = _dist_from(adj, u, cutoff)
            bad.extend((u, v) for v, b in targets if dist.get(v, math.inf) > b)
        return bad

    def extra_cost_bound(self, included, undecided, pairs):
        """Lower bound on weight to add so every pair in ``pairs`` is served.

        Included edges cost nothing, undecided edges cost their weight;
        the cheapest route for the worst pair bounds the completion.
        """
        adj = {}
        for k in included:
            u, v = self.edges[k]
            adj.setdefault(u, []).append((v, 0))
            adj.setdefault(v, []).append((u, 0))
        for k in undecided:
            u, v = self.edges[k]
            adj.setdefault(u, []).append((v, self.w[k]))
            adj.setdefault(v, []).append((u, self.w[k]))
        best = 0
        by_source = {}
        for u, v in pairs:
            by_source.setdefault(u, []).append(v)
        for u, targets in by_source.items():
            dist = _dist_from(adj, u, None)
            for v in targets:
                best = max(best, dist.get(v, math.inf))
        return best


def _dist_from(adj, source, cutoff):
    dist = {source: 0}
    heap = [(0, source)]
    done = set()
    while heap:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        for y, w in adj.get(x, ()):
            nd = d + w
            if cutoff is not None and nd > cutoff:
                continue
            if y not in dist or nd < dist[y]:
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return dist


def _solve_bnb(g, budgets, cost):
    feas = _Feasibility(g, budgets)
    m = len(feas.edges)
    c = [cost[e] for e in feas.edges]
    # branch on heavy edges first: excluding them early prunes the most weight
    order = sorted(range(m), key=lambda k: (-c[k], feas.edges[k]))

    # incumbent: drop edges greedily (heaviest first) while feasible
    current = set(range(m))
    for k in order:
        trial = current - {k}
        if not feas.violated(trial):
            current = trial
    best = [sum(c[k] for k in current), sorted(feas.edges[k] for k in current)]

    def consider(idx, weight):
        key = sorted(feas.edges[k] for k in idx)
        if weight < best[0] or (weight == best[0] and key < best[1]):
            best[0], best[1] = weight, key

    def rec(pos, included, weight):
        if weight > best[0]:
            return
        bad = feas.violated(included)
        if not bad:
            consider(included, weight)
            return
        if weight == best[0] or pos == m:
            return
        undecided = order[pos:]
        if feas.violated(included + undecided):
            return
        if weight + feas.extra_cost_bound(included, undecided, bad) > best[0]:
            return
        k = order[pos]
        rec(pos + 1, included + [k], weight + c[k])
        rec(pos + 1, included, weight)

    rec(0, [], 0)
    return best[1]


def _milp_options():
    return {"disp": False, "mip_rel_gap": 0.0}


def _solve_milp_model(model, extra_objective=None):
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import coo_matrix

    index = {v: k for k, v in enumerate(model.variables)}
    n = len(index)
    cvec = np.zeros(n)
    for var, coef in model.objective.items():
        cvec[index[var]] = float(coef)
    rows, cols, vals, lo, hi = [], [], [], [], []
    for r, con in enumerate(model.constraints):
        for var, coef in con.terms:
            rows.append(r)
            cols.append(index[var])
            vals.append(float(coef))
        rhs = float(con.rhs)
        lo.append(rhs if con.sense in ("=", ">=") else -np.inf)
        hi.append(rhs if con.sense in ("=", "<=") else np.inf)
    A = coo_matrix((vals, (rows, cols)), shape=(len(model.constraints), n)).tocsr()
    res = milp(
        cvec,
        constraints=LinearConstraint(A, lo, hi),
        integrality=np.ones(n),
        bounds=Bounds(0, 1),
        options=_milp_options(),
    )
    if res.x is None:
        raise InfeasibleError(f"MILP solver failed: {res.message}")
    return {var: res.x[k] > 0.5 for var, k in index.items()}


def solve_exact(g, pairs, f, *, max_edges=BNB_MAX_EDGES, backend="bnb", unweighted=False):
    """Minimum-weight edge set meeting ``d(u, v) <= f(d_G(u, v))`` on ``pairs``.

    Parameters
    ----------
    g : Graph
        Connected input graph.
    pairs : iterable of (u, v)
        Nonempty pair set.
    f : DistortionFn
    max_edges : int or None
        Size guard for the branch and bound; ``None`` disables it.
    backend : {"bnb", "milp", "auto"}
        ``"bnb"`` is the in-process branch and bound; ``"milp"`` solves
        the flow ILP with HiGHS; ``"auto"`` picks the branch and bound
        within the guard and HiGHS beyond it.
    unweighted : bool
        Minimize the number of edges instead of their weight.

    Returns
    -------
    EdgeSet
        An optimum; ties go to the lexicographically smallest sorted
        edge list (branch and bound only).
    """
    P = PairSet(pairs)
    if not P:
        raise ValueError("pair set is empty")
    g.require_connected()
    if backend == "auto":
        backend = "bnb" if max_edges is None or g.m <= max_edges else "milp"
    if backend == "bnb" and max_edges is not None and g.m > max_edges:
        raise GuardExceededError(f"branch and bound limited to {max_edges} edges, got {g.m}; export the ILP instead")
    budgets = pair_budgets(g, P, f)
    cost = {e: (1 if unweighted else g.weight(e)) for e in g.edges}
    if backend == "bnb":
        chosen = _solve_bnb(g, budgets, cost)
    elif backend == "milp":
        sol = _solve_milp_model(build_ilp(g, P, f, unweighted=unweighted))
        chosen = [e for e in g.edges if sol[edge_var(e)]]
    else:
        raise ValueError(f"unknown backend {backend!r}")
    out = EdgeSet(g, chosen)
    if not check_stretch(g, out, P, f).ok:
        raise InfeasibleError("exact solver returned an infeasible edge set")
    return out


# -- multi-level optimum ------------------------------------------------------------


def _level_pairs(h, f):
    """Pairs to certify and the top level each must hold on.

    Spanners need every terminal pair; connectivity-only (``f is None``)
    needs each terminal joined to a root present on all levels.
    """
    top = {}
    for i in range(1, h.ell + 1):
        for v in h.level(i):
            top[v] = i
    out = {}
    if f is None:
        root = min(h.level(h.ell))
        for v, lv in top.items():
            if v != root:
                out[edge_key(root, v)] = lv
    else:
        for u, v in combinations(sorted(top), 2):
            out[(u, v)] = min(top[u], top[v])
    return out


def _simple_path_masks(g, u, v, budget, bit):
    """Bitmasks of all simple ``u``-``v`` paths of length ``<= budget``."""
    masks = []
    adj = g._adj
    visited = {u}

    def dfs(x, length, mask):
        if x == v:
            masks.append(mask)
            return
        for y, w in adj[x]:
            if y in visited:
                continue
            nl = length + w
            if budget is not None and nl > budget:
                continue
            visited.add(y)
            dfs(y, nl, mask | bit[edge_key(x, y)])
            visited.discard(y)

    dfs(u, 0, 0)
    return masks


def _superset_closure(marks, m):
    """In place: ``marks[S] |= marks[T]`` for every submask ``T`` of ``S``."""
    for b in range(m):
        view = marks.reshape(-1, 2, 1 << b)
        view[:, 1, :] |= view[:, 0, :]
    return marks


def _submask_min(values, m):
    """Per mask ``S``: min over submasks of ``values`` and the arg submask."""
    val = values.copy()
    arg = np.arange(val.size, dtype=np.int64)
    for b in range(m):
        v = val.reshape(-1, 2, 1 << b)
        a = arg.reshape(-1, 2, 1 << b)
        take = v[:, 0, :] <= v[:, 1, :]
        a[:, 1, :] = np.where(take, a[:, 0, :], a[:, 1, :])
        v[:, 1, :] = np.where(take, v[:, 0, :], v[:, 1, :])
    return val, arg


def _multilevel_dp(g, h, f, gfn):
    E = list(g.edges)
    m = len(E)
    if m > MULTILEVEL_DP_MAX_EDGES:
        raise GuardExceededError(f"multi-level subset DP limited to {MULTILEVEL_DP_MAX_EDGES} edges, got {m}")
    bit = {e: 1 << k for k, e in enumerate(E)}
    N = 1 << m
    ell = h.ell
    need = _level_pairs(h, f)
    budgets = pair_budgets(g, need, f) if f is not None else {p: None for p in need}
    feas = [None] + [np.ones(N, dtype=bool) for _ in range(ell)]
    for p, top in need.items():
        marks = np.zeros(N, dtype=bool)
        masks = _simple_path_masks(g, p[0], p[1], budgets[p], bit)
        if not masks:
            raise InfeasibleError(f"no admissible path for pair {p}")
        marks[np.array(masks, dtype=np.int64)] = True
        _superset_closure(marks, m)
        for i in range(1, top + 1):
            feas[i] &= marks
    # level i contributes (g(i) - g(i-1)) * W(S_i); scale both factors to integers
    weights = [Fraction(g.weight(e)) for e in E]
    incs = [None] + [Fraction(gfn.increment(i)) for i in range(1, ell + 1)]
    w_den = math.lcm(1, *(w.denominator for w in weights))
    i_den = math.lcm(1, *(x.denominator for x in incs[1:]))
    wint = [int(w * w_den) for w in weights]
    coef = [None] + [int(x * i_den) for x in incs[1:]]
    if sum(wint) * max(coef[1:]) * ell >= 1 << 60:
        raise GuardExceededError("scaled costs overflow the subset DP")
    W = np.zeros(1, dtype=np.int64)
    for k in range(m):
        W = np.concatenate([W, W + wint[k]])
    INF = np.int64(1) << 61
    best = np.where(feas[ell], coef[ell] * W, INF)
    args = [None] * (ell + 1)
    for i in range(ell - 1, 0, -1):
        low, arg = _submask_min(best, m)
        args[i] = arg
        best = np.where(feas[i] & (low < INF), coef[i] * W + low, INF)
    S1 = int(np.argmin(best))
    if best[S1] >= INF:
        raise InfeasibleError("no feasible multi-level solution")
    masks = [None, S1]
    for i in range(1, ell):
        masks.append(int(args[i][masks[-1]]))
    return [[e for k, e in enumerate(E) if masks[i] >> k & 1] for i in range(1, ell + 1)]


def _multilevel_milp(g, h, f, gfn):
    """Nested-level flow ILP solved by HiGHS."""
    ell = h.ell
    need = _level_pairs(h, f)
    budgets = pair_budgets(g, need, f) if f is not None else {}
    E = list(g.edges)
    arcs = sorted([(i, j) for i, j in E] + [(j, i) for i, j in E])
    V = g.vertices
    model = ILPModel(g, tuple(sorted(need)), f, budgets)
    xv = {(e, i): f"x_{i}_{e[0]}_{e[1]}" for e in E for i in range(1, ell + 1)}
    model.variables = [xv[e, i] for i in range(1, ell + 1) for e in E]
    model.objective = {xv[e, i]: gfn.increment(i) * g.weight(e) for e in E for i in range(1, ell + 1)}
    for i in range(1, ell):
        for e in E:
            model.constraints.append(Constraint(f"nest_{i}_{e[0]}_{e[1]}", ((xv[e, i + 1], 1), (xv[e, i], -1)), "<=", 0))
    for p, top in sorted(need.items()):
        u, v = p
        model.variables.extend(arc_var(p, a, b) for a, b in arcs)
        if f is not None:
            model.constraints.append(
                Constraint(f"budget_{u}_{v}", tuple((arc_var(p, a, b), g.weight(a, b)) for a, b in arcs), "<=", budgets[p])
            )
        for x in V:
            terms = [(arc_var(p, a, b), 1) for a, b in arcs if a == x]
            terms += [(arc_var(p, a, b), -1) for a, b in arcs if b == x]
            rhs = 1 if x == u else -1 if x == v else 0
            model.constraints.append(Constraint(f"flow_{u}_{v}_{x}", tuple(terms), "=", rhs))
            model.constraints.append(
                Constraint(f"outdeg_{u}_{v}_{x}", tuple((arc_var(p, a, b), 1) for a, b in arcs if a == x), "<=", 1)
            )
        for a, b in E:
            terms = ((arc_var(p, a, b), 1), (arc_var(p, b, a), 1), (xv[(a, b), top], -1))
            model.constraints.append(Constraint(f"link_{u}_{v}_{a}_{b}", terms, "<=", 0))
    sol = _solve_milp_model(model)
    return [[e for e in E if sol[xv[e, i]]] for i in range(1, ell + 1)]


def solve_exact_multilevel(g, h, f, gfn, *, method="auto"):
    """Optimal nested solution over all grade assignments ``y: E -> {0..l}``.

    ``f=None`` asks for connectivity only (multi-level Steiner trees).

    ``method="dp"`` runs a subset dynamic program: for every edge subset
    and level it decides feasibility (superset closure of the admissible
    simple paths of each pair) and then minimizes over nested chains
    with submask-minimum transforms, covering the whole assignment space
    exactly.  ``method="milp"`` solves a nested flow ILP with HiGHS.
    ``"auto"`` uses the DP up to 20 edges.
    """
    from .multilevel import MultiLevelSolution

    g.require_connected()
    if method == "auto":
        method = "dp" if g.m <= MULTILEVEL_DP_MAX_EDGES else "milp"
    if method == "dp":
        levels = _multilevel_dp(g, h, f, gfn)
    elif method == "milp":
        levels = _multilevel_milp(g, h, f, gfn)
    else:
        raise ValueError(f"unknown method {method!r}")
    sol = MultiLevelSolution(g, [EdgeSet(g, lv) for lv in levels])
    if f is not None:
        for i in range(1, h.ell + 1):
            T = h.level(i)
            if len(T) > 1 and not check_stretch(g, sol.level(i), combinations(sorted(T), 2), f).ok:
                raise InfeasibleError(f"multi-level optimum fails level {i}")
    return sol
