"""Multi-level sparsifiers: cost model, quantizers, rounding and composite solvers.

Cost model
----------
A solution is a chain ``E_1 ⊇ E_2 ⊇ ... ⊇ E_l``; edge ``e`` has grade
``y(e) = max{i : e in E_i}`` and costs ``g(y(e)) * w(e)``.  Summed over
levels this is ``sum_i (g(i) - g(i-1)) * W(E_i)`` with ``g(0) = 0``, so
for ``g(i) = i`` every level a edge lives on adds ``w(e)`` once.  The
alternative where level ``i`` is charged ``g(i) * W(E_i)`` outright is
the same model with ``g`` replaced by its running sum; use
:meth:`LevelCostFn.cumulative` for it.

Rounding
--------
For ``Q = {i_1 = 1 < ... < i_m}`` a sparsifier ``H_j`` is computed for
each ``j`` in ``Q`` and level ``i`` gets ``H_k`` merged with every
``H_j`` above it, ``k`` being the largest element of ``Q`` that is at
most ``i``.  Within the block ``[i_k, i_{k+1} - 1]`` all levels are the
same, so an edge first added at ``i_k`` ends with grade at most
``a_k = i_{k+1} - 1`` (``i_{m+1} = l + 1``).  That gives the tight
constants used throughout::

    A = max_i g(a(i)) / g(i)            a(i): top of the block holding i
    B = max_k sum_{j<=k} g(a_j) / g(a_k)

and the bound ``cost <= A * B * OPT`` for exact single-level solvers.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .distortion import DistortionFn
from .exceptions import GuardExceededError
from .graph import EdgeSet, apsp, as_exact, connects, edge_key, is_forest, prune_leaves, spanning_forest
from .spanners import check_stretch, subsetwise_spanner
from .steiner import steiner_2approx, steiner_exact

__all__ = [
    "TerminalHierarchy",
    "LevelCostFn",
    "Quantizer",
    "QuantizerProfile",
    "quantizer_profile",
    "MultiLevelSolution",
    "SparsifierKind",
    "merge",
    "round_mlags",
    "best_q",
    "rounding_cost_bound",
    "composite",
    "ml_metric_closure_spanner",
    "grades_view",
    "make_solver",
    "load_terminals",
    "dump_terminals",
    "load_solution",
    "dump_solution",
    "ENUMERATE_MAX_ELL",
]

ENUMERATE_MAX_ELL = 20


# -- terminals ----------------------------------------------------------------------


class TerminalHierarchy:
    """Nested terminal sets ``T_1 ⊇ T_2 ⊇ ... ⊇ T_l``.

    Built from the list ``[T_1, ..., T_l]``; level ``i`` is 1-based.
    """

    def __init__(self, levels):
        levels = [tuple(sorted(set(T))) for T in levels]
        if not levels:
            raise ValueError("need at least one level")
        for i in range(1, len(levels)):
            if not set(levels[i]) <= set(levels[i - 1]):
                raise ValueError(f"T_{i + 1} is not contained in T_{i}")
        if not levels[-1]:
            raise ValueError(f"top level T_{len(levels)} is empty")
        self._levels = tuple(levels)

    @classmethod
    def from_vertex_levels(cls, mapping):
        """From ``{v: highest level at which v is a terminal}``."""
        if not mapping:
            raise ValueError("no terminals")
        ell = max(mapping.values())
        if min(mapping.values()) < 1:
            raise ValueError("terminal levels start at 1")
        return cls([[v for v, lv in mapping.items() if lv >= i] for i in range(1, ell + 1)])

    @property
    def ell(self):
        return len(self._levels)

    def level(self, i):
        if not 1 <= i <= self.ell:
            raise IndexError(f"level {i} outside 1..{self.ell}")
        return self._levels[i - 1]

    @property
    def levels(self):
        return self._levels

    def vertex_levels(self):
        out = {}
        for i, T in enumerate(self._levels, start=1):
            for v in T:
                out[v] = i
        return dict(sorted(out.items()))

    def sizes(self):
        return tuple(len(T) for T in self._levels)

    def check_graph(self, g):
        missing = [v for v in self._levels[0] if v not in g]
        if missing:
            raise ValueError(f"terminals not in graph: {missing}")
        return self

    def __eq__(self, other):
        return isinstance(other, TerminalHierarchy) and self._levels == other._levels

    def __hash__(self):
        return hash(self._levels)

    def __repr__(self):
        return f"TerminalHierarchy(sizes={self.sizes()})"


def load_terminals(text):
    """Parse ``v level`` lines (``#`` comments allowed)."""
    mapping = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'v level', got {raw.strip()!r}")
        try:
            v, lv = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: integers expected in {raw.strip()!r}") from None
        if v in mapping:
            raise ValueError(f"line {lineno}: terminal {v} listed twice")
        if lv < 1:
            raise ValueError(f"line {lineno}: level must be >= 1")
        mapping[v] = lv
    return TerminalHierarchy.from_vertex_levels(mapping)


def dump_terminals(h):
    return "".join(f"{v} {lv}\n" for v, lv in h.vertex_levels().items())


# -- level costs --------------------------------------------------------------------


@dataclass(frozen=True)
class LevelCostFn:
    """Level cost scaling ``g``: positive and nondecreasing on ``1..l``.

    ``kind`` is ``"linear"`` (``g(i) = scale * i``), ``"constant"``
    (``g(i) = scale``), ``"table"`` (``values[i-1]``) or
    ``"cumulative"`` (running sum of ``base``).
    """

    kind: str = "linear"
    scale: object = 1
    values: tuple = ()
    base: object = None

    def __post_init__(self):
        object.__setattr__(self, "scale", as_exact(self.scale))
        if self.kind == "table":
            vals = tuple(as_exact(v) for v in self.values)
            if not vals or vals[0] <= 0:
                raise ValueError("g(1) must be positive")
            if any(b < a for a, b in zip(vals, vals[1:])):
                raise ValueError("g must be nondecreasing")
            object.__setattr__(self, "values", vals)
        elif self.kind in ("linear", "constant"):
            if self.scale <= 0:
                raise ValueError("g(1) must be positive")
        elif self.kind == "cumulative":
            if not isinstance(self.base, LevelCostFn):
                raise ValueError("cumulative cost needs a base LevelCostFn")
        else:
            raise ValueError(f"unknown level cost kind {self.kind!r}")

    @classmethod
    def linear(cls, scale=1):
        return cls("linear", scale)

    @classmethod
    def constant(cls, value=1):
        return cls("constant", value)

    @classmethod
    def table(cls, values):
        return cls("table", values=tuple(values))

    def cumulative(self):
        """Cost with level ``i`` charged ``self(i) * W(E_i)`` on its own."""
        return LevelCostFn("cumulative", base=self)

    def __call__(self, i):
        if i <= 0:
            return 0
        if self.kind == "linear":
            return self.scale * i
        if self.kind == "constant":
            return self.scale
        if self.kind == "table":
            if i > len(self.values):
                raise ValueError(f"g table covers levels 1..{len(self.values)}, asked {i}")
            return self.values[i - 1]
        return sum((self.base(j) for j in range(1, i + 1)), 0)

    def increment(self, i):
        """``g(i) - g(i-1)``, the charge for keeping an edge on level ``i``."""
        return self(i) - self(i - 1)

    def __str__(self):
        if self.kind == "linear":
            return "linear" if self.scale == 1 else f"linear*{self.scale}"
        if self.kind == "constant":
            return f"constant:{self.scale}"
        if self.kind == "table":
            return "table:" + ",".join(map(str, self.values))
        return f"cumulative({self.base})"


# -- quantizers ---------------------------------------------------------------------


class Quantizer:
    """Rounding set ``Q = {1 = i_1 < ... < i_m} ⊆ {1..l}``."""

    def __init__(self, levels, ell):
        Q = tuple(levels)
        if ell < 1:
            raise ValueError("ell must be >= 1")
        if not Q or Q[0] != 1:
            raise ValueError("Q must contain 1 as its smallest element")
        if any(b <= a for a, b in zip(Q, Q[1:])):
            raise ValueError("Q must be strictly increasing")
        if Q[-1] > ell:
            raise ValueError(f"Q element {Q[-1]} exceeds ell={ell}")
        self.levels = Q
        self.ell = ell

    @classmethod
    def bottom_up(cls, ell):
        return cls((1,) if ell == 1 else (1, ell), ell)

    @classmethod
    def top_down(cls, ell):
        return cls(tuple(range(1, ell + 1)), ell)

    @classmethod
    def powers_of_two(cls, ell):
        out, p = [], 1
        while p <= ell:
            out.append(p)
            p *= 2
        return cls(out, ell)

    @classmethod
    def preset(cls, name, ell, custom=None):
        if name == "bu":
            return cls.bottom_up(ell)
        if name == "td":
            return cls.top_down(ell)
        if name == "powers2":
            return cls.powers_of_two(ell)
        if name == "custom":
            if custom is None:
                raise ValueError("custom preset needs explicit levels")
            return cls(custom, ell)
        raise ValueError(f"unknown preset {name!r}")

    @classmethod
    def all_subsets(cls, ell):
        """Every ``Q`` containing 1, in increasing ``(|Q|, Q)`` order."""
        rest = range(2, ell + 1)
        for r in range(ell):
            for extra in combinations(rest, r):
                yield cls((1,) + extra, ell)

    def block_tops(self):
        """``a_k = i_{k+1} - 1`` for every ``k`` (``i_{m+1} = l + 1``)."""
        nxt = self.levels[1:] + (self.ell + 1,)
        return tuple(b - 1 for b in nxt)

    def serving(self, i):
        """Largest element of ``Q`` that is ``<= i``."""
        return max(j for j in self.levels if j <= i)

    def q(self, i):
        """Highest level that an edge needed on level ``i`` ends up on."""
        tops = dict(zip(self.levels, self.block_tops()))
        return tops[self.serving(i)]

    def __iter__(self):
        return iter(self.levels)

    def __len__(self):
        return len(self.levels)

    def __contains__(self, i):
        return i in self.levels

    def __eq__(self, other):
        return isinstance(other, Quantizer) and (self.levels, self.ell) == (other.levels, other.ell)

    def __hash__(self):
        return hash((self.levels, self.ell))

    def __repr__(self):
        return f"Quantizer({list(self.levels)}, ell={self.ell})"

    def __str__(self):
        return "{" + ",".join(map(str, self.levels)) + "}"


@dataclass(frozen=True)
class QuantizerProfile:
    A: object
    B: object

    @property
    def bound(self):
        return self.A * self.B


def _ratio(a, b):
    return Fraction(a) / Fraction(b)


def quantizer_profile(gfn, Q):
    """Tight ``(A, B)`` for ``Q`` under ``gfn`` (see the module notes)."""
    A = max(_ratio(gfn(Q.q(i)), gfn(i)) for i in range(1, Q.ell + 1))
    tops = Q.block_tops()
    B = 0
    acc = 0
    for a in tops:
        acc += gfn(a)
        B = max(B, _ratio(acc, gfn(a)))
    return QuantizerProfile(_norm(A), _norm(B))


def _norm(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


# -- solutions ----------------------------------------------------------------------


class MultiLevelSolution:
    """Nested edge sets ``E_1 ⊇ ... ⊇ E_l`` of one graph."""

    def __init__(self, graph, levels, meta=None):
        levels = [lv if isinstance(lv, EdgeSet) else EdgeSet(graph, lv) for lv in levels]
        if not levels:
            raise ValueError("solution needs at least one level")
        for i in range(1, len(levels)):
            if not levels[i] <= levels[i - 1]:
                raise ValueError(f"E_{i + 1} is not contained in E_{i}")
        self.graph = graph
        self._levels = tuple(levels)
        self.meta = dict(meta or {})

    @classmethod
    def from_grades(cls, graph, grades, ell, meta=None):
        return cls(graph, [[e for e, y in grades.items() if y >= i] for i in range(1, ell + 1)], meta)

    @property
    def ell(self):
        return len(self._levels)

    def level(self, i):
        return self._levels[i - 1]

    @property
    def levels(self):
        return self._levels

    def grades(self):
        """``{e: y(e)}`` for every edge of the graph (0 when unused)."""
        y = {e: 0 for e in self.graph.edges}
        for i, lv in enumerate(self._levels, start=1):
            for e in lv.edges:
                y[e] = i
        return y

    def cost(self, gfn):
        """``sum_e g(y(e)) w(e)``."""
        return sum((gfn(y) * self.graph.weight(e) for e, y in self.grades().items() if y), 0)

    def level_cost(self, gfn):
        """``sum_i (g(i) - g(i-1)) W(E_i)``; equals :meth:`cost`."""
        return sum((gfn.increment(i) * lv.weight for i, lv in enumerate(self._levels, start=1)), 0)

    def weights(self):
        return tuple(lv.weight for lv in self._levels)

    def __eq__(self, other):
        return isinstance(other, MultiLevelSolution) and self._levels == other._levels

    def __repr__(self):
        return f"MultiLevelSolution(weights={list(self.weights())})"


def grades_view(sol):
    return sol.grades()


def dump_solution(sol):
    lines = [f"# ell={sol.ell}"]
    lines += [f"{u} {v} {y}" for (u, v), y in sorted(sol.grades().items()) if y > 0]
    return "\n".join(lines) + "\n"


def load_solution(text, graph):
    ell = None
    grades = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if s.startswith("#"):
            body = s[1:].strip()
            if body.startswith("ell="):
                ell = int(body[4:])
            continue
        if not s:
            continue
        parts = s.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 'u v y', got {s!r}")
        u, v, y = map(int, parts)
        e = edge_key(u, v)
        if not graph.has_edge(e):
            raise ValueError(f"line {lineno}: edge {e} not in graph")
        grades[e] = y
    if ell is None:
        ell = max(grades.values(), default=1)
    if any(not 0 <= y <= ell for y in grades.values()):
        raise ValueError(f"grades must lie in 0..{ell}")
    return MultiLevelSolution.from_grades(graph, grades, ell)


# -- sparsifier kinds and merging -----------------------------------------------------


@dataclass(frozen=True)
class SparsifierKind:
    """``"spanner"`` (with distortion ``f``) or ``"steiner"``."""

    kind: str
    f: DistortionFn | None = None

    def __post_init__(self):
        if self.kind not in ("spanner", "steiner"):
            raise ValueError(f"unknown sparsifier kind {self.kind!r}")
        if self.kind == "spanner" and self.f is None:
            raise ValueError("spanner kind needs a distortion")

    @classmethod
    def spanner(cls, f):
        return cls("spanner", f)

    @classmethod
    def steiner(cls):
        return cls("steiner")

    def admissible(self, g, edges, terminals):
        T = sorted(set(terminals))
        if len(T) <= 1:
            return True
        if self.kind == "spanner":
            return check_stretch(g, edges, combinations(T, 2), self.f).ok
        return is_forest(edges) and connects(edges, T)


def merge(kind, upper, lower, terminals):
    """``upper ⊕ lower`` over ``terminals``.

    Spanners merge by union.  Trees merge by union followed by a
    spanning tree that keeps every edge of ``upper`` (itself a tree) and
    pruning of non-terminal leaves; keeping ``upper`` intact means the
    merged tree contains it, which the nested levels rely on.
    """
    g = upper.graph
    if kind.kind == "spanner":
        return upper | lower
    union = upper.edges | lower.edges
    if is_forest(union):
        edges = union
    else:
        edges = spanning_forest(g, union, forced=upper.edges)
    return EdgeSet(g, prune_leaves(edges, set(terminals)))


# -- single-level solvers -------------------------------------------------------------


def make_solver(kind, subroutine="oracle", *, backend="auto"):
    """Single-level solver ``(g, T) -> EdgeSet`` for ``kind``.

    Spanners: ``"oracle"`` is the exact pairwise solver, ``"metric-closure"``
    the subsetwise construction over the closure.  Trees: ``"oracle"``
    is the exact Steiner tree, ``"metric-closure"`` the closure-MST
    2-approximation.
    """
    if subroutine not in ("oracle", "metric-closure"):
        raise ValueError(f"unknown subroutine {subroutine!r}")
    if kind.kind == "spanner":
        f = kind.f
        if subroutine == "oracle":
            from .exact import solve_exact

            def solver(g, T):
                T = sorted(set(T))
                if len(T) <= 1:
                    return EdgeSet(g)
                return solve_exact(g, combinations(T, 2), f, backend=backend)
        else:

            def solver(g, T):
                return subsetwise_spanner(g, T, f).edges
    else:
        if subroutine == "oracle":

            def solver(g, T):
                return steiner_exact(g, T)
        else:

            def solver(g, T):
                return steiner_2approx(g, T)
    solver.kind = kind
    solver.subroutine = subroutine
    return solver


class LevelCache:
    """Memo of single-level solutions ``H_i`` (and their solve time)."""

    def __init__(self, g, h, solver):
        self.g, self.h, self.solver = g, h, solver
        self._store = {}
        self.seconds = {}

    def __call__(self, i):
        if i not in self._store:
            t0 = time.perf_counter()
            self._store[i] = self.solver(self.g, self.h.level(i))
            self.seconds[i] = time.perf_counter() - t0
        return self._store[i]

    def mins(self):
        """``(MIN_1, ..., MIN_l)`` as measured weights, solving every level."""
        return tuple(self(i).weight for i in range(1, self.h.ell + 1))


# -- rounding ----------------------------------------------------------------------------


def round_mlags(g, h, Q, kind, solver, *, cache=None):
    """Rounded multi-level solution for quantizer ``Q``.

    Solves only the levels in ``Q`` and merges top-down: the block of
    ``Q``'s largest element gets ``H_{i_m}``, each lower block merges its
    own ``H`` into the block above.
    """
    if Q.ell != h.ell:
        raise ValueError(f"quantizer built for ell={Q.ell}, hierarchy has ell={h.ell}")
    g.require_connected()
    h.check_graph(g)
    cache = cache or LevelCache(g, h, solver)
    levels = [None] * (h.ell + 1)
    current = None
    tops = Q.block_tops()
    for k in range(len(Q) - 1, -1, -1):
        start, stop = Q.levels[k], tops[k]
        H = cache(start)
        current = H if current is None else merge(kind, current, H, h.level(start))
        for i in range(start, stop + 1):
            levels[i] = current
    sol = MultiLevelSolution(g, levels[1:], meta={"Q": Q.levels})
    return sol


def rounding_cost_bound(Q, mins, gfn):
    """``sum_k g(i_{k+1} - 1) * MIN_{i_k}``."""
    return sum((gfn(a) * mins[i - 1] for i, a in zip(Q.levels, Q.block_tops())), 0)


def best_q(y, gfn):
    """Minimize ``sum_k g(i_{k+1} - 1) * y_{i_k}`` over ``Q ∋ 1``.

    Shortest path from node 1 to node ``l + 1`` where arc ``(i, j)``
    costs ``g(j - 1) * y_i``; the visited nodes (sink excluded) form
    ``Q``.  Ties go to smaller ``|Q|``, then the lexicographically
    smaller ``Q``.  Returns ``(Quantizer, value)``.
    """
    y = [as_exact(v) for v in y]
    ell = len(y)
    if ell < 1:
        raise ValueError("empty vector")
    if any(v < 0 for v in y):
        raise ValueError("negative entry in y")
    best = {1: (0, 0, ())}
    for j in range(2, ell + 2):
        cands = []
        for i in range(1, j):
            val, cnt, path = best[i]
            cands.append((val + gfn(j - 1) * y[i - 1], cnt + 1, path + (i,)))
        best[j] = min(cands)
    val, _, path = best[ell + 1]
    return Quantizer(path, ell), _norm(val)


# -- composite ---------------------------------------------------------------------------


def composite(g, h, kind, solver, gfn=None, *, mode="enumerate", cache=None):
    """Best rounded solution over many quantizers.

    ``mode="enumerate"`` tries every ``Q ∋ 1`` (``l <= 20``) and keeps the
    cheapest under ``gfn``; ties go to the first in ``(|Q|, Q)`` order.
    ``mode="measured"`` solves each level once, feeds the weights
    ``MIN_i`` to :func:`best_q` and rounds with the winner.  The chosen
    ``Q`` is recorded in ``meta["Q"]``.
    """
    gfn = gfn or LevelCostFn.linear()
    cache = cache or LevelCache(g, h, solver)
    if mode == "enumerate":
        if h.ell > ENUMERATE_MAX_ELL:
            raise GuardExceededError(f"enumerate mode limited to ell <= {ENUMERATE_MAX_ELL}")
        best, best_cost = None, None
        for Q in Quantizer.all_subsets(h.ell):
            sol = round_mlags(g, h, Q, kind, solver, cache=cache)
            c = sol.cost(gfn)
            if best is None or c < best_cost:
                best, best_cost = sol, c
        best.meta["mode"] = "enumerate"
        return best
    if mode == "measured":
        Q, _ = best_q(cache.mins(), gfn)
        sol = round_mlags(g, h, Q, kind, solver, cache=cache)
        sol.meta["mode"] = "measured"
        return sol
    raise ValueError(f"unknown mode {mode!r}")


# -- metric-closure multi-level spanner -----------------------------------------------


def ml_metric_closure_spanner(g, h, f):
    """Multi-level spanner built from one subsetwise spanner over ``T_1``.

    ``E_1`` is the metric-closure subsetwise spanner over ``T_1``; level
    ``j`` keeps the deterministic shortest paths inside ``E_1`` between
    pairs of ``T_j``.  Such a path is no longer than the ``E_1`` distance,
    so every level meets ``f``; the achieved worst ratio per level is
    stored in ``meta["stretch"]``.
    """
    g.require_connected()
    h.check_graph(g)
    first = subsetwise_spanner(g, h.level(1), f).edges
    levels = [first]
    if h.ell > 1 and len(h.level(2)) > 1:
        table = apsp(first.as_graph(), sources=h.level(2))
    for j in range(2, h.ell + 1):
        edges = set()
        for u, v in combinations(h.level(j), 2):
            edges.update(table.path_edges(u, v))
        levels.append(EdgeSet(g, edges))
    sol = MultiLevelSolution(g, levels, meta={"algorithm": "metric-closure-multilevel"})
    stretch = {}
    for j in range(1, h.ell + 1):
        T = h.level(j)
        if len(T) > 1:
            report = check_stretch(g, sol.level(j), combinations(T, 2), f)
            stretch[j] = (report.ok, report.worst_ratio)
        else:
            stretch[j] = (True, 0)
    sol.meta["stretch"] = stretch
    return sol
