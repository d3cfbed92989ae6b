"""Estimator-style wrappers (``fit`` / ``predict`` / ``get_params``).

``fit`` takes a graph and its terminals; ``predict`` maps edges to what
the fitted sparsifier assigns them: membership (0/1) for single-level
sparsifiers and grades of service for multi-level ones.  Parameters are
plain constructor arguments so ``get_params`` / ``set_params`` and
``sklearn.base.clone`` work as usual.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exact import solve_exact, solve_exact_multilevel
from .graph import EdgeSet
from .multilevel import (
    SparsifierKind,
    composite,
    make_solver,
    ml_metric_closure_spanner,
    quantizer_profile,
    round_mlags,
)
from .spanners import check_stretch, subsetwise_spanner
from .steiner import steiner_2approx, steiner_exact
from .validation import (
    check_distortion,
    check_edges,
    check_graph,
    check_hierarchy,
    check_level_cost,
    check_quantizer,
    check_terminals,
)

__all__ = ["SubsetwiseSpanner", "SteinerTree", "MultiLevelSparsifier"]


class _EdgeMembership:
    def predict(self, edges):
        """1 for edges kept by the fitted sparsifier, else 0."""
        check_is_fitted(self, "edges_")
        keys = check_edges(self.graph_, edges)
        return np.array([1 if e in self.edges_.edges else 0 for e in keys], dtype=np.int64)


class SubsetwiseSpanner(_EdgeMembership, BaseEstimator):
    """Subsetwise spanner over a terminal set.

    Parameters
    ----------
    distortion : DistortionFn, str or float, default=2
        ``f``; a number means multiplicative stretch.
    method : {"metric-closure", "exact"}
        Closure construction or the exact minimum.
    """

    def __init__(self, distortion=2, method="metric-closure"):
        self.distortion = distortion
        self.method = method

    def fit(self, graph, terminals):
        g = check_graph(graph)
        T = check_terminals(g, terminals)
        f = check_distortion(self.distortion)
        if self.method == "metric-closure":
            res = subsetwise_spanner(g, T, f)
            self.edges_ = res.edges
            self.max_ratio_ = res.max_ratio
        elif self.method == "exact":
            self.edges_ = solve_exact(g, combinations(T, 2), f, backend="auto") if len(T) > 1 else EdgeSet(g)
            self.max_ratio_ = check_stretch(g, self.edges_, combinations(T, 2), f).worst_ratio
        else:
            raise ValueError(f"unknown method {self.method!r}")
        self.graph_ = g
        self.terminals_ = tuple(T)
        self.weight_ = self.edges_.weight
        return self


class SteinerTree(_EdgeMembership, BaseEstimator):
    """Steiner tree over a terminal set (``method="approx"`` or ``"exact"``)."""

    def __init__(self, method="approx"):
        self.method = method

    def fit(self, graph, terminals):
        g = check_graph(graph)
        T = check_terminals(g, terminals)
        if self.method == "approx":
            self.edges_ = steiner_2approx(g, T)
        elif self.method == "exact":
            self.edges_ = steiner_exact(g, T)
        else:
            raise ValueError(f"unknown method {self.method!r}")
        self.graph_ = g
        self.terminals_ = tuple(T)
        self.weight_ = self.edges_.weight
        return self


class MultiLevelSparsifier(BaseEstimator):
    """Nested sparsifiers over nested terminal sets.

    Parameters
    ----------
    kind : {"spanner", "steiner"}
    distortion : DistortionFn, str or float
        Only for spanners.
    strategy : str
        ``"bu"``, ``"td"``, ``"powers2"``, ``"custom"`` (uses ``q``),
        ``"composite"`` (best of all quantizers), ``"measured"``
        (quantizer picked from measured level weights),
        ``"metric-closure"`` (one closure spanner shared by all levels)
        or ``"optimal"`` (exact, small instances).
    q : iterable of int, optional
        Levels for ``strategy="custom"``.
    subroutine : {"oracle", "metric-closure"}
        Single-level solver for the rounding strategies.
    cost : str or LevelCostFn
        Level cost ``g``.
    """

    def __init__(self, kind="spanner", distortion=2, strategy="composite", q=None, subroutine="oracle", cost="linear"):
        self.kind = kind
        self.distortion = distortion
        self.strategy = strategy
        self.q = q
        self.subroutine = subroutine
        self.cost = cost

    def _kind(self):
        if self.kind == "spanner":
            return SparsifierKind.spanner(check_distortion(self.distortion))
        if self.kind == "steiner":
            return SparsifierKind.steiner()
        raise ValueError(f"unknown kind {self.kind!r}")

    def fit(self, graph, hierarchy):
        g = check_graph(graph)
        h = check_hierarchy(g, hierarchy)
        gfn = check_level_cost(self.cost)
        kind = self._kind()
        self.quantizer_ = None
        if self.strategy in ("bu", "td", "powers2", "custom"):
            if self.strategy == "custom":
                if self.q is None:
                    raise ValueError("strategy='custom' needs q")
                Q = check_quantizer(self.q, h.ell)
            else:
                Q = check_quantizer(self.strategy, h.ell)
            sol = round_mlags(g, h, Q, kind, make_solver(kind, self.subroutine))
            self.quantizer_ = Q
        elif self.strategy in ("composite", "measured"):
            mode = "enumerate" if self.strategy == "composite" else "measured"
            sol = composite(g, h, kind, make_solver(kind, self.subroutine), gfn, mode=mode)
            self.quantizer_ = check_quantizer(sol.meta["Q"], h.ell)
        elif self.strategy == "metric-closure":
            if kind.kind != "spanner":
                raise ValueError("metric-closure strategy builds spanners only")
            sol = ml_metric_closure_spanner(g, h, kind.f)
        elif self.strategy == "optimal":
            sol = solve_exact_multilevel(g, h, kind.f, gfn)
        else:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        self.graph_ = g
        self.hierarchy_ = h
        self.solution_ = sol
        self.grades_ = sol.grades()
        self.cost_ = sol.cost(gfn)
        self.profile_ = quantizer_profile(gfn, self.quantizer_) if self.quantizer_ is not None else None
        return self

    def predict(self, edges):
        """Grade of service ``y(e)`` of each edge (0 when unused)."""
        check_is_fitted(self, "grades_")
        keys = check_edges(self.graph_, edges)
        return np.array([self.grades_[e] for e in keys], dtype=np.int64)

    def score(self, graph=None, hierarchy=None):
        """Negative cost of the fitted solution (higher is better)."""
        check_is_fitted(self, "cost_")
        return -float(self.cost_)
