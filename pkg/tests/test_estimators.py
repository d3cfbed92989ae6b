from fractions import Fraction

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from mlsparse import MultiLevelSparsifier, SteinerTree, SubsetwiseSpanner
from mlsparse.distortion import DistortionFn
from mlsparse.exact import solve_exact_multilevel
from mlsparse.multilevel import LevelCostFn, Quantizer, TerminalHierarchy
from mlsparse.validation import (
    check_distortion,
    check_edges,
    check_graph,
    check_hierarchy,
    check_level_cost,
    check_quantizer,
    check_terminals,
    parse_int_list,
)

from conftest import random_connected


@pytest.fixture
def inst(rng):
    g = random_connected(rng, 8, 13)
    h = TerminalHierarchy([[0, 1, 2, 4, 6], [1, 4, 6], [4, 6]])
    return g, h


def test_params_and_clone():
    est = MultiLevelSparsifier(kind="steiner", strategy="td", cost="constant")
    assert est.get_params()["strategy"] == "td"
    other = clone(est)
    assert other.get_params() == est.get_params() and other is not est
    est.set_params(strategy="bu")
    assert est.strategy == "bu"
    assert SubsetwiseSpanner(distortion=3).get_params() == {"distortion": 3, "method": "metric-closure"}


def test_not_fitted():
    for est in (SubsetwiseSpanner(), SteinerTree(), MultiLevelSparsifier()):
        with pytest.raises(NotFittedError):
            est.predict([(1, 2)])


def test_subsetwise_spanner_estimator(inst):
    g, _ = inst
    a = SubsetwiseSpanner(distortion=2).fit(g, [0, 2, 6])
    b = SubsetwiseSpanner(distortion=2, method="exact").fit(g, [0, 2, 6])
    assert b.weight_ <= a.weight_
    pred = a.predict(sorted(g.edges))
    assert pred.dtype == np.int64 and pred.sum() == len(a.edges_)
    assert a.max_ratio_ <= 1


def test_steiner_estimator(inst):
    g, _ = inst
    approx = SteinerTree().fit(g, [0, 2, 6])
    exact = SteinerTree(method="exact").fit(g, [0, 2, 6])
    assert exact.weight_ <= approx.weight_ <= 2 * exact.weight_


@pytest.mark.parametrize("strategy", ["bu", "td", "powers2", "composite", "measured", "metric-closure", "optimal"])
def test_multilevel_strategies(inst, strategy):
    g, h = inst
    est = MultiLevelSparsifier(distortion="x2", strategy=strategy).fit(g, h)
    opt = solve_exact_multilevel(g, h, DistortionFn.multiplicative(2), LevelCostFn.linear()).cost(LevelCostFn.linear())
    assert est.cost_ >= opt
    grades = est.predict(sorted(g.edges))
    assert grades.max() <= 3 and est.score() == -float(est.cost_)
    if strategy in ("bu", "td", "powers2", "composite", "measured"):
        assert est.profile_ is not None
    else:
        assert est.quantizer_ is None


def test_custom_strategy(inst):
    g, h = inst
    est = MultiLevelSparsifier(strategy="custom", q=(1, 3)).fit(g, h)
    assert est.quantizer_ == Quantizer((1, 3), 3)
    with pytest.raises(ValueError):
        MultiLevelSparsifier(strategy="custom").fit(g, h)


def test_hierarchy_as_mapping(inst):
    g, h = inst
    a = MultiLevelSparsifier(kind="steiner", strategy="td").fit(g, h.vertex_levels())
    b = MultiLevelSparsifier(kind="steiner", strategy="td").fit(g, [list(T) for T in h.levels])
    assert a.grades_ == b.grades_


def test_bad_parameters(inst):
    g, h = inst
    with pytest.raises(ValueError):
        MultiLevelSparsifier(kind="forest").fit(g, h)
    with pytest.raises(ValueError):
        MultiLevelSparsifier(strategy="random").fit(g, h)
    with pytest.raises(ValueError):
        MultiLevelSparsifier(kind="steiner", strategy="metric-closure").fit(g, h)
    with pytest.raises(ValueError):
        SteinerTree(method="fast").fit(g, [0, 1])


# -- validation helpers ----------------------------------------------------------------


def test_check_graph_inputs(PATH3):
    assert check_graph(PATH3) is PATH3
    assert check_graph("1 2 1\n2 3 1") == PATH3
    assert check_graph([(1, 2, 1), (2, 3, 1)]) == PATH3
    with pytest.raises(TypeError):
        check_graph(42)


def test_check_terminals(PATH3):
    assert check_terminals(PATH3, [3, 1, 3]) == [1, 3]
    with pytest.raises(ValueError):
        check_terminals(PATH3, [9])
    with pytest.raises(ValueError):
        check_terminals(PATH3, [], min_size=1)


def test_check_hierarchy(PATH3):
    assert check_hierarchy(PATH3, {1: 2, 3: 2, 2: 1}).sizes() == (3, 2)
    with pytest.raises(ValueError):
        check_hierarchy(PATH3, [[1, 7]])


def test_check_distortion():
    assert check_distortion(2)(3) == 6
    assert check_distortion("+1")(3) == 4
    with pytest.raises(TypeError):
        check_distortion(True)


def test_check_level_cost():
    assert check_level_cost(None)(4) == 4
    assert check_level_cost("table:1,2,5")(3) == 5
    assert check_level_cost([1, 1])(2) == 1
    with pytest.raises(ValueError):
        check_level_cost("cubic")


def test_check_quantizer():
    assert check_quantizer("powers2", 5).levels == (1, 2, 4)
    assert check_quantizer("1,3", 4).levels == (1, 3)
    assert check_quantizer([1, 2], 2).levels == (1, 2)
    with pytest.raises(ValueError):
        check_quantizer(Quantizer((1,), 2), 3)


def test_check_edges(PATH3):
    assert check_edges(PATH3, [(2, 1)]) == [(1, 2)]
    with pytest.raises(ValueError):
        check_edges(PATH3, [(1, 3)])


def test_parse_int_list():
    assert parse_int_list("1, 2,4") == [1, 2, 4]
    with pytest.raises(ValueError):
        parse_int_list("1,x")


def test_exact_fraction_distortion():
    est = SubsetwiseSpanner(distortion=Fraction(3, 2), method="exact")
    assert est.get_params()["distortion"] == Fraction(3, 2)
