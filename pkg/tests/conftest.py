import random
from pathlib import Path

import pytest

from mlsparse.graph import Graph

GOLDEN = Path(__file__).parent / "golden"

# acceptance criterion number -> PASS/FAIL line, filled by test_acceptance.py
ACCEPTANCE = {}

# triangle a, b, c  ->  1, 2, 3
A, B, C = 1, 2, 3


def path3():
    return Graph([(1, 2, 1), (2, 3, 1)])


def tri():
    return Graph([(A, B, 1), (B, C, 1), (A, C, 3)])


def cycle4():
    return Graph([(1, 2, 1), (2, 3, 1), (3, 4, 1), (1, 4, 1)])


def random_connected(rng, n, m, wmax=5):
    """Random connected graph on 0..n-1: a random spanning tree plus extra edges."""
    order = list(range(n))
    rng.shuffle(order)
    edges = {}
    for k in range(1, n):
        u, v = order[k], order[rng.randrange(k)]
        edges[(min(u, v), max(u, v))] = rng.randint(1, wmax)
    pool = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in edges]
    rng.shuffle(pool)
    for e in pool[: max(0, m - (n - 1))]:
        edges[e] = rng.randint(1, wmax)
    return Graph([(u, v, w) for (u, v), w in edges.items()])


@pytest.fixture
def PATH3():
    return path3()


@pytest.fixture
def TRI():
    return tri()


@pytest.fixture
def CYCLE4():
    return cycle4()


@pytest.fixture
def rng():
    return random.Random(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
