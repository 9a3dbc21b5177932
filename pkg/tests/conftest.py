import itertools

import numpy as np
import pytest
from hypothesis import settings

from tririg.graph import Graph

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def random_graph(rng: np.random.Generator, n: int, p: float = 0.5) -> Graph:
    pairs = [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < p]
    return Graph(n, tuple(pairs))


def brute_canonical(g: Graph) -> int:
    """Minimum label over every permutation, straight from the bit definition."""
    best = None
    for perm in itertools.permutations(range(g.n)):
        bits = 0
        for i, j in g.edges:
            a, b = sorted((perm[i], perm[j]))
            k = a * g.n - a * (a + 1) // 2 + (b - a - 1)
            bits |= 1 << k
        best = bits if best is None else min(best, bits)
    return best


def brute_partitions(g: Graph) -> set:
    """All triangle partitions as frozensets of node triples, by plain subset search."""
    tris = [t for t in itertools.combinations(range(g.n), 3)
            if all(g.has_edge(a, b) for a, b in itertools.combinations(t, 2))]
    if g.m % 3:
        return set()
    k = g.m // 3
    edges = {tuple(e) for e in g.edges}
    out = set()
    for combo in itertools.combinations(tris, k):
        covered = [tuple(sorted(p)) for t in combo for p in itertools.combinations(t, 2)]
        if len(set(covered)) == len(covered) and set(covered) == edges:
            out.add(tuple(sorted(combo)))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, repeated at the end of the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
