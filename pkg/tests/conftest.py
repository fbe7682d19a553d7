import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from maxlin.graph import Dag
from maxlin.model import WeightedDag

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


# --- random models ---------------------------------------------------------------------


def random_weighted_dag(rng: np.random.Generator, d: int, p_edge: float = 0.5, low=0.1, high=2.0) -> WeightedDag:
    """Random DAG on a random node order with uniform weights."""
    order = rng.permutation(d) + 1
    edges = []
    for a, b in itertools.combinations(range(d), 2):
        if rng.random() < p_edge:
            edges.append((int(order[a]), int(order[b]), float(rng.uniform(low, high))))
    return WeightedDag.from_edges(d, edges)


@st.composite
def dags(draw, min_d=1, max_d=7):
    d = draw(st.integers(min_d, max_d))
    perm = draw(st.permutations(list(range(1, d + 1))))
    pairs = list(itertools.combinations(range(d), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Dag(d, [(perm[a], perm[b]) for (a, b), keep in zip(pairs, mask) if keep])


@st.composite
def weighted_dags(draw, min_d=1, max_d=7, low=0.05, high=3.0):
    dag = draw(dags(min_d, max_d))
    weights = {
        e: draw(st.floats(low, high, allow_nan=False, allow_infinity=False))
        for e in sorted(dag.edges)
    }
    return WeightedDag(dag, weights)


# --- independent oracles ---------------------------------------------------------------


def bfs_ancestors(dag: Dag, i: int) -> set[int]:
    seen, frontier = set(), [i]
    while frontier:
        v = frontier.pop()
        for p in dag.parents(v):
            if p not in seen:
                seen.add(p)
                frontier.append(p)
    return seen


def brute_force_b(wd: WeightedDag) -> np.ndarray:
    """Max path weight by enumerating every path."""
    d = wd.d
    b = np.eye(d)
    for j in range(1, d + 1):
        for i in range(1, d + 1):
            if i == j:
                continue
            best = 0.0
            for path in wd.dag.all_paths(j, i):
                w = 1.0
                for a, c in zip(path, path[1:]):
                    w *= wd.weights[(a, c)]
                best = max(best, w)
            b[j - 1, i - 1] = best
    return b


def naive_odot(F, G):
    F, G = np.asarray(F, float), np.asarray(G, float)
    out = np.zeros((F.shape[0], G.shape[1]))
    for i in range(F.shape[0]):
        for j in range(G.shape[1]):
            out[i, j] = max(F[i, k] * G[k, j] for k in range(F.shape[1]))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
