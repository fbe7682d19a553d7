import itertools

import numpy as np
import pytest
from hypothesis import given

from conftest import bfs_ancestors, dags
from maxlin.errors import InvalidArgumentError, MalformedGraphError, TooManyPathsError
from maxlin.graph import Dag, all_paths, ancestors, parents, path_weight, reachability_matrix, topological_order
from maxlin.tropical import closure

CHAIN = Dag(3, [(1, 2), (2, 3)])
DIAMOND = Dag(4, [(1, 2), (1, 3), (2, 4), (3, 4)])
TRIANGLE = Dag(3, [(1, 2), (2, 3), (1, 3)])


def complete_dag(d):
    return Dag(d, itertools.combinations(range(1, d + 1), 2))


def test_parents():
    assert parents(CHAIN, 3) == {2}
    assert parents(Dag(3, [(1, 2)]), 3) == set()
    assert parents(DIAMOND, 4) == {2, 3}
    with pytest.raises(InvalidArgumentError):
        parents(CHAIN, 4)
    with pytest.raises(InvalidArgumentError):
        parents(CHAIN, 0)


def test_ancestors():
    assert ancestors(CHAIN, 3) == {1, 2}
    assert ancestors(CHAIN, 1) == set()
    assert ancestors(DIAMOND, 4) == {1, 2, 3}
    assert DIAMOND.ancestors_incl(4) == {1, 2, 3, 4}
    assert DIAMOND.descendants(1) == {2, 3, 4}
    with pytest.raises(InvalidArgumentError):
        ancestors(CHAIN, 5)


def test_reachability():
    np.testing.assert_array_equal(reachability_matrix(Dag(3)), np.eye(3, dtype=bool))
    np.testing.assert_array_equal(reachability_matrix(CHAIN), np.triu(np.ones((3, 3), dtype=bool)))


def test_all_paths_examples():
    assert all_paths(CHAIN, 1, 3) == [(1, 2, 3)]
    assert set(all_paths(TRIANGLE, 1, 3)) == {(1, 3), (1, 2, 3)}
    assert all_paths(CHAIN, 3, 1) == []
    with pytest.raises(InvalidArgumentError):
        all_paths(CHAIN, 2, 2)
    with pytest.raises(InvalidArgumentError):
        all_paths(CHAIN, 1, 9)


def test_path_cap():
    with pytest.raises(TooManyPathsError):
        complete_dag(8).all_paths(1, 8, cap=10)


@pytest.mark.parametrize("d", [4, 5, 6])
def test_complete_dag_path_count(d):
    assert len(all_paths(complete_dag(d), 1, d)) == 2 ** (d - 2)


def test_complete_dag_paths_match_subsets():
    d = 5
    expected = {(1,) + s + (d,) for r in range(d - 1) for s in itertools.combinations(range(2, d), r)}
    assert set(all_paths(complete_dag(d), 1, d)) == expected


def test_topological_order_examples():
    assert topological_order(CHAIN) == [1, 2, 3]
    assert topological_order(Dag(3)) == [1, 2, 3]
    assert topological_order(DIAMOND) == [1, 2, 3, 4]
    assert topological_order(Dag(3, [(3, 1), (2, 1)])) == [2, 3, 1]


@pytest.mark.parametrize(
    "d,edges",
    [
        (3, [(1, 2), (2, 3), (3, 1)]),
        (2, [(1, 1)]),
        (2, [(1, 2), (1, 2)]),
        (2, [(1, 3)]),
        (0, []),
        (2, [(1,)]),
    ],
)
def test_malformed(d, edges):
    with pytest.raises(MalformedGraphError):
        Dag(d, edges)


def test_path_weight():
    assert path_weight((1, 2, 3), {(1, 2): 0.5, (2, 3): 0.8}) == pytest.approx(0.4)


def test_equality_and_json():
    assert Dag(2, [(1, 2)]) == Dag(2, [[1, 2]])
    assert hash(Dag(2, [(1, 2)])) == hash(Dag(2, [(1, 2)]))
    assert DIAMOND.to_json() == {"d": 4, "edges": [[1, 2], [1, 3], [2, 4], [3, 4]]}


@given(dags(max_d=10))
def test_ancestors_union_of_parents(dag):
    for i in dag.nodes:
        union = set()
        for p in dag.parents(i):
            union |= dag.ancestors_incl(p)
        assert dag.ancestors(i) == union
        assert dag.ancestors(i) == bfs_ancestors(dag, i)


@given(dags(max_d=10))
def test_topological_order_respects_edges(dag):
    order = dag.topological_order()
    assert sorted(order) == list(dag.nodes)
    pos = {v: k for k, v in enumerate(order)}
    assert all(pos[j] < pos[i] for j, i in dag.edges)


@given(dags(max_d=8))
def test_reachability_is_closure_support(dag):
    A = dag.adjacency_mask().astype(float)
    np.testing.assert_array_equal(dag.reachability_matrix(), closure(A) > 0)


@given(dags(max_d=6))
def test_paths_are_valid_and_distinct(dag):
    for j in dag.nodes:
        for i in dag.nodes:
            if i == j:
                continue
            paths = dag.all_paths(j, i)
            assert len(paths) == len(set(paths))
            assert bool(paths) == (j in dag.ancestors(i))
            for p in paths:
                assert p[0] == j and p[-1] == i
                assert all(e in dag.edges for e in zip(p, p[1:]))
