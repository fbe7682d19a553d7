"""Immutable DAGs on nodes ``1..d`` and the structural queries we need.

Node labels are 1-based throughout the public API.  Matrix views
(`adjacency_mask`, `reachability_matrix`) are 0-based numpy arrays with
``M[j - 1, i - 1]`` describing the pair ``j -> i``.
"""

from __future__ import annotations

import heapq
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

from .errors import InvalidArgumentError, MalformedGraphError, TooManyPathsError

DEFAULT_PATH_CAP = 10**6

Edge = tuple[int, int]
Path = tuple[int, ...]


class Dag:
    """A directed acyclic graph with edges ``(j, i)`` meaning ``j -> i``.

    Construction validates the edge list; the object is immutable and
    its ancestor sets are computed once on first use.
    """

    def __init__(self, d: int, edges: Iterable[Edge] = ()):
        if int(d) != d or d < 1:
            raise MalformedGraphError(f"node count must be a positive integer, got {d!r}")
        d = int(d)
        seen: set[Edge] = set()
        ordered: list[Edge] = []
        for e in edges:
            try:
                j, i = (int(v) for v in e)
            except (TypeError, ValueError):
                raise MalformedGraphError(f"edge must be a pair of node labels, got {e!r}") from None
            if not (1 <= j <= d and 1 <= i <= d):
                raise MalformedGraphError(f"edge {j}->{i} references a node outside 1..{d}")
            if j == i:
                raise MalformedGraphError(f"self-loop at node {i}")
            if (j, i) in seen:
                raise MalformedGraphError(f"duplicate edge {j}->{i}")
            seen.add((j, i))
            ordered.append((j, i))
        self._d = d
        self._edges = frozenset(seen)
        parents: list[set[int]] = [set() for _ in range(d + 1)]
        children: list[set[int]] = [set() for _ in range(d + 1)]
        for j, i in ordered:
            parents[i].add(j)
            children[j].add(i)
        self._parents = tuple(frozenset(p) for p in parents)
        self._children = tuple(frozenset(c) for c in children)
        # raises on cycles
        self.topological_order()

    @property
    def d(self) -> int:
        return self._d

    @property
    def edges(self) -> frozenset[Edge]:
        return self._edges

    @property
    def nodes(self) -> range:
        return range(1, self._d + 1)

    def __eq__(self, other):
        if not isinstance(other, Dag):
            return NotImplemented
        return self._d == other._d and self._edges == other._edges

    def __hash__(self):
        return hash((self._d, self._edges))

    def __repr__(self):
        return f"Dag(d={self._d}, edges={sorted(self._edges)})"

    def _check(self, i: int) -> int:
        if int(i) != i or not 1 <= i <= self._d:
            raise InvalidArgumentError(f"node {i!r} outside 1..{self._d}")
        return int(i)

    def parents(self, i: int) -> frozenset[int]:
        return self._parents[self._check(i)]

    def children(self, i: int) -> frozenset[int]:
        return self._children[self._check(i)]

    @cached_property
    def _ancestor_sets(self) -> tuple[frozenset[int], ...]:
        anc: list[frozenset[int]] = [frozenset()] * (self._d + 1)
        for i in self.topological_order():
            acc: set[int] = set()
            for p in self._parents[i]:
                acc.add(p)
                acc |= anc[p]
            anc[i] = frozenset(acc)
        return tuple(anc)

    @cached_property
    def _descendant_sets(self) -> tuple[frozenset[int], ...]:
        desc: list[set[int]] = [set() for _ in range(self._d + 1)]
        for i in self.nodes:
            for a in self._ancestor_sets[i]:
                desc[a].add(i)
        return tuple(frozenset(s) for s in desc)

    def ancestors(self, i: int) -> frozenset[int]:
        """Strict ancestors ``an(i)``."""
        return self._ancestor_sets[self._check(i)]

    def ancestors_incl(self, i: int) -> frozenset[int]:
        """``An(i) = an(i) | {i}``."""
        return self.ancestors(i) | {int(i)}

    def descendants(self, i: int) -> frozenset[int]:
        return self._descendant_sets[self._check(i)]

    def adjacency_mask(self) -> np.ndarray:
        mask = np.zeros((self._d, self._d), dtype=bool)
        for j, i in self._edges:
            mask[j - 1, i - 1] = True
        return mask

    def reachability_matrix(self) -> np.ndarray:
        """``R[j-1, i-1]`` is true iff ``j`` is in ``An(i)``; diagonal true."""
        R = np.eye(self._d, dtype=bool)
        for i in self.nodes:
            for j in self._ancestor_sets[i]:
                R[j - 1, i - 1] = True
        return R

    def topological_order(self) -> list[int]:
        """Kahn's algorithm, ties broken by smallest label."""
        indeg = [len(p) for p in self._parents]
        heap = [i for i in range(1, self._d + 1) if indeg[i] == 0]
        heapq.heapify(heap)
        order: list[int] = []
        while heap:
            v = heapq.heappop(heap)
            order.append(v)
            for c in self._children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(heap, c)
        if len(order) != self._d:
            stuck = sorted(i for i in range(1, self._d + 1) if indeg[i] > 0)
            raise MalformedGraphError(f"graph has a cycle through nodes {stuck}")
        return order

    def iter_paths(self, j: int, i: int) -> Iterator[Path]:
        j, i = self._check(j), self._check(i)
        if j == i:
            raise InvalidArgumentError("paths need distinct endpoints")
        if j not in self._ancestor_sets[i]:
            return
        allowed = self._ancestor_sets[i] | {i}
        stack: list[tuple[int, Path]] = [(j, (j,))]
        while stack:
            v, path = stack.pop()
            for c in sorted(self._children[v], reverse=True):
                if c == i:
                    yield path + (c,)
                elif c in allowed:
                    stack.append((c, path + (c,)))

    def all_paths(self, j: int, i: int, cap: int = DEFAULT_PATH_CAP) -> list[Path]:
        """Every directed path from ``j`` to ``i`` as a node tuple."""
        out: list[Path] = []
        for p in self.iter_paths(j, i):
            out.append(p)
            if len(out) > cap:
                raise TooManyPathsError(f"more than {cap} paths from {j} to {i}")
        return out

    def to_json(self) -> dict:
        return {"d": self._d, "edges": [list(e) for e in sorted(self._edges)]}


def parents(dag: Dag, i: int) -> frozenset[int]:
    return dag.parents(i)


def ancestors(dag: Dag, i: int) -> frozenset[int]:
    return dag.ancestors(i)


def reachability_matrix(dag: Dag) -> np.ndarray:
    return dag.reachability_matrix()


def all_paths(dag: Dag, j: int, i: int, cap: int = DEFAULT_PATH_CAP) -> list[Path]:
    return dag.all_paths(j, i, cap)


def topological_order(dag: Dag) -> list[int]:
    return dag.topological_order()


def path_weight(path: Path, weights: dict[Edge, float]) -> float:
    w = 1.0
    for a, b in zip(path, path[1:]):
        w *= weights[(a, b)]
    return w
