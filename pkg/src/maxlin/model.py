"""Recursive max-linear models: coefficient matrices, their support and
ratio structure, and the class of weighted DAGs sharing one matrix.

An ML coefficient matrix ``B`` is a ``d x d`` numpy array with
``B[j-1, i-1]`` the largest path weight from ``j`` to ``i`` (unit
diagonal, zero when ``j`` is not an ancestor of ``i``).
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import InvalidArgumentError, MalformedGraphError
from .graph import Dag, Edge
from .tropical import as_nonneg, closure, odot

#: relative tolerance for "two path products are equal"
PATH_TIE_RTOL = 1e-9
#: relative tolerance used when de-duplicating atoms
ATOM_DEDUP_RTOL = 1e-12
#: relative tolerance for "rebuilds to the same matrix"
REBUILD_RTOL = 1e-12


def _close(a: float, b: float, rtol: float) -> bool:
    return abs(a - b) <= rtol * max(abs(a), abs(b))


@dataclass(frozen=True)
class WeightedDag:
    """A DAG with a strictly positive weight on every edge."""

    dag: Dag
    weights: Mapping[Edge, float] = field(default_factory=dict)

    def __post_init__(self):
        w = {(int(j), int(i)): float(v) for (j, i), v in dict(self.weights).items()}
        if set(w) != set(self.dag.edges):
            missing = sorted(set(self.dag.edges) - set(w))
            extra = sorted(set(w) - set(self.dag.edges))
            raise InvalidArgumentError(f"weights must cover exactly the edges; missing={missing} extra={extra}")
        for e, v in w.items():
            if not (v > 0 and np.isfinite(v)):
                raise InvalidArgumentError(f"weight on edge {e[0]}->{e[1]} must be positive and finite, got {v}")
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_edges(cls, d: int, weighted_edges) -> "WeightedDag":
        """Build from ``[(j, i, c_ji), ...]``."""
        weighted_edges = list(weighted_edges)
        dag = Dag(d, [(j, i) for j, i, _ in weighted_edges])
        return cls(dag, {(j, i): c for j, i, c in weighted_edges})

    @property
    def d(self) -> int:
        return self.dag.d

    def adjacency(self) -> np.ndarray:
        """Weighted adjacency ``C`` with ``C[j-1, i-1] = c_ji`` on edges."""
        C = np.zeros((self.d, self.d))
        for (j, i), c in self.weights.items():
            C[j - 1, i - 1] = c
        return C


def ml_matrix_from_weights(wd: WeightedDag) -> np.ndarray:
    return closure(wd.adjacency())


def _as_square(b, name="b") -> np.ndarray:
    b = as_nonneg(b, name)
    if b.shape[0] != b.shape[1]:
        raise InvalidArgumentError(f"{name} must be square, got {b.shape}")
    return b


def validate_ml_matrix(b, dag: Dag, rtol: float = REBUILD_RTOL) -> bool:
    """True iff ``b`` is the ML coefficient matrix of some weighting of ``dag``.

    Checks that the support of ``b`` is the reachability relation and that
    ``b == I v (b (.) b0)`` where ``b0`` keeps only the parent entries.
    The fixpoint is compared with relative tolerance ``rtol``: the
    closure and the fixpoint associate the same path products
    differently, which can move the last bit.  ``rtol=0`` demands
    bitwise equality.
    """
    b = _as_square(b)
    if b.shape[0] != dag.d:
        raise InvalidArgumentError(f"matrix is {b.shape[0]}x{b.shape[0]} but dag has {dag.d} nodes")
    if not np.array_equal(b > 0, dag.reachability_matrix()):
        return False
    if not np.all(np.diag(b) == 1.0):
        return False
    b0 = np.where(dag.adjacency_mask(), b, 0.0)
    rhs = np.maximum(np.eye(dag.d), odot(b, b0))
    if rtol == 0.0:
        return bool(np.array_equal(rhs, b))
    return bool(np.allclose(rhs, b, rtol=rtol, atol=0.0))


def _best_two_step(b: np.ndarray) -> np.ndarray:
    """``best[j, i] = max_{k != j, i} b[j, k] * b[k, i]``."""
    d = b.shape[0]
    off = b * (1.0 - np.eye(d))
    return odot(off, off)


def _support_dag(b: np.ndarray) -> None:
    pos = b > 0
    np.fill_diagonal(pos, False)
    if np.any(pos & pos.T):
        raise InvalidArgumentError("support of b contains a 2-cycle; not an ML coefficient matrix")


def minimum_ml_dag(b, rtol: float = PATH_TIE_RTOL) -> Dag:
    """Smallest DAG representing ``b``.

    ``j -> i`` is kept iff the direct edge is the unique max-weighted path,
    i.e. ``b_ji`` strictly beats every two-factor product ``b_jk b_ki``.
    Products within ``rtol`` of ``b_ji`` count as ties and drop the edge.
    """
    b = _as_square(b)
    d = b.shape[0]
    if not np.all(np.diag(b) == 1.0):
        raise InvalidArgumentError("ML coefficient matrix must have unit diagonal")
    _support_dag(b)
    best = _best_two_step(b)
    edges = []
    for j in range(d):
        for i in range(d):
            if i == j or b[j, i] <= 0:
                continue
            if b[j, i] > best[j, i] and not _close(b[j, i], best[j, i], rtol):
                edges.append((j + 1, i + 1))
    try:
        dag = Dag(d, edges)
    except MalformedGraphError as exc:
        raise InvalidArgumentError(f"b is not an ML coefficient matrix: {exc}") from None
    if not validate_ml_matrix(b, dag, rtol=rtol):
        raise InvalidArgumentError("b is not the ML coefficient matrix of any recursive ML model")
    return dag


def minimum_weighted_dag(b, rtol: float = PATH_TIE_RTOL) -> WeightedDag:
    """Minimum ML DAG carrying the weights ``c_ji = b_ji``."""
    b = _as_square(b)
    dag = minimum_ml_dag(b, rtol)
    return WeightedDag(dag, {(j, i): b[j - 1, i - 1] for j, i in dag.edges})


def class_membership(candidate: WeightedDag, b, rtol: float = PATH_TIE_RTOL) -> bool:
    """Whether ``candidate`` is a valid representation of the model with matrix ``b``."""
    b = _as_square(b)
    if b.shape[0] != candidate.d:
        raise InvalidArgumentError(f"matrix is {b.shape[0]}x{b.shape[0]} but candidate has {candidate.d} nodes")
    dag_b = minimum_ml_dag(b, rtol)
    star = candidate.dag
    if not dag_b.edges <= star.edges:
        return False
    if not np.array_equal(star.reachability_matrix(), dag_b.reachability_matrix()):
        return False
    for (j, i), c in candidate.weights.items():
        target = b[j - 1, i - 1]
        if (j, i) in dag_b.edges:
            if c != target:
                return False
        elif not (0 < c and (c <= target or _close(c, target, rtol))):
            return False
    return True


class SupportKind(enum.Enum):
    LOWER_BOUNDED = "lower_bounded"
    UPPER_BOUNDED = "upper_bounded"
    FULL_LINE = "full_line"


@dataclass(frozen=True)
class RatioProfile:
    """Support and atoms of ``Y_ji = X_i / X_j``.

    ``bound`` is the finite endpoint of the support (``b_ji`` for a lower
    bound, ``1 / b_ij`` for an upper bound) and ``None`` otherwise.
    """

    j: int
    i: int
    support: SupportKind
    bound: float | None
    atoms: tuple[float, ...]

    def to_json(self) -> dict:
        return {
            "j": self.j,
            "i": self.i,
            "support": self.support.value,
            "bound": self.bound,
            "atoms": list(self.atoms),
        }


def _dedup(values, rtol: float) -> tuple[float, ...]:
    out: list[float] = []
    for v in sorted(values):
        if not out or not _close(out[-1], v, rtol):
            out.append(v)
    return tuple(out)


def ratio_profile(b, j: int, i: int) -> RatioProfile:
    b = _as_square(b)
    d = b.shape[0]
    for v in (i, j):
        if int(v) != v or not 1 <= v <= d:
            raise InvalidArgumentError(f"node {v!r} outside 1..{d}")
    if i == j:
        raise InvalidArgumentError("ratio profile needs distinct nodes")
    jj, ii = j - 1, i - 1
    if b[jj, ii] > 0:
        kind, bound = SupportKind.LOWER_BOUNDED, float(b[jj, ii])
    elif b[ii, jj] > 0:
        kind, bound = SupportKind.UPPER_BOUNDED, float(1.0 / b[ii, jj])
    else:
        kind, bound = SupportKind.FULL_LINE, None
    common = np.flatnonzero((b[:, ii] > 0) & (b[:, jj] > 0))
    atoms = _dedup((float(b[l, ii] / b[l, jj]) for l in common), ATOM_DEDUP_RTOL)
    return RatioProfile(j=j, i=i, support=kind, bound=bound, atoms=atoms)


def _rebuilds(wd: WeightedDag, b: np.ndarray) -> bool:
    return bool(np.allclose(ml_matrix_from_weights(wd), b, rtol=REBUILD_RTOL, atol=0.0))


def class_equivalence_oracle(
    b,
    weight_fractions=(0.1, 0.25, 0.5, 1.0),
    max_candidates: int = 200_000,
) -> bool:
    """Executable identifiability check for small ``d``.

    Enumerates weighted DAGs around the minimum ML DAG: every subset of
    optional edges (pairs already connected by a path) with weights
    ``f * b_ji`` for ``f`` in ``weight_fractions``, plus perturbations
    that break one membership condition (over-heavy optional edge,
    altered or dropped minimal edge, edge creating new reachability).
    Returns True iff every accepted candidate rebuilds ``b`` and every
    rejected one does not.
    """
    b = _as_square(b)
    d = b.shape[0]
    if d > 5:
        raise InvalidArgumentError("class_equivalence_oracle is limited to d <= 5")
    base = minimum_weighted_dag(b)
    optional = [
        (j, i)
        for j in range(1, d + 1)
        for i in range(1, d + 1)
        if j != i and b[j - 1, i - 1] > 0 and (j, i) not in base.dag.edges
    ]
    checked = 0

    def agrees(cand: WeightedDag) -> bool:
        nonlocal checked
        checked += 1
        if checked > max_candidates:
            raise InvalidArgumentError(f"more than {max_candidates} candidates; lower the grid")
        return class_membership(cand, b) == _rebuilds(cand, b)

    for r in range(len(optional) + 1):
        for subset in itertools.combinations(optional, r):
            for fracs in itertools.product(weight_fractions, repeat=r):
                w = dict(base.weights)
                for (j, i), f in zip(subset, fracs):
                    w[(j, i)] = f * b[j - 1, i - 1]
                cand = WeightedDag(Dag(d, w), w)
                if not class_membership(cand, b) or not agrees(cand):
                    return False

    negatives: list[WeightedDag] = []
    for e in optional:
        w = dict(base.weights)
        w[e] = 1.5 * b[e[0] - 1, e[1] - 1]
        negatives.append(WeightedDag(Dag(d, w), w))
    for e in base.dag.edges:
        w = dict(base.weights)
        w[e] *= 0.5
        negatives.append(WeightedDag(Dag(d, w), w))
        w = dict(base.weights)
        del w[e]
        negatives.append(WeightedDag(Dag(d, w), w))
    for j in range(1, d + 1):
        for i in range(1, d + 1):
            if j == i or b[j - 1, i - 1] > 0 or b[i - 1, j - 1] > 0:
                continue
            w = dict(base.weights)
            w[(j, i)] = 0.5
            try:
                negatives.append(WeightedDag(Dag(d, w), w))
            except MalformedGraphError:
                continue
    for cand in negatives:
        if class_membership(cand, b) or not agrees(cand):
            return False
    return True
