"""Pairwise densities ``dP_B / d(P_B + P_B*)`` and the Kiefer-Wolfowitz
comparison of two candidate ML coefficient matrices.

For a point ``x`` each node ``i`` compares ``x_i`` with the parent maxima
``m_i = max_k b_ki x_k`` and ``m*_i = max_k b*_ki x_k``:

* zero    if ``x_i < m_i`` or ``x_i = m*_i > m_i``
* half    if ``x_i = m_i = m*_i`` or ``x_i > max(m_i, m*_i)``
* one     otherwise

The point lies in ``A0`` if some node is zero, in ``A1/2`` if all nodes
are half, and in ``A1`` otherwise; the density is 0, 1/2 or 1.
Equalities are tested with relative tolerance ``EQ_RTOL``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from ._backend import kernels
from .errors import InvalidArgumentError
from .graph import Dag
from .model import validate_ml_matrix
from .simulate import as_samples
from .tropical import as_nonneg

EQ_RTOL = 1e-9


class Region(enum.IntEnum):
    A0 = 0
    AHALF = 1
    A1 = 2

    @property
    def density(self) -> float:
        return (0.0, 0.5, 1.0)[self]


@dataclass(frozen=True)
class PartitionLabel:
    """Region of a point; ``witness`` is the first zero node (1-based) for ``A0``."""

    region: Region
    witness: int | None = None

    @property
    def density(self) -> float:
        return self.region.density


class Verdict(enum.Enum):
    CAND_WINS = "cand_wins"
    Q_WINS = "q_wins"
    TIE = "tie"
    CAND_INFEASIBLE = "cand_infeasible"


def _matrices(b, b_star, dag: Dag):
    b = as_nonneg(b, "b")
    b_star = as_nonneg(b_star, "b_star")
    if b.shape != (dag.d, dag.d) or b_star.shape != (dag.d, dag.d):
        raise InvalidArgumentError(f"matrices must be {dag.d}x{dag.d}")
    return np.ascontiguousarray(b), np.ascontiguousarray(b_star)


def _points(x, d: int) -> np.ndarray:
    X = np.atleast_2d(np.asarray(x, dtype=float))
    if X.shape[1] != d:
        raise InvalidArgumentError(f"points must have {d} coordinates, got {X.shape[1]}")
    if not np.all(np.isfinite(X)) or not np.all(X > 0):
        raise InvalidArgumentError("points must be finite and strictly positive")
    return np.ascontiguousarray(X)


def classify_many(X, b, b_star, dag: Dag, rtol: float = EQ_RTOL) -> tuple[np.ndarray, np.ndarray]:
    """Region codes and 0-based witnesses (-1 if none) for every row of ``X``."""
    b, b_star = _matrices(b, b_star, dag)
    X = _points(X, dag.d)
    return kernels.classify_rows(X, b, b_star, dag.adjacency_mask(), float(rtol))


def node_labels(X, b, b_star, dag: Dag, rtol: float = EQ_RTOL) -> np.ndarray:
    """Per-node region codes, shape ``n x d``."""
    b, b_star = _matrices(b, b_star, dag)
    X = _points(X, dag.d)
    return kernels.node_labels(X, b, b_star, dag.adjacency_mask(), float(rtol))


def classify(x, b, b_star, dag: Dag, rtol: float = EQ_RTOL) -> PartitionLabel:
    region, witness = classify_many(x, b, b_star, dag, rtol)
    if region.shape[0] != 1:
        raise InvalidArgumentError("classify takes a single point; use classify_many")
    r = Region(int(region[0]))
    return PartitionLabel(r, int(witness[0]) + 1 if r is Region.A0 else None)


def rho(x, b, b_star, dag: Dag, rtol: float = EQ_RTOL) -> float:
    return classify(x, b, b_star, dag, rtol).density


def rho_many(X, b, b_star, dag: Dag, rtol: float = EQ_RTOL) -> np.ndarray:
    region, _ = classify_many(X, b, b_star, dag, rtol)
    return np.array([0.0, 0.5, 1.0])[region]


def star_model(i: int, b, b_star, dag: Dag):
    """Star DAG on ``Pa(i)`` (node ``i`` last) with its two ML matrices.

    Returns ``(star_dag, b_i, b_star_i, nodes)`` where ``nodes`` lists the
    original labels in the star's order.
    """
    pa = sorted(dag.parents(i))
    nodes = pa + [i]
    m = len(nodes)
    star = Dag(m, [(r + 1, m) for r in range(m - 1)])
    bi = np.eye(m)
    bsi = np.eye(m)
    for r, k in enumerate(pa):
        bi[r, m - 1] = b[k - 1, i - 1]
        bsi[r, m - 1] = b_star[k - 1, i - 1]
    return star, bi, bsi, nodes


def rho_local(i: int, x, b, b_star, dag: Dag, rtol: float = EQ_RTOL) -> float:
    """Density of the star model on ``Pa(i)`` with weights ``b_ki`` and ``b*_ki``.

    ``x`` is a full ``d``-vector; only the coordinates in ``Pa(i)`` are read.
    """
    b, b_star = _matrices(b, b_star, dag)
    x = _points(x, dag.d)[0]
    star, bi, bsi, nodes = star_model(i, b, b_star, dag)
    return rho(x[[k - 1 for k in nodes]], bi, bsi, star, rtol)


def rho_local_many(i: int, X, b, b_star, dag: Dag, rtol: float = EQ_RTOL) -> np.ndarray:
    """``rho_local`` for every row of ``X``."""
    b, b_star = _matrices(b, b_star, dag)
    X = _points(X, dag.d)
    star, bi, bsi, nodes = star_model(i, b, b_star, dag)
    return rho_many(X[:, [k - 1 for k in nodes]], bi, bsi, star, rtol)


def conditional_cdf(
    i: int,
    x_pa: Mapping[int, float],
    x_i: float,
    b,
    f_zi: Callable[[float], float],
) -> float:
    """Regular conditional CDF of ``X_i`` given its parents.

    ``x_pa`` maps each parent label to its value; the result is
    ``F_Zi(x_i)`` if ``x_i`` reaches the parent maximum and 0 below it.
    """
    b = as_nonneg(b, "b")
    if not 1 <= i <= b.shape[0]:
        raise InvalidArgumentError(f"node {i} outside 1..{b.shape[0]}")
    if not x_i > 0 or any(not v > 0 for v in x_pa.values()):
        raise InvalidArgumentError("conditioning values must be positive")
    threshold = max((b[k - 1, i - 1] * v for k, v in x_pa.items()), default=0.0)
    return float(f_zi(x_i)) if x_i >= threshold else 0.0


def gmle_compare(samples, b_cand, q, dag: Dag, rtol: float = EQ_RTOL) -> Verdict:
    """Compare ``prod_t rho(x_t, q, cand)`` with ``prod_t rho(x_t, cand, q)``.

    Both products share the factor ``2 ** -#A1/2`` and are otherwise
    zero or one, so only ``A0`` membership matters and no product is
    ever formed.
    """
    X = as_samples(samples).values
    b_cand, q = _matrices(b_cand, q, dag)
    if not validate_ml_matrix(b_cand, dag) or not validate_ml_matrix(q, dag):
        raise InvalidArgumentError("both matrices must be ML coefficient matrices for the dag")
    region_cc, _ = classify_many(X, b_cand, b_cand, dag, rtol)
    if np.any(region_cc == Region.A0):
        return Verdict.CAND_INFEASIBLE
    q_zero = bool(np.any(classify_many(X, q, b_cand, dag, rtol)[0] == Region.A0))
    cand_zero = bool(np.any(classify_many(X, b_cand, q, dag, rtol)[0] == Region.A0))
    if q_zero and not cand_zero:
        return Verdict.CAND_WINS
    if cand_zero and not q_zero:
        return Verdict.Q_WINS
    return Verdict.TIE


def feasible(samples, b, dag: Dag, rtol: float = EQ_RTOL) -> bool:
    """True iff no observation lies in ``A0(b, b)``."""
    X = as_samples(samples).values
    region, _ = classify_many(X, b, b, dag, rtol)
    return not bool(np.any(region == Region.A0))
