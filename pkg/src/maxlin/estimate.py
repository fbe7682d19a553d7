"""Estimators built on minimal observed ratios.

* ``breve_edges`` / ``bhat``: the DAG is known; edge-wise minimum ratios
  repaired into a proper ML coefficient matrix by tropical closure.
* ``learn_structure``: the DAG is unknown; a pair is declared ancestral
  when its minimum ratio is attained at least twice.
* ``recover_innovation_cdfs``: innovation CDFs from ``B`` and the
  marginal CDFs of ``X``.
* ``required_sample_size`` / ``atom_probability``: sample-size planning
  for exact recovery of an edge coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._backend import kernels
from .errors import (
    InsufficientDataError,
    InvalidArgumentError,
    InvariantViolation,
    MalformedDataError,
    MalformedGraphError,
)
from .graph import Dag, Edge
from .model import WeightedDag, ml_matrix_from_weights, validate_ml_matrix
from .simulate import InnovationSpec, SampleSet, as_samples, simulate_model
from .tropical import as_nonneg, closure

#: relative band for "the minimum is attained" on floating-point ratios
TIE_RTOL = 1e-9
#: relative tolerance for "estimate equals the true coefficient"
EXACT_RTOL = 1e-12
#: denominators below this leave a recovered CDF value undefined
CDF_FLOOR = 1e-12


def _check_dims(samples: SampleSet, dag: Dag) -> None:
    if samples.d != dag.d:
        raise InvalidArgumentError(f"samples have {samples.d} columns but dag has {dag.d} nodes")


def breve_edges(samples, dag: Dag) -> dict[Edge, float]:
    """Minimum observed ratio ``min_t x_i / x_k`` for every edge ``k -> i``."""
    samples = as_samples(samples)
    _check_dims(samples, dag)
    X = samples.values
    return {(k, i): float(np.min(X[:, i - 1] / X[:, k - 1])) for k, i in sorted(dag.edges)}


def breve_matrix(samples, dag: Dag) -> np.ndarray:
    """Minimum observed ratios on every ancestral pair, unit diagonal, zeros elsewhere.

    Unlike ``bhat`` this need not be an ML coefficient matrix.
    """
    samples = as_samples(samples)
    _check_dims(samples, dag)
    X = samples.values
    out = np.eye(dag.d)
    for i in dag.nodes:
        for j in dag.ancestors(i):
            out[j - 1, i - 1] = np.min(X[:, i - 1] / X[:, j - 1])
    return out


@dataclass(frozen=True)
class EstimateReport:
    b_hat: np.ndarray
    b_breve_edges: dict[Edge, float]
    b_breve: np.ndarray
    n: int
    atom_hits: dict[Edge, int]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "d": int(self.b_hat.shape[0]),
            "b_hat": self.b_hat.tolist(),
            "b_breve": self.b_breve.tolist(),
            "b_breve_edges": [{"from": k, "to": i, "value": v} for (k, i), v in sorted(self.b_breve_edges.items())],
            "atom_hits": [{"from": k, "to": i, "count": c} for (k, i), c in sorted(self.atom_hits.items())],
        }


def bhat(samples, dag: Dag, tie_rtol: float = TIE_RTOL) -> EstimateReport:
    """Closure of the edge-wise minimum ratios: ``(I v B0)^(d-1)``."""
    samples = as_samples(samples)
    edges = breve_edges(samples, dag)
    B0 = np.zeros((dag.d, dag.d))
    X = samples.values
    hits: dict[Edge, int] = {}
    for (k, i), v in edges.items():
        B0[k - 1, i - 1] = v
        r = X[:, i - 1] / X[:, k - 1]
        hits[(k, i)] = int(np.count_nonzero(r <= v * (1.0 + tie_rtol)))
    b_hat = closure(B0)
    if not validate_ml_matrix(b_hat, dag):
        raise InvariantViolation("closure of edge estimates failed the fixpoint check")
    return EstimateReport(
        b_hat=b_hat,
        b_breve_edges=edges,
        b_breve=breve_matrix(samples, dag),
        n=samples.n,
        atom_hits=hits,
    )


@dataclass(frozen=True)
class LearnedMatrix:
    """Structure-learning output.

    ``b_check`` has unit diagonal and is positive exactly on the detected
    ancestor pairs; it need not satisfy the ML fixpoint.  ``projected``
    is its tropical closure when requested.
    """

    b_check: np.ndarray
    ancestor_pairs: frozenset[Edge]
    min_ratios: np.ndarray
    hit_counts: np.ndarray
    projected: np.ndarray | None = None

    def to_json(self) -> dict:
        out = {
            "d": int(self.b_check.shape[0]),
            "b_check": self.b_check.tolist(),
            "ancestor_pairs": [list(p) for p in sorted(self.ancestor_pairs)],
        }
        if self.projected is not None:
            out["projected"] = self.projected.tolist()
        return out


def learn_structure(
    samples,
    tie_rtol: float = TIE_RTOL,
    min_hits: int = 2,
    project: bool = False,
) -> LearnedMatrix:
    """Estimate ``B`` without knowing the DAG.

    For each ordered pair ``j != i`` let ``m`` be the smallest observed
    ratio ``x_i / x_j``.  If at least ``min_hits`` observations fall in
    ``[m, m * (1 + tie_rtol)]`` the pair is declared ancestral with
    coefficient ``m``; otherwise the coefficient is zero.
    """
    samples = as_samples(samples)
    if samples.n < 2:
        raise InsufficientDataError(f"structure learning needs at least 2 observations, got {samples.n}")
    if min_hits < 1:
        raise InvalidArgumentError("min_hits must be at least 1")
    if tie_rtol < 0:
        raise InvalidArgumentError("tie_rtol must be non-negative")
    mins, counts = kernels.min_ratio_ties(np.ascontiguousarray(samples.values), float(tie_rtol))
    d = samples.d
    detected = counts >= min_hits
    np.fill_diagonal(detected, False)
    b_check = np.where(detected, mins, 0.0)
    np.fill_diagonal(b_check, 1.0)
    pairs = frozenset((int(j) + 1, int(i) + 1) for j, i in zip(*np.nonzero(detected)))
    projected = None
    if project:
        projected = project_learned(b_check, pairs)
    return LearnedMatrix(b_check, pairs, mins, counts, projected)


def project_learned(b_check: np.ndarray, pairs) -> np.ndarray:
    """Tropical closure of the detected entries; an ML matrix on their transitive closure."""
    d = b_check.shape[0]
    try:
        Dag(d, pairs)
    except MalformedGraphError as exc:
        raise MalformedDataError(f"detected ancestor pairs are cyclic, cannot project: {exc}") from None
    A = np.array(b_check)
    np.fill_diagonal(A, 0.0)
    return closure(A)


def reachability_dag(b) -> Dag:
    """DAG whose edges are all positive off-diagonal entries of ``b``."""
    b = as_nonneg(b, "b")
    pos = b > 0
    np.fill_diagonal(pos, False)
    return Dag(b.shape[0], [(int(j) + 1, int(i) + 1) for j, i in zip(*np.nonzero(pos))])


# --- innovation distribution recovery -------------------------------------------------

CdfFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class InnovationCdfTable:
    """Recovered ``F_Z`` values on a grid; ``values[g, i-1]`` is node ``i`` at ``xs[g]``.

    Entries whose quotient had a denominator at or below the floor are
    flagged in ``censored`` and hold NaN.
    """

    xs: np.ndarray
    values: np.ndarray
    censored: np.ndarray


def empirical_marginals(samples) -> list[CdfFn]:
    """Right-continuous empirical CDF of every column."""
    samples = as_samples(samples)
    fns = []
    for col in samples.values.T:
        s = np.sort(col)
        n = s.size

        def ecdf(x, s=s, n=n):
            return np.searchsorted(s, np.asarray(x, dtype=float), side="right") / n

        fns.append(ecdf)
    return fns


def model_marginals(b, spec: InnovationSpec) -> list[CdfFn]:
    """Exact marginals ``F_Xi(x) = prod_{j in An(i)} F_Zj(x / b_ji)``."""
    b = as_nonneg(b, "b")
    d = b.shape[0]
    fns = []
    for i in range(d):
        anc = np.flatnonzero(b[:, i] > 0)

        def f(x, i=i, anc=anc):
            x = np.asarray(x, dtype=float)
            out = np.ones_like(x)
            for j in anc:
                out = out * spec.nodes[j].cdf(x / b[j, i])
            return out

        fns.append(f)
    return fns


def recover_innovation_cdfs(
    b,
    marginal_cdfs: Sequence[CdfFn],
    xs,
    floor: float = CDF_FLOOR,
) -> InnovationCdfTable:
    """Divide out the ancestors' contributions from each marginal.

    Nodes are processed in order of their number of ancestors, so the
    innovation CDFs needed in the denominator are always available.
    """
    b = as_nonneg(b, "b")
    d = b.shape[0]
    if b.shape != (d, d) or len(marginal_cdfs) != d:
        raise InvalidArgumentError("need a square b and one marginal CDF per node")
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1 or not np.all(xs > 0):
        raise InvalidArgumentError("grid must be a 1-D array of positive reals")
    ancestors = [[j for j in range(d) if j != i and b[j, i] > 0] for i in range(d)]
    fz: list[Callable | None] = [None] * d

    def make(i):
        anc = ancestors[i]
        FX = marginal_cdfs[i]

        def F(x):
            x = np.asarray(x, dtype=float)
            num = np.asarray(FX(x), dtype=float)
            den = np.ones_like(x)
            cens = np.zeros(x.shape, dtype=bool)
            for j in anc:
                v, c = fz[j](x / b[j, i])
                den = den * v
                cens |= c
            cens |= ~(den > floor)
            with np.errstate(divide="ignore", invalid="ignore"):
                val = np.where(cens, np.nan, num / np.where(cens, 1.0, den))
            return val, cens

        return F

    for nu in range(d):
        for i in range(d):
            if len(ancestors[i]) == nu:
                if any(fz[j] is None for j in ancestors[i]):
                    raise InvalidArgumentError("b is not an ML coefficient matrix: ancestor sets are not nested")
                fz[i] = make(i)

    values = np.empty((xs.size, d))
    censored = np.empty((xs.size, d), dtype=bool)
    for i in range(d):
        values[:, i], censored[:, i] = fz[i](xs)
    return InnovationCdfTable(xs, values, censored)


# --- sample size planning ------------------------------------------------------------


def required_sample_size(p: float, prob_strict: float) -> int:
    """Smallest ``n`` with ``P(min ratio hits the coefficient) >= 1 - p``.

    ``prob_strict`` is ``P(X_i > b_ki X_k)``, the chance one observation
    misses the atom; the answer is ``ceil(ln p / ln prob_strict)``.
    """
    for name, v in (("p", p), ("prob_strict", prob_strict)):
        if not (0.0 < v < 1.0):
            raise InvalidArgumentError(f"{name} must lie strictly between 0 and 1, got {v}")
    ratio = math.log(p) / math.log(prob_strict)
    # absorb round-off in the quotient (e.g. ln .5 / ln .5)
    return max(1, math.ceil(round(ratio, 9)))


@dataclass(frozen=True)
class AtomProbability:
    probability: float
    stderr: float
    n_mc: int

    @property
    def prob_strict(self) -> float:
        return 1.0 - self.probability


def atom_probability(
    wd: WeightedDag,
    spec: InnovationSpec,
    edge: Edge,
    n_mc: int,
    seed: int,
    tie_rtol: float = TIE_RTOL,
) -> AtomProbability:
    """Monte-Carlo estimate of ``P(X_i = b_ki X_k)`` for the edge ``k -> i``."""
    k, i = edge
    if (k, i) not in wd.dag.edges:
        raise InvalidArgumentError(f"{k}->{i} is not an edge of the model")
    b = ml_matrix_from_weights(wd)
    X = simulate_model(wd, spec, n_mc, seed).values
    target = b[k - 1, i - 1] * X[:, k - 1]
    hit = np.abs(X[:, i - 1] - target) <= tie_rtol * np.maximum(X[:, i - 1], target)
    p = float(np.mean(hit))
    return AtomProbability(p, math.sqrt(p * (1.0 - p) / n_mc), int(n_mc))


def exact_match(estimate, truth, rtol: float = EXACT_RTOL) -> bool:
    """Entrywise equality up to ``rtol``, with identical zero patterns."""
    estimate = np.asarray(estimate, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if estimate.shape != truth.shape:
        return False
    if not np.array_equal(estimate > 0, truth > 0):
        return False
    return bool(np.allclose(estimate, truth, rtol=rtol, atol=0.0))
