"""Replicated Monte-Carlo experiments for exact-recovery rates.

Replicate ``r`` at grid position ``g`` uses replicate key ``g * R + r``,
so every (n, replicate) cell has its own innovation stream and results do
not depend on how the work is spread over threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from .errors import InvalidArgumentError
from .estimate import bhat, exact_match, learn_structure
from .model import WeightedDag, ml_matrix_from_weights
from .simulate import InnovationSpec, simulate_model

T = TypeVar("T")

CONSISTENCY_HEADER = ["n", "target", "replicates", "exact", "frequency", "se", "failure", "log_failure"]


def max_threads() -> int:
    raw = os.environ.get("MAXLIN_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise InvalidArgumentError(f"MAXLIN_THREADS must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def parallel_map(fn: Callable[[int], T], keys: Iterable[int]) -> list[T]:
    """Ordered map over ``keys`` on at most ``MAXLIN_THREADS`` threads."""
    keys = list(keys)
    workers = min(max_threads(), len(keys))
    if workers <= 1:
        return [fn(k) for k in keys]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, keys))


@dataclass(frozen=True)
class RecoveryRow:
    n: int
    target: str
    replicates: int
    exact: int

    @property
    def frequency(self) -> float:
        return self.exact / self.replicates

    @property
    def se(self) -> float:
        f = self.frequency
        return math.sqrt(f * (1.0 - f) / self.replicates)

    @property
    def failure(self) -> float:
        return 1.0 - self.frequency

    @property
    def log_failure(self) -> float | None:
        return math.log(self.failure) if self.failure > 0 else None

    def as_list(self) -> list:
        return [self.n, self.target, self.replicates, self.exact, self.frequency, self.se, self.failure, self.log_failure]


def _check_model(wd: WeightedDag, spec: InnovationSpec) -> None:
    if spec.d != wd.d:
        raise InvalidArgumentError(f"spec has {spec.d} nodes, model has {wd.d}")
    if not spec.full_support:
        raise InvalidArgumentError("consistency experiments need innovations supported on all of (0, inf)")


def _grid(n_grid: Sequence[int]) -> list[int]:
    out = [int(n) for n in n_grid]
    if any(n < 1 for n in out):
        raise InvalidArgumentError("every n in the grid must be a positive integer")
    return out


def consistency(
    wd: WeightedDag,
    spec: InnovationSpec,
    n_grid: Sequence[int],
    replicates: int,
    seed: int,
) -> list[RecoveryRow]:
    """Exact-recovery counts of ``bhat`` per edge and for the full matrix."""
    _check_model(wd, spec)
    grid = _grid(n_grid)
    if replicates < 0:
        raise InvalidArgumentError("replicates must be non-negative")
    if replicates == 0:
        return []
    b = ml_matrix_from_weights(wd)
    edges = sorted(wd.dag.edges)
    rows: list[RecoveryRow] = []
    for g, n in enumerate(grid):

        def run(r: int, n=n, g=g):
            x = simulate_model(wd, spec, n, seed, replicate=g * replicates + r)
            est = bhat(x, wd.dag).b_hat
            per_edge = [exact_match(est[k - 1, i - 1], b[k - 1, i - 1]) for k, i in edges]
            return per_edge, exact_match(est, b)

        results = parallel_map(run, range(replicates))
        for idx, (k, i) in enumerate(edges):
            rows.append(RecoveryRow(n, f"{k}->{i}", replicates, sum(res[0][idx] for res in results)))
        rows.append(RecoveryRow(n, "B", replicates, sum(res[1] for res in results)))
    return rows


def structure_recovery(
    wd: WeightedDag,
    spec: InnovationSpec,
    n: int,
    replicates: int,
    seed: int,
    tie_rtol: float = 1e-9,
) -> np.ndarray:
    """Boolean vector: did ``learn_structure`` return ``B`` exactly, per replicate."""
    _check_model(wd, spec)
    b = ml_matrix_from_weights(wd)

    def run(r: int) -> bool:
        x = simulate_model(wd, spec, n, seed, replicate=r)
        return exact_match(learn_structure(x, tie_rtol=tie_rtol).b_check, b)

    return np.array(parallel_map(run, range(replicates)), dtype=bool)


def log_linear_r2(ns: Sequence[float], failures: Sequence[float]) -> float:
    """R^2 of the least-squares line through ``(n, log failure)``; zero failures are dropped."""
    pts = [(float(n), math.log(f)) for n, f in zip(ns, failures) if f > 0]
    if len(pts) < 3:
        raise InvalidArgumentError("need failures observed at three or more n to fit a line")
    x, y = np.array(pts).T
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0
    return 1.0 - float(np.sum(resid**2)) / ss_tot
