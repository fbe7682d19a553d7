"""Matrix algebra over the max-times semiring of non-negative reals.

Addition is ``max`` and multiplication is the ordinary product, so the
zero element is ``0`` and the unit is ``1``.  Matrices are plain
``numpy.ndarray`` objects of dtype float64.
"""

from __future__ import annotations

import numpy as np

from ._backend import kernels
from .errors import InvalidArgumentError

__all__ = [
    "as_nonneg",
    "odot",
    "elementwise_max",
    "odot_power",
    "closure",
    "closure_by_powers",
]


def as_nonneg(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a 2-D float64 array, checking the semiring domain."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidArgumentError(f"{name} must be a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} has non-finite entries")
    if np.any(arr < 0):
        raise InvalidArgumentError(f"{name} has negative entries")
    return arr


def _square(a, name: str) -> np.ndarray:
    arr = as_nonneg(a, name)
    if arr.shape[0] != arr.shape[1]:
        raise InvalidArgumentError(f"{name} must be square, got shape {arr.shape}")
    return arr


def odot(F, G) -> np.ndarray:
    """Max-times product: ``out[i, j] = max_k F[i, k] * G[k, j]``."""
    F = as_nonneg(F, "F")
    G = as_nonneg(G, "G")
    if F.shape[1] != G.shape[0]:
        raise InvalidArgumentError(f"inner dimensions differ: {F.shape} vs {G.shape}")
    return kernels.odot(np.ascontiguousarray(F), np.ascontiguousarray(G))


def elementwise_max(F, G) -> np.ndarray:
    F = as_nonneg(F, "F")
    G = as_nonneg(G, "G")
    if F.shape != G.shape:
        raise InvalidArgumentError(f"shapes differ: {F.shape} vs {G.shape}")
    return np.maximum(F, G)


def odot_power(A, k: int) -> np.ndarray:
    """``A`` multiplied with itself ``k`` times; ``k == 0`` gives the identity."""
    A = _square(A, "A")
    if k < 0:
        raise InvalidArgumentError("exponent must be non-negative")
    result = np.eye(A.shape[0])
    for _ in range(k):
        result = odot(result, A)
    return result


def closure(A) -> np.ndarray:
    """``(I v A)`` raised to the power ``d - 1`` by repeated squaring.

    For ``A`` supported on a DAG this is the max-weight-path matrix of
    the weighted graph, with unit diagonal.  Squaring may overshoot the
    exponent; for DAG-supported ``A`` that changes nothing since
    ``(I v A)^k`` is constant for ``k >= d - 1``.
    """
    A = _square(A, "A")
    d = A.shape[0]
    M = np.maximum(np.eye(d), A)
    power = 1
    while power < d - 1:
        M = odot(M, M)
        power *= 2
    if d == 1:
        M = np.eye(1)
    return M


def closure_by_powers(A) -> np.ndarray:
    """Reference route: ``max_{k=0..d-1} A^k`` by plain iteration."""
    A = _square(A, "A")
    d = A.shape[0]
    acc = np.eye(d)
    P = np.eye(d)
    for _ in range(d - 1):
        P = odot(P, A)
        acc = np.maximum(acc, P)
    return acc
