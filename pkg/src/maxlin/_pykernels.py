"""Pure numpy implementations of the hot kernels.

Every function here has a twin in ``_kernels.pyx`` with identical
floating-point semantics: each output entry is produced by the same
multiplications, divisions and comparisons, so both backends agree
bit for bit.
"""

import numpy as np

NAME = "python"

# region codes used by classify_rows
A0, AHALF, A1 = 0, 1, 2


def odot(F, G):
    m, n = F.shape
    p = G.shape[1]
    out = np.zeros((m, p))
    # loop over the inner index keeps memory at O(m*p)
    for k in range(n):
        np.maximum(out, F[:, k : k + 1] * G[k : k + 1, :], out=out)
    return out


def min_ratio_ties(X, rtol):
    n, d = X.shape
    mins = np.zeros((d, d))
    counts = np.zeros((d, d), dtype=np.int64)
    for j in range(d):
        for i in range(d):
            if i == j:
                continue
            r = X[:, i] / X[:, j]
            m = r.min()
            mins[j, i] = m
            counts[j, i] = np.count_nonzero(r <= m * (1.0 + rtol))
    return mins, counts


def _eq(a, b, rtol):
    return np.abs(a - b) <= rtol * np.maximum(np.abs(a), np.abs(b))


def node_labels(X, B, Bstar, parent_mask, rtol):
    """Per-node region code (n x d int8) for the pairwise density partition."""
    n, d = X.shape
    labels = np.empty((n, d), dtype=np.int8)
    for i in range(d):
        m = np.zeros(n)
        ms = np.zeros(n)
        for k in np.flatnonzero(parent_mask[:, i]):
            np.maximum(m, B[k, i] * X[:, k], out=m)
            np.maximum(ms, Bstar[k, i] * X[:, k], out=ms)
        xi = X[:, i]
        eq_m = _eq(xi, m, rtol)
        eq_ms = _eq(xi, ms, rtol)
        zero = (xi < m) & ~eq_m
        zero |= eq_ms & (ms > m) & ~_eq(ms, m, rtol)
        top = np.maximum(m, ms)
        half = (eq_m & eq_ms) | ((xi > top) & ~_eq(xi, top, rtol))
        lab = np.full(n, A1, dtype=np.int8)
        lab[half] = AHALF
        lab[zero] = A0
        labels[:, i] = lab
    return labels


def classify_rows(X, B, Bstar, parent_mask, rtol):
    labels = node_labels(X, B, Bstar, parent_mask, rtol)
    n, d = labels.shape
    region = np.full(n, A1, dtype=np.int8)
    region[(labels == AHALF).all(axis=1)] = AHALF
    is_zero = labels == A0
    any_zero = is_zero.any(axis=1)
    region[any_zero] = A0
    witness = np.where(any_zero, is_zero.argmax(axis=1), -1).astype(np.int64)
    return region, witness
