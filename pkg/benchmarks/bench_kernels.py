"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends are checked for identical output before timing.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from maxlin._backend import compiled_kernels, python_kernels
from maxlin.model import WeightedDag, ml_matrix_from_weights
from maxlin.simulate import default_spec, simulate_model


def _model(d: int, seed: int) -> WeightedDag:
    rng = np.random.default_rng(seed)
    edges = [(k, i, float(rng.uniform(0.2, 1.5))) for k in range(1, d + 1) for i in range(k + 1, d + 1) if rng.random() < 0.5]
    return WeightedDag.from_edges(d, edges)


def cases():
    rng = np.random.default_rng(0)
    F = rng.random((64, 64))
    G = rng.random((64, 64))
    yield "odot 64x64", lambda k: k.odot(F, G)

    wd = _model(8, 1)
    b = ml_matrix_from_weights(wd)
    bs = b * 1.1
    np.fill_diagonal(bs, 1.0)
    X = simulate_model(wd, default_spec(8), 20_000, seed=2).values
    mask = wd.dag.adjacency_mask()
    yield "min_ratio_ties n=20000 d=8", lambda k: k.min_ratio_ties(X, 1e-9)
    yield "node_labels n=20000 d=8", lambda k: k.node_labels(X, b, bs, mask, 1e-9)
    yield "classify_rows n=20000 d=8", lambda k: k.classify_rows(X, b, bs, mask, 1e-9)


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_same(u, v) for u, v in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b), equal_nan=True)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if compiled_kernels is None:
        print("compiled kernels not built; only the fallback is available")
    print(f"{'kernel':32s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, fn in cases():
        t_py = min(timeit.repeat(lambda: fn(python_kernels), number=1, repeat=args.repeat)) * 1e3
        if compiled_kernels is None:
            print(f"{name:32s} {t_py:10.2f} {'-':>10s} {'-':>8s}")
            continue
        if not _same(fn(python_kernels), fn(compiled_kernels)):
            raise SystemExit(f"{name}: backends disagree")
        t_cy = min(timeit.repeat(lambda: fn(compiled_kernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:32s} {t_py:10.2f} {t_cy:10.2f} {t_py / t_cy:8.1f}x")


if __name__ == "__main__":
    main()
