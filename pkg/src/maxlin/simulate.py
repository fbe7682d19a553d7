"""Sampling from recursive max-linear models.

Innovations are drawn by inverse transform from a Philox stream keyed
by ``(seed, replicate, node)``, so every column of every replicate is
reproducible on its own, independent of evaluation order or threading.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from ._backend import kernels
from .errors import InvalidArgumentError, MalformedDataError
from .model import WeightedDag, ml_matrix_from_weights
from .tropical import as_nonneg

_TWO53 = float(2**53)


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise InvalidArgumentError(f"{name} must be positive and finite, got {value}")
    return value


class Innovation:
    """Atom-free distribution on the positive half-line.

    Subclasses provide ``cdf`` and ``ppf`` (vectorized); sampling is the
    quantile transform of uniforms strictly inside ``(0, 1)``.
    """

    family: str = ""
    #: support is a proper subset of (0, inf); estimator guarantees do not apply
    restricted_support: bool = False

    def cdf(self, x):
        raise NotImplementedError

    def ppf(self, u):
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = (rng.integers(0, 2**53, size=n).astype(float) + 0.5) / _TWO53
        return self.ppf(u)

    def to_json(self) -> dict:
        return {"family": self.family, "params": self.params()}

    def __eq__(self, other):
        return type(self) is type(other) and self.params() == other.params()

    def __hash__(self):
        return hash((self.family, tuple(sorted(self.params().items()))))

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"


class Frechet(Innovation):
    """``F(x) = exp(-(x / scale) ** -shape)``."""

    family = "frechet"

    def __init__(self, shape: float = 1.0, scale: float = 1.0):
        self.shape = _positive("shape", shape)
        self.scale = _positive("scale", scale)

    def params(self):
        return {"shape": self.shape, "scale": self.scale}

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            out = np.exp(-np.power(np.maximum(x, 0.0) / self.scale, -self.shape))
        return np.where(x > 0, out, 0.0)

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        return self.scale * np.power(-np.log(u), -1.0 / self.shape)


class LogNormal(Innovation):
    family = "lognormal"

    def __init__(self, mu: float = 0.0, sigma: float = 1.0):
        mu = float(mu)
        if not math.isfinite(mu):
            raise InvalidArgumentError(f"mu must be finite, got {mu}")
        self.mu = mu
        self.sigma = _positive("sigma", sigma)

    def params(self):
        return {"mu": self.mu, "sigma": self.sigma}

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            z = (np.log(np.maximum(x, 0.0)) - self.mu) / self.sigma
        return np.where(x > 0, ndtr(z), 0.0)

    def ppf(self, u):
        return np.exp(self.mu + self.sigma * ndtri(np.asarray(u, dtype=float)))


class Pareto(Innovation):
    """``F(x) = 1 - (scale / x) ** shape`` on ``[scale, inf)``."""

    family = "pareto"
    restricted_support = True

    def __init__(self, shape: float = 1.0, scale: float = 1.0):
        self.shape = _positive("shape", shape)
        self.scale = _positive("scale", scale)

    def params(self):
        return {"shape": self.shape, "scale": self.scale}

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            out = 1.0 - np.power(self.scale / np.maximum(x, self.scale), self.shape)
        return np.where(x >= self.scale, out, 0.0)

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        return self.scale * np.power(1.0 - u, -1.0 / self.shape)


class Uniform(Innovation):
    family = "uniform"
    restricted_support = True

    def __init__(self, low: float, high: float):
        low, high = float(low), float(high)
        if not (0 < low < high and math.isfinite(high)):
            raise InvalidArgumentError(f"uniform needs 0 < low < high, got ({low}, {high})")
        self.low, self.high = low, high

    def params(self):
        return {"low": self.low, "high": self.high}

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((x - self.low) / (self.high - self.low), 0.0, 1.0)

    def ppf(self, u):
        return self.low + (self.high - self.low) * np.asarray(u, dtype=float)


FAMILIES: dict[str, type[Innovation]] = {
    cls.family: cls for cls in (Frechet, LogNormal, Pareto, Uniform)
}


def innovation_from_json(obj: dict) -> Innovation:
    family = obj.get("family")
    if family not in FAMILIES:
        raise InvalidArgumentError(f"unknown innovation family {family!r}; expected one of {sorted(FAMILIES)}")
    params = obj.get("params", {})
    try:
        return FAMILIES[family](**params)
    except TypeError as exc:
        raise InvalidArgumentError(f"bad parameters for {family}: {exc}") from None


@dataclass(frozen=True)
class InnovationSpec:
    """One innovation distribution per node, in node order."""

    nodes: tuple[Innovation, ...]

    def __post_init__(self):
        nodes = tuple(self.nodes)
        if not nodes:
            raise InvalidArgumentError("innovation spec needs at least one node")
        for z in nodes:
            if not isinstance(z, Innovation):
                raise InvalidArgumentError(f"not an innovation distribution: {z!r}")
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def iid(cls, dist: Innovation, d: int) -> "InnovationSpec":
        return cls((dist,) * d)

    @property
    def d(self) -> int:
        return len(self.nodes)

    @property
    def full_support(self) -> bool:
        return not any(z.restricted_support for z in self.nodes)

    def cdf(self, node: int, x):
        return self.nodes[node - 1].cdf(x)

    def to_json(self) -> list[dict]:
        return [{"node": k + 1, **z.to_json()} for k, z in enumerate(self.nodes)]


def model_digest(wd: WeightedDag, spec: InnovationSpec | None = None) -> str:
    payload = {
        "d": wd.d,
        "edges": [[j, i, float(c).hex()] for (j, i), c in sorted(wd.weights.items())],
        "innovations": spec.to_json() if spec is not None else None,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class SampleSet:
    """``n x d`` table of strictly positive observations, one row per draw."""

    values: np.ndarray
    seed: int | None = None
    replicate: int = 0
    digest: str | None = field(default=None, compare=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise MalformedDataError(f"samples must be a non-empty n x d table, got shape {v.shape}")
        if not np.all(np.isfinite(v)) or not np.all(v > 0):
            bad = np.argwhere(~(np.isfinite(v) & (v > 0)))[0]
            raise MalformedDataError(
                f"samples must be finite and strictly positive; row {bad[0] + 1}, column x{bad[1] + 1} is {v[tuple(bad)]}"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def __eq__(self, other):
        if not isinstance(other, SampleSet):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    __hash__ = None


def as_samples(x) -> SampleSet:
    return x if isinstance(x, SampleSet) else SampleSet(x)


def node_rng(seed: int, replicate: int, node: int) -> np.random.Generator:
    """Counter-based generator for one ``(seed, replicate, node)`` cell."""
    if seed < 0 or replicate < 0:
        raise InvalidArgumentError("seed and replicate must be non-negative")
    ss = np.random.SeedSequence([int(seed), int(replicate), int(node)])
    return np.random.Generator(np.random.Philox(ss))


def sample_innovations(spec: InnovationSpec, n: int, seed: int, replicate: int = 0) -> SampleSet:
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"n must be a positive integer, got {n!r}")
    Z = np.empty((int(n), spec.d))
    for k, dist in enumerate(spec.nodes):
        Z[:, k] = dist.sample(node_rng(seed, replicate, k + 1), int(n))
    return SampleSet(Z, seed=seed, replicate=replicate)


def push_forward(z, b) -> SampleSet:
    """``X = Z (.) B`` row by row: ``X_i = max_j b_ji Z_j``."""
    z = as_samples(z)
    b = as_nonneg(b, "b")
    if b.shape != (z.d, z.d):
        raise InvalidArgumentError(f"b must be {z.d}x{z.d}, got {b.shape}")
    X = kernels.odot(np.ascontiguousarray(z.values), np.ascontiguousarray(b))
    return SampleSet(X, seed=z.seed, replicate=z.replicate, digest=z.digest)


def push_forward_recursive(z, wd: WeightedDag) -> SampleSet:
    """Evaluate ``X_i = max(max_k c_ki X_k, Z_i)`` in topological order."""
    z = as_samples(z)
    if wd.d != z.d:
        raise InvalidArgumentError(f"model has {wd.d} nodes, innovations have {z.d} columns")
    X = np.array(z.values)
    for i in wd.dag.topological_order():
        for k in wd.dag.parents(i):
            np.maximum(X[:, i - 1], wd.weights[(k, i)] * X[:, k - 1], out=X[:, i - 1])
    return SampleSet(X, seed=z.seed, replicate=z.replicate, digest=z.digest)


def simulate_model(
    wd: WeightedDag,
    spec: InnovationSpec,
    n: int,
    seed: int,
    replicate: int = 0,
    method: str = "odot",
) -> SampleSet:
    """Draw ``n`` observations of ``X``.

    ``method="odot"`` maps innovations through the ML coefficient matrix;
    ``method="recursive"`` evaluates the structural equations directly.
    """
    if spec.d != wd.d:
        raise InvalidArgumentError(f"spec has {spec.d} nodes, model has {wd.d}")
    z = sample_innovations(spec, n, seed, replicate)
    if method == "odot":
        x = push_forward(z, ml_matrix_from_weights(wd))
    elif method == "recursive":
        x = push_forward_recursive(z, wd)
    else:
        raise InvalidArgumentError(f"unknown method {method!r}")
    return SampleSet(x.values, seed=seed, replicate=replicate, digest=model_digest(wd, spec))


def default_spec(d: int) -> InnovationSpec:
    return InnovationSpec.iid(Frechet(1.0, 1.0), d)

