import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_weighted_dag, weighted_dags
from maxlin.errors import InvalidArgumentError, MalformedDataError
from maxlin.graph import Dag
from maxlin.model import WeightedDag, ml_matrix_from_weights
from maxlin.simulate import (
    FAMILIES,
    Frechet,
    InnovationSpec,
    LogNormal,
    Pareto,
    SampleSet,
    Uniform,
    default_spec,
    innovation_from_json,
    model_digest,
    push_forward,
    push_forward_recursive,
    sample_innovations,
    simulate_model,
)


def test_frechet_ecdf_at_one():
    n = 100_000
    z = sample_innovations(InnovationSpec.iid(Frechet(1, 1), 1), n, seed=11).values[:, 0]
    p = math.exp(-1)
    assert abs(np.mean(z <= 1.0) - p) <= 3 * math.sqrt(p * (1 - p) / n)


@pytest.mark.parametrize("dist", [Frechet(2.0, 0.5), LogNormal(0.3, 0.7), Pareto(1.5, 2.0), Uniform(0.5, 3.0)])
def test_quantile_sampler_matches_cdf(dist):
    n = 50_000
    z = sample_innovations(InnovationSpec.iid(dist, 1), n, seed=3).values[:, 0]
    for q in (0.1, 0.5, 0.9):
        x = float(dist.ppf(q))
        assert abs(np.mean(z <= x) - q) <= 4 * math.sqrt(q * (1 - q) / n)
        assert float(dist.cdf(x)) == pytest.approx(q, rel=1e-10)


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_all_positive_million(family):
    dist = {"frechet": Frechet(0.5, 1.0), "lognormal": LogNormal(0, 3), "pareto": Pareto(3, 1), "uniform": Uniform(1e-3, 1)}[family]
    z = sample_innovations(InnovationSpec.iid(dist, 1), 1_000_000, seed=1).values
    assert np.all(z > 0) and np.all(np.isfinite(z))


def test_determinism_and_independence_of_keys():
    spec = default_spec(3)
    a = sample_innovations(spec, 100, seed=7)
    b = sample_innovations(spec, 100, seed=7)
    assert a == b
    assert a.values.tobytes() == b.values.tobytes()
    c = sample_innovations(spec, 100, seed=7, replicate=1)
    assert not np.array_equal(a.values, c.values)
    # a column does not depend on the other nodes
    d = sample_innovations(default_spec(5), 100, seed=7)
    np.testing.assert_array_equal(a.values, d.values[:, :3])


@pytest.mark.parametrize(
    "ctor,args",
    [(Frechet, (0, 1)), (Frechet, (1, -1)), (LogNormal, (0, 0)), (LogNormal, (np.nan, 1)), (Pareto, (-1, 1)), (Uniform, (0, 1)), (Uniform, (2, 1))],
)
def test_invalid_parameters(ctor, args):
    with pytest.raises(InvalidArgumentError):
        ctor(*args)


def test_innovation_json_round_trip():
    for dist in (Frechet(2, 3), LogNormal(-1, 0.5), Pareto(1, 2), Uniform(1, 2)):
        assert innovation_from_json(dist.to_json()) == dist
    with pytest.raises(InvalidArgumentError):
        innovation_from_json({"family": "exponential", "params": {}})
    with pytest.raises(InvalidArgumentError):
        innovation_from_json({"family": "frechet", "params": {"alpha": 1}})


def test_restricted_support_flag():
    assert default_spec(2).full_support
    assert not InnovationSpec((Frechet(), Uniform(1, 2))).full_support
    assert not InnovationSpec((Pareto(),)).full_support


def test_push_forward_examples():
    z = SampleSet(np.array([[2.0, 0.5]]))
    b = np.array([[1, 0.5], [0, 1]])
    np.testing.assert_array_equal(push_forward(z, b).values, [[2.0, 1.0]])
    z = sample_innovations(default_spec(4), 50, seed=1)
    np.testing.assert_array_equal(push_forward(z, np.eye(4)).values, z.values)
    with pytest.raises(InvalidArgumentError):
        push_forward(z, np.eye(3))


def test_edgeless_model_is_innovations():
    wd = WeightedDag(Dag(3), {})
    spec = default_spec(3)
    np.testing.assert_array_equal(simulate_model(wd, spec, 20, 4).values, sample_innovations(spec, 20, 4).values)


def test_diamond_single_innovation_realizes_all():
    wd = WeightedDag.from_edges(4, [(1, 2, 0.5), (1, 3, 0.25), (2, 4, 0.4), (3, 4, 0.8)])
    b = ml_matrix_from_weights(wd)
    z = SampleSet(np.array([[1e6, 1.0, 1.0, 1.0]]))
    x = push_forward(z, b).values[0]
    np.testing.assert_allclose(x[1:], b[0, 1:] * 1e6, rtol=1e-15)
    np.testing.assert_allclose(push_forward_recursive(z, wd).values[0], x, rtol=1e-12)


@settings(max_examples=25)
@given(weighted_dags(max_d=8), st.integers(0, 2**31))
def test_recursive_and_odot_agree(wd, seed):
    spec = default_spec(wd.d)
    a = simulate_model(wd, spec, 1000, seed, method="odot").values
    b = simulate_model(wd, spec, 1000, seed, method="recursive").values
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=0)


def test_atoms_on_edges_and_support_bound():
    rng = np.random.default_rng(2)
    for _ in range(5):
        wd = random_weighted_dag(rng, 5, 0.6)
        b = ml_matrix_from_weights(wd)
        x = simulate_model(wd, default_spec(5), 10_000, seed=int(rng.integers(1 << 30))).values
        for k, i in wd.dag.edges:
            r = x[:, i - 1] / x[:, k - 1]
            assert r.min() >= b[k - 1, i - 1] * (1 - 1e-12)
            if b[k - 1, i - 1] == wd.weights[(k, i)]:
                assert np.any(np.isclose(r, b[k - 1, i - 1], rtol=1e-12, atol=0))


def test_simulation_reproducible_and_digest():
    wd = WeightedDag.from_edges(2, [(1, 2, 0.5)])
    spec = default_spec(2)
    a = simulate_model(wd, spec, 200, seed=9)
    b = simulate_model(wd, spec, 200, seed=9)
    assert a.values.tobytes() == b.values.tobytes()
    assert a.digest == model_digest(wd, spec)
    assert model_digest(wd, spec) != model_digest(WeightedDag.from_edges(2, [(1, 2, 0.5000001)]), spec)


def test_sample_set_validation():
    with pytest.raises(MalformedDataError):
        SampleSet(np.array([[1.0, 0.0]]))
    with pytest.raises(MalformedDataError):
        SampleSet(np.array([[1.0, np.inf]]))
    with pytest.raises(MalformedDataError):
        SampleSet(np.zeros((0, 2)))
    s = SampleSet(np.ones((2, 2)))
    with pytest.raises(ValueError):
        s.values[0, 0] = 5.0


def test_bad_n_and_method():
    wd = WeightedDag.from_edges(2, [(1, 2, 0.5)])
    with pytest.raises(InvalidArgumentError):
        simulate_model(wd, default_spec(2), 0, 1)
    with pytest.raises(InvalidArgumentError):
        simulate_model(wd, default_spec(2), 5, 1, method="magic")
    with pytest.raises(InvalidArgumentError):
        simulate_model(wd, default_spec(3), 5, 1)
