import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_weighted_dag, weighted_dags
from maxlin.errors import InsufficientDataError, InvalidArgumentError, MalformedDataError
from maxlin.estimate import (
    atom_probability,
    bhat,
    breve_edges,
    breve_matrix,
    empirical_marginals,
    exact_match,
    learn_structure,
    model_marginals,
    project_learned,
    recover_innovation_cdfs,
    required_sample_size,
)
from maxlin.experiment import structure_recovery
from maxlin.graph import Dag
from maxlin.model import WeightedDag, ml_matrix_from_weights, validate_ml_matrix
from maxlin.simulate import Frechet, InnovationSpec, SampleSet, default_spec, simulate_model

EDGE = Dag(2, [(1, 2)])
CHAIN = Dag(3, [(1, 2), (2, 3)])


def test_breve_examples():
    x = np.array([[1.0, 0.7], [2.0, 1.0], [1.0, 0.5]])
    assert breve_edges(x, EDGE) == {(1, 2): 0.5}
    assert breve_edges(np.array([[2.0, 3.0]]), EDGE) == {(1, 2): 1.5}
    with pytest.raises(MalformedDataError):
        breve_edges(np.array([[1.0, -1.0]]), EDGE)
    with pytest.raises(InvalidArgumentError):
        breve_edges(np.ones((3, 3)), EDGE)


def test_breve_exact_on_simulated_edge():
    wd = WeightedDag(EDGE, {(1, 2): 0.5})
    x = simulate_model(wd, default_spec(2), 10_000, seed=1)
    assert breve_edges(x, EDGE)[(1, 2)] == pytest.approx(0.5, rel=1e-12)


def test_bhat_chain_closure():
    x = np.array([[1.0, 0.5, 1.0], [1.0, 1.0, 0.8]])
    rep = bhat(x, CHAIN)
    assert rep.b_breve_edges == {(1, 2): 0.5, (2, 3): 0.8}
    assert rep.b_hat[0, 2] == pytest.approx(0.4, rel=1e-15)
    assert validate_ml_matrix(rep.b_hat, CHAIN)
    assert rep.atom_hits == {(1, 2): 1, (2, 3): 1}
    assert rep.n == 2
    assert rep.to_json()["b_hat"][0][2] == pytest.approx(0.4)


def test_breve_violating_fixpoint_is_repaired():
    # observed min ratio for 1 -> 3 exceeds the product along the chain
    x = np.array([[1.0, 0.5, 0.4], [1.0, 0.9, 0.45]])
    breve = breve_matrix(x, CHAIN)
    assert breve[0, 2] > breve[0, 1] * breve[1, 2]
    assert not validate_ml_matrix(breve, CHAIN)
    rep = bhat(x, CHAIN)
    assert validate_ml_matrix(rep.b_hat, CHAIN)
    assert rep.b_hat[0, 2] == pytest.approx(0.25)
    assert rep.b_hat[0, 2] <= breve[0, 2]


def test_single_realization_recovers_diamond():
    wd = WeightedDag.from_edges(4, [(1, 2, 0.5), (1, 3, 0.25), (2, 4, 0.4), (3, 4, 0.8)])
    b = ml_matrix_from_weights(wd)
    x = SampleSet(np.array([[100.0, 1.0, 1.0, 1.0]]) @ np.diag([1.0, 1.0, 1.0, 1.0]))
    x = SampleSet(np.maximum.reduce([x.values[:, [k]] * b[k] for k in range(4)]))
    rep = bhat(x, wd.dag)
    assert exact_match(rep.b_hat, b)


@settings(max_examples=40)
@given(weighted_dags(min_d=2, max_d=6), st.integers(1, 300), st.integers(0, 2**31))
def test_sandwich_and_validity(wd, n, seed):
    b = ml_matrix_from_weights(wd)
    x = simulate_model(wd, default_spec(wd.d), n, seed)
    rep = bhat(x, wd.dag)
    assert validate_ml_matrix(rep.b_hat, wd.dag)
    for (k, i), v in rep.b_breve_edges.items():
        assert b[k - 1, i - 1] * (1 - 1e-12) <= rep.b_hat[k - 1, i - 1] <= v * (1 + 1e-12)
    reach = wd.dag.reachability_matrix()
    assert np.all(b[reach] * (1 - 1e-12) <= rep.b_hat[reach])
    assert np.all(rep.b_hat[reach] <= rep.b_breve[reach] * (1 + 1e-12))


def test_learn_structure_rule():
    hit = learn_structure(np.array([[1.0, 0.5], [1.0, 0.5], [1.0, 0.9]]))
    assert hit.ancestor_pairs == {(1, 2)}
    assert hit.b_check[0, 1] == 0.5 and hit.b_check[1, 0] == 0.0
    np.testing.assert_array_equal(np.diag(hit.b_check), 1.0)
    miss = learn_structure(np.array([[1.0, 0.50], [1.0, 0.51], [1.0, 0.9]]))
    assert miss.ancestor_pairs == frozenset()
    np.testing.assert_array_equal(miss.b_check, np.eye(2))
    # a tie within the relative band counts
    near = learn_structure(np.array([[1.0, 0.5], [1.0, 0.5 * (1 + 1e-12)], [1.0, 0.9]]))
    assert near.ancestor_pairs == {(1, 2)}
    strict = learn_structure(np.array([[1.0, 0.5], [1.0, 0.5 * (1 + 1e-6)], [1.0, 0.9]]))
    assert strict.ancestor_pairs == frozenset()
    wide = learn_structure(np.array([[1.0, 0.5], [1.0, 0.5 * (1 + 1e-6)], [1.0, 0.9]]), tie_rtol=1e-5)
    assert wide.ancestor_pairs == {(1, 2)}


def test_learn_structure_errors_and_knobs():
    with pytest.raises(InsufficientDataError):
        learn_structure(np.array([[1.0, 2.0]]))
    with pytest.raises(MalformedDataError):
        learn_structure(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(InvalidArgumentError):
        learn_structure(np.ones((3, 2)), min_hits=0)
    x = np.array([[1.0, 0.5], [1.0, 0.5], [1.0, 0.9]])
    assert learn_structure(x, min_hits=3).ancestor_pairs == frozenset()


def test_learn_then_project():
    wd = WeightedDag.from_edges(3, [(1, 2, 0.8), (2, 3, 0.6)])
    x = simulate_model(wd, default_spec(3), 2000, seed=4)
    learned = learn_structure(x, project=True)
    dag = Dag(3, learned.ancestor_pairs)
    assert validate_ml_matrix(learned.projected, dag)
    assert "projected" in learned.to_json()
    with pytest.raises(MalformedDataError):
        project_learned(np.array([[1, 0.5], [0.5, 1]]), {(1, 2), (2, 1)})


def test_learn_recovery_nondecreasing_in_n():
    wd = WeightedDag.from_edges(3, [(1, 2, 0.3), (2, 3, 0.3)])
    spec = default_spec(3)
    rates = []
    for n in (50, 100, 200, 400):
        hits = structure_recovery(wd, spec, n, 200, seed=n)
        rates.append((hits.mean(), math.sqrt(max(hits.mean() * (1 - hits.mean()), 1e-4) / 200)))
    for (f0, s0), (f1, s1) in zip(rates, rates[1:]):
        assert f1 >= f0 - 3 * math.hypot(s0, s1)
    assert rates[-1][0] > rates[0][0]


def test_required_sample_size():
    assert required_sample_size(0.05, 0.9) == 29
    assert required_sample_size(0.5, 0.5) == 1
    assert required_sample_size(0.05, 1e-300) == 1
    assert required_sample_size(0.1, 0.95) == 45
    for p, q in [(0, 0.5), (1, 0.5), (0.5, 0), (0.5, 1), (-0.1, 0.5)]:
        with pytest.raises(InvalidArgumentError):
            required_sample_size(p, q)


@given(st.floats(1e-6, 0.999), st.floats(1e-6, 0.999))
def test_required_sample_size_is_minimal(p, q):
    n = required_sample_size(p, q)
    assert q**n <= p * (1 + 1e-8)
    if n > 1:
        assert q ** (n - 1) > p * (1 - 1e-8)


def test_atom_probability_closed_form_and_monotone():
    spec = default_spec(2)
    probs = []
    for c in (0.5, 1.0, 2.0, 4.0):
        wd = WeightedDag.from_edges(2, [(1, 2, c)])
        ap = atom_probability(wd, spec, (1, 2), 200_000, seed=1)
        # Frechet(1) innovations: P(X2 = c X1) = c / (1 + c)
        assert abs(ap.probability - c / (1 + c)) <= 4 * ap.stderr
        assert ap.stderr <= 0.5 / math.sqrt(ap.n_mc)
        assert ap.prob_strict == pytest.approx(1 - ap.probability)
        probs.append(ap)
    for a, b in zip(probs, probs[1:]):
        assert b.probability > a.probability - 3 * math.hypot(a.stderr, b.stderr)
    with pytest.raises(InvalidArgumentError):
        atom_probability(WeightedDag.from_edges(2, [(1, 2, 1.0)]), spec, (2, 1), 10, seed=1)


def test_atom_probability_deterministic():
    wd = WeightedDag.from_edges(2, [(1, 2, 0.7)])
    a = atom_probability(wd, default_spec(2), (1, 2), 10_000, seed=3)
    b = atom_probability(wd, default_spec(2), (1, 2), 10_000, seed=3)
    assert a == b


def test_failure_rate_squares_when_n_doubles():
    wd = WeightedDag.from_edges(2, [(1, 2, 1 / 19)])
    spec = default_spec(2)
    R = 1500

    def failure(n, offset):
        bad = 0
        for r in range(R):
            x = simulate_model(wd, spec, n, seed=77, replicate=offset + r)
            bad += not exact_match(bhat(x, EDGE).b_hat, ml_matrix_from_weights(wd))
        return bad / R

    f20, f40 = failure(20, 0), failure(40, R)
    assert 0.05 <= f20 <= 0.5
    assert f40 <= f20**2 * 1.5


def test_recover_root_is_marginal():
    b = np.eye(2)
    xs = np.array([0.5, 1.0, 2.0])
    table = recover_innovation_cdfs(b, [lambda x: np.exp(-1 / x), lambda x: np.exp(-2 / x)], xs)
    np.testing.assert_allclose(table.values[:, 0], np.exp(-1 / xs), rtol=1e-15)
    np.testing.assert_allclose(table.values[:, 1], np.exp(-2 / xs), rtol=1e-15)
    assert not table.censored.any()


def test_recover_closed_form_two_nodes():
    b = np.array([[1, 0.5], [0, 1]])
    xs = np.array([0.5, 1.0, 2.0, 4.0])
    fx2 = lambda x: np.exp(-1 / x) * np.exp(-0.5 / x)  # noqa: E731
    table = recover_innovation_cdfs(b, [lambda x: np.exp(-1 / x), fx2], xs)
    np.testing.assert_allclose(table.values[:, 1], np.exp(-1 / xs), rtol=1e-12, atol=0)


def test_recover_from_model_marginals_chain():
    wd = WeightedDag.from_edges(3, [(1, 2, 0.7), (2, 3, 1.5), (1, 3, 0.4)])
    spec = InnovationSpec((Frechet(1, 1), Frechet(2, 0.5), Frechet(1.5, 2)))
    b = ml_matrix_from_weights(wd)
    xs = np.geomspace(0.3, 20, 25)
    table = recover_innovation_cdfs(b, model_marginals(b, spec), xs)
    for k in range(3):
        np.testing.assert_allclose(table.values[:, k], spec.nodes[k].cdf(xs), rtol=1e-10)


def test_recover_flags_censored_points():
    b = np.array([[1, 0.5], [0, 1]])
    xs = np.array([0.01, 0.015, 1.0])
    table = recover_innovation_cdfs(b, [lambda x: np.exp(-1 / x), lambda x: np.exp(-1.5 / x)], xs)
    assert table.censored[0, 1] and table.censored[1, 1]
    assert np.isnan(table.values[0, 1])
    assert not table.censored[2, 1]
    assert not table.censored[:, 0].any()


def test_recover_empirical_kolmogorov():
    wd = WeightedDag.from_edges(2, [(1, 2, 0.5)])
    x = simulate_model(wd, default_spec(2), 100_000, seed=21)
    xs = np.linspace(0.5, 10, 400)
    table = recover_innovation_cdfs(ml_matrix_from_weights(wd), empirical_marginals(x), xs)
    assert np.max(np.abs(table.values[:, 1] - np.exp(-1 / xs))) < 0.02


def test_recover_input_errors():
    with pytest.raises(InvalidArgumentError):
        recover_innovation_cdfs(np.eye(2), [lambda x: x], [1.0])
    with pytest.raises(InvalidArgumentError):
        recover_innovation_cdfs(np.eye(1), [lambda x: x], [0.0, 1.0])


def test_exact_match():
    assert exact_match(np.array([[1, 0.5]]), np.array([[1, 0.5 * (1 + 1e-14)]]))
    assert not exact_match(np.array([[1, 0.5]]), np.array([[1, 0.5 * (1 + 1e-9)]]))
    assert not exact_match(np.array([[1, 0.0]]), np.array([[1, 1e-300]]))
    assert not exact_match(np.eye(2), np.eye(3))


def test_sandwich_random_models():
    rng = np.random.default_rng(8)
    for _ in range(200):
        wd = random_weighted_dag(rng, int(rng.integers(2, 7)), 0.5)
        b = ml_matrix_from_weights(wd)
        x = simulate_model(wd, default_spec(wd.d), int(rng.integers(1, 100)), seed=int(rng.integers(1 << 30)))
        rep = bhat(x, wd.dag)
        for (k, i), v in rep.b_breve_edges.items():
            assert b[k - 1, i - 1] * (1 - 1e-12) <= rep.b_hat[k - 1, i - 1] <= v * (1 + 1e-12)
