from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import all_assignments, brute_penalty_energy, has_exact_cover
from tcsqubo.errors import DimensionError, ValidationError
from tcsqubo.qubo import (
    ObjectiveVector3,
    QuboModel,
    build_three_objective_qubo,
    build_two_objective_qubo,
    dump_qubo,
    energies,
    energy,
    evaluate_objectives2,
    evaluate_objectives3,
    load_qubo,
    penalty_upper_bound,
)
from tcsqubo.suite import NormalizedCosts, NormalizationMode, TestSuite, normalize_costs
from tcsqubo.synthetic import planted_exact_cover_suite, random_three_objective_suite, random_two_objective_suite


def _costs(values) -> NormalizedCosts:
    return NormalizedCosts(np.asarray(values, dtype=float), NormalizationMode.MAX_DIVIDE)


@pytest.fixture
def two_case():
    suite = TestSuite.from_records([2.0, 1.0], [1, 0], [{0}, {0}])
    return suite, _costs([1.0, 0.5])


def test_build_hand_expanded_example(two_case):
    suite, costs = two_case
    model = build_three_objective_qubo(suite, costs, alpha=0.5, penalty=2.0)
    assert model.linear.tolist() == [-2.0, -1.75]
    assert model.quadratic == {(0, 1): 4.0}
    assert model.offset == 2.0


def test_energy_hand_evaluation(two_case):
    model = build_three_objective_qubo(*two_case, alpha=0.5, penalty=2.0)
    assert energy(model, [0, 0]) == model.offset
    assert energy(model, [1, 0]) == 0.0
    assert energy(model, [1, 1]) == 2.25


def test_energy_dimension_error(two_case):
    model = build_three_objective_qubo(*two_case)
    with pytest.raises(DimensionError):
        energy(model, [1, 0, 1])
    with pytest.raises(DimensionError):
        energies(model, np.zeros((2, 3)))


def test_no_statements_gives_pure_linear_model():
    suite = TestSuite.from_records([4.0, 2.0, 1.0], [1, 0, 1])
    costs = normalize_costs(suite)
    model = build_three_objective_qubo(suite, costs, alpha=0.3)
    assert model.quadratic == {}
    assert model.offset == 0.0
    np.testing.assert_allclose(model.linear, 0.3 * costs.values - 0.7 * suite.fault_flags)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
def test_alpha_out_of_range(two_case, alpha):
    with pytest.raises(ValidationError):
        build_three_objective_qubo(*two_case, alpha=alpha)


def test_nonpositive_penalty_rejected(two_case):
    with pytest.raises(ValidationError):
        build_three_objective_qubo(*two_case, penalty=0.0)


def test_penalty_upper_bound_examples(two_case):
    assert penalty_upper_bound(*two_case, alpha=0.5) == 2.25
    empty = TestSuite.from_records([])
    assert penalty_upper_bound(empty, _costs([]), alpha=0.5) == 1.0


def test_default_penalty_is_upper_bound(two_case):
    model = build_three_objective_qubo(*two_case, alpha=0.5)
    assert model.penalty == 2.25


def test_exhaustive_equivalence_on_ten_cases():
    suite = random_three_objective_suite(np.random.default_rng(10), 10, 15, density=0.25)
    costs = normalize_costs(suite)
    model = build_three_objective_qubo(suite, costs, alpha=0.4)
    X = all_assignments(10)
    oracle = np.array([brute_penalty_energy(suite, costs, 0.4, model.penalty, x) for x in X])
    np.testing.assert_allclose(energies(model, X), oracle, rtol=0, atol=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_penalty_enforces_coverage_on_eight_cases(seed):
    rng = np.random.default_rng(100 + seed)
    suite = planted_exact_cover_suite(rng, 8, 12)
    assert has_exact_cover(suite)
    costs = normalize_costs(suite)
    model = build_three_objective_qubo(suite, costs)
    X = all_assignments(8)
    e = energies(model, X)
    for x in X[np.isclose(e, e.min(), rtol=0, atol=1e-9)]:
        assert evaluate_objectives3(suite, costs, x).statement_coverage == len(suite.statement_universe)


@pytest.mark.parametrize("seed", range(5))
def test_violations_cost_more_than_some_exact_cover(seed):
    suite = planted_exact_cover_suite(np.random.default_rng(200 + seed), 8, 10)
    costs = normalize_costs(suite)
    model = build_three_objective_qubo(suite, costs)
    X = all_assignments(8)
    e = energies(model, X)
    exact = np.array([all(x[list(m)].sum() == 1 for m in suite.coverage_index.values()) for x in X])
    assert e[~exact].min() > e[exact].min()


def test_over_coverage_can_win_when_no_exact_cover_exists():
    # Every coverage set contains statement 2, so no exact cover includes statement 3
    # without double-covering 2. The energy minimum then leaves statement 3 uncovered.
    suite = TestSuite.from_records([1.0, 1.0], [0, 0], [{1, 2}, {2, 3}])
    costs = normalize_costs(suite)
    model = build_three_objective_qubo(suite, costs, alpha=0.5, penalty=2.0)
    assert not has_exact_cover(suite)
    assert energy(model, [1, 0]) == 2.5
    assert energy(model, [1, 1]) == 3.0
    X = all_assignments(2)
    best = X[np.argmin(energies(model, X))]
    assert evaluate_objectives3(suite, costs, best).statement_coverage < 3


def test_two_objective_single_term():
    suite = TestSuite.from_records([3.0], failure_rates=[0.8])
    model = build_two_objective_qubo(suite, _costs([1.0]), alpha=0.5)
    assert model.linear.tolist() == pytest.approx([0.1], abs=1e-15)
    assert model.quadratic == {} and model.offset == 0.0 and model.penalty == 0.0


def test_two_objective_cancellation():
    rates = [0.2, 0.5, 0.9, 0.4]
    suite = TestSuite.from_records([1.0] * 4, failure_rates=rates)
    model = build_two_objective_qubo(suite, _costs(rates), alpha=0.5)
    assert not model.linear.any()
    assert not energies(model, all_assignments(4)).any()


def test_two_objective_missing_rates(small_suite):
    with pytest.raises(ValidationError):
        build_two_objective_qubo(small_suite, normalize_costs(small_suite))


def test_two_objective_brute_force_minimizer():
    suite = random_two_objective_suite(np.random.default_rng(6), 6)
    costs = normalize_costs(suite)
    alpha = 0.5
    model = build_two_objective_qubo(suite, costs, alpha)
    X = all_assignments(6)
    weighted = [alpha * float(x @ costs.values) - (1 - alpha) * float(x @ suite.failure_rates) for x in X]
    assert int(np.argmin(energies(model, X))) == int(np.argmin(weighted))


def test_objectives_of_empty_and_full_selection(small_suite):
    costs = normalize_costs(small_suite)
    assert evaluate_objectives3(small_suite, costs, [0, 0, 0]) == ObjectiveVector3(0.0, 0, 0)
    full = evaluate_objectives3(small_suite, costs, [1, 1, 1])
    assert full.statement_coverage == len(small_suite.statement_universe)
    assert full.fault_coverage == 2
    assert full.total_cost == pytest.approx(1.75)


def test_objectives_set_union_oracle(small_suite):
    costs = normalize_costs(small_suite)
    covered = small_suite[0].covered_statements | small_suite[2].covered_statements
    assert evaluate_objectives3(small_suite, costs, [1, 0, 1]).statement_coverage == len(covered)


def test_objectives2_sums():
    suite = TestSuite.from_records([2.0, 4.0, 1.0], failure_rates=[0.1, 0.3, 0.6])
    obj = evaluate_objectives2(suite, normalize_costs(suite), [1, 0, 1])
    assert obj.total_cost == pytest.approx(0.75)
    assert obj.total_failure_rate == pytest.approx(0.7)
    with pytest.raises(DimensionError):
        evaluate_objectives2(suite, normalize_costs(suite), [1, 0])


def test_qubo_file_round_trip(tmp_path):
    suite = random_three_objective_suite(np.random.default_rng(2), 12, 20)
    model = build_three_objective_qubo(suite, normalize_costs(suite), alpha=0.7)
    dump_qubo(model, tmp_path / "m.qubo")
    assert load_qubo(tmp_path / "m.qubo") == model


def test_model_is_immutable(two_case):
    model = build_three_objective_qubo(*two_case)
    with pytest.raises(ValueError):
        model.linear[0] = 1.0


@given(st.integers(0, 2**32 - 1), st.integers(2, 9))
@settings(max_examples=60, deadline=None)
def test_energy_invariant_under_relabeling(seed, n):
    rng = np.random.default_rng(seed)
    suite = random_three_objective_suite(rng, n, 8)
    perm = rng.permutation(n)
    relabeled = suite.subset(perm)
    model = build_three_objective_qubo(suite, normalize_costs(suite))
    other = build_three_objective_qubo(relabeled, normalize_costs(relabeled))
    np.testing.assert_allclose(other.linear, model.linear[perm], atol=1e-12)
    X = all_assignments(n)
    # x in the relabeled model corresponds to x[argsort(perm)] in the original
    np.testing.assert_allclose(energies(other, X), energies(model, X[:, np.argsort(perm)]), atol=1e-9)


def _brute_optimum_cost(model: QuboModel, X, costs) -> float:
    e = energies(model, X)
    return float(X[int(np.argmin(e))] @ costs.values)


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.9), st.floats(0.01, 0.09))
@settings(max_examples=60, deadline=None)
def test_alpha_monotonicity_two_objective(seed, alpha, step):
    suite = random_two_objective_suite(np.random.default_rng(seed), 10)
    costs = normalize_costs(suite)
    X = all_assignments(10)
    low = _brute_optimum_cost(build_two_objective_qubo(suite, costs, alpha), X, costs)
    high = _brute_optimum_cost(build_two_objective_qubo(suite, costs, alpha + step), X, costs)
    assert high <= low + 1e-12


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.9), st.floats(0.01, 0.09))
@settings(max_examples=40, deadline=None)
def test_alpha_monotonicity_three_objective_planted(seed, alpha, step):
    suite = planted_exact_cover_suite(np.random.default_rng(seed), 10, 12)
    costs = normalize_costs(suite)
    X = all_assignments(10)
    low = _brute_optimum_cost(build_three_objective_qubo(suite, costs, alpha), X, costs)
    high = _brute_optimum_cost(build_three_objective_qubo(suite, costs, alpha + step), X, costs)
    assert high <= low + 1e-12
