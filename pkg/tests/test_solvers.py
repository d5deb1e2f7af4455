from __future__ import annotations

import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import all_assignments, has_exact_cover
from tcsqubo.errors import CapacityError, DimensionError, ValidationError
from tcsqubo.pareto import dominates
from tcsqubo.qubo import (
    QuboModel,
    build_three_objective_qubo,
    build_two_objective_qubo,
    energies,
    energy,
    evaluate_objectives2,
    evaluate_objectives3,
)
from tcsqubo.solvers import (
    MAX_EXACT_VARS,
    AnnealConfig,
    BootstrapConfig,
    SampleSet,
    additional_greedy,
    bootstrap_solve,
    default_beta_range,
    extract_archive,
    greedy_order,
    sample_subsets,
    solve_exact,
    solve_sa,
)
from tcsqubo.solvers._seeding import derive_seed
from tcsqubo.suite import NormalizationMode, NormalizedCosts, TestSuite, normalize_costs
from tcsqubo.synthetic import planted_exact_cover_suite, random_three_objective_suite, random_two_objective_suite


def _linear_model(linear, offset=0.0, quadratic=None) -> QuboModel:
    return QuboModel(len(linear), np.asarray(linear, dtype=float), quadratic or {}, offset, 0.5, 0.0)


# annealing

def test_single_variable_descent():
    sampleset = solve_sa(_linear_model([-1.0], offset=0.25), AnnealConfig(num_reads=5, sweeps=50, seed=1))
    assert sampleset.first.assignment.tolist() == [1]
    assert sampleset.first.energy == -0.75
    assert sampleset.num_reads == 5


def test_same_seed_is_bit_identical():
    suite = random_three_objective_suite(np.random.default_rng(4), 30, 50)
    model = build_three_objective_qubo(suite, normalize_costs(suite))
    config = AnnealConfig(num_reads=20, sweeps=300, seed=42)
    a, b = solve_sa(model, config), solve_sa(model, config)
    assert a == b
    assert solve_sa(model, config, workers=4) == a


def test_different_seeds_differ():
    suite = random_three_objective_suite(np.random.default_rng(4), 30, 50)
    model = build_three_objective_qubo(suite, normalize_costs(suite))
    a = solve_sa(model, AnnealConfig(num_reads=20, sweeps=5, seed=1))
    b = solve_sa(model, AnnealConfig(num_reads=20, sweeps=5, seed=2))
    assert a != b


def test_sampleset_energies_and_order():
    suite = random_three_objective_suite(np.random.default_rng(8), 15, 20)
    model = build_three_objective_qubo(suite, normalize_costs(suite))
    sampleset = solve_sa(model, AnnealConfig(num_reads=30, sweeps=20, seed=3))
    np.testing.assert_allclose(sampleset.energies, energies(model, sampleset.samples), rtol=0, atol=0)
    assert np.all(np.diff(sampleset.energies) >= 0)
    assert sampleset.counts.sum() == 30
    for x, e, _ in sampleset:
        assert energy(model, x) == e


def test_sa_finds_exact_minimum_in_most_trials():
    hits = 0
    for trial in range(10):
        suite = random_three_objective_suite(np.random.default_rng(300 + trial), 12, 18)
        model = build_three_objective_qubo(suite, normalize_costs(suite))
        best = solve_sa(model, AnnealConfig(num_reads=50, sweeps=1000, seed=trial)).first.energy
        exact = solve_exact(model).first.energy
        assert best >= exact - 1e-9
        hits += abs(best - exact) <= 1e-9
    assert hits >= 9


def test_default_beta_range():
    model = _linear_model([-1.0, 2.0, 0.5], quadratic={(0, 1): 4.0})
    hot, cold = default_beta_range(model)
    # the largest single-flip change is |2| + |4| = 6; the smallest coefficient is 0.5
    assert hot == pytest.approx(np.log(2) / 6)
    assert cold == pytest.approx(np.log(1e4) / 0.5)
    assert cold >= hot > 0


def test_anneal_config_validation():
    with pytest.raises(ValidationError):
        AnnealConfig(num_reads=0)
    with pytest.raises(ValidationError):
        AnnealConfig(sweeps=0)
    with pytest.raises(ValidationError):
        AnnealConfig(beta_initial=2.0, beta_final=1.0)
    with pytest.raises(ValidationError):
        solve_sa(_linear_model([]))


# exhaustive search

def test_exact_empty_model():
    sampleset = solve_exact(_linear_model([], offset=3.5))
    assert len(sampleset) == 1
    assert sampleset.first.assignment.shape == (0,)
    assert sampleset.first.energy == 3.5


def test_exact_all_assignments_tie_under_cancellation():
    rates = [0.3, 0.6, 0.1, 0.9, 0.5]
    suite = TestSuite.from_records(rates, failure_rates=rates)
    costs = NormalizedCosts(np.asarray(rates), NormalizationMode.MAX_DIVIDE)
    model = build_two_objective_qubo(suite, costs, 0.5)
    sampleset = solve_exact(model)
    assert len(sampleset) == 2 ** 5
    assert not sampleset.energies.any()


def test_exact_matches_brute_force():
    suite = random_three_objective_suite(np.random.default_rng(12), 11, 14)
    model = build_three_objective_qubo(suite, normalize_costs(suite))
    X = all_assignments(11)
    e = energies(model, X)
    sampleset = solve_exact(model)
    assert sampleset.first.energy == pytest.approx(e.min(), abs=1e-12)
    expected = {tuple(x) for x in X[np.abs(e - e.min()) <= 1e-9]}
    assert {tuple(x) for x in sampleset.samples} == expected


def test_exact_minimum_covers_everything_on_eight_cases():
    suite = planted_exact_cover_suite(np.random.default_rng(8), 8, 10)
    costs = normalize_costs(suite)
    for x, _, _ in solve_exact(build_three_objective_qubo(suite, costs)):
        assert evaluate_objectives3(suite, costs, x).statement_coverage == len(suite.statement_universe)


def test_exact_size_guard():
    with pytest.raises(CapacityError):
        solve_exact(_linear_model(np.zeros(MAX_EXACT_VARS + 1)))


# additional greedy

def test_greedy_hand_simulation():
    # A covers {1, 2}, B covers {2}, C covers {3}; all cost 1, no faults
    suite = TestSuite.from_records([1.0, 1.0, 1.0], [0, 0, 0], [{1, 2}, {2}, {3}], names=["A", "B", "C"])
    costs = normalize_costs(suite)
    assert greedy_order(suite, costs) == [0, 2]
    frontier = additional_greedy(suite, costs)
    assert [m.selected.tolist() for m in frontier] == [[0], [0, 2]]


def test_greedy_dominant_pick_first():
    suite = TestSuite.from_records([1.0, 5.0, 5.0], [0, 0, 0], [{1, 2, 3}, {1}, {2, 3}])
    assert greedy_order(suite, normalize_costs(suite)) == [0]


def test_greedy_tie_break_by_cost_then_index():
    # identical scores: cost 2 with two statements vs cost 1 with one statement
    suite = TestSuite.from_records([2.0, 1.0, 1.0], [0, 0, 0], [{1, 2}, {3}, {4}])
    assert greedy_order(suite, normalize_costs(suite))[:2] == [1, 2]


def test_greedy_collects_fault_flags_without_coverage():
    suite = TestSuite.from_records([1.0, 1.0, 1.0], [0, 1, 0], [{1}, set(), set()])
    order = greedy_order(suite, normalize_costs(suite))
    assert sorted(order) == [0, 1]


def test_greedy_zero_cost_test():
    suite = TestSuite.from_records([0.0, 1.0], [0, 0], [{1}, {2}])
    assert greedy_order(suite, normalize_costs(suite)) == [0, 1]


def test_greedy_rejects_empty_suite():
    with pytest.raises(ValidationError):
        additional_greedy(TestSuite.from_records([]), None)


@given(st.integers(0, 2**32 - 1), st.integers(1, 25), st.integers(1, 30))
@settings(max_examples=100, deadline=None)
def test_greedy_completes_coverage(seed, n, statements):
    suite = random_three_objective_suite(np.random.default_rng(seed), n, statements)
    costs = normalize_costs(suite)
    order = greedy_order(suite, costs)
    assert len(order) <= n and len(set(order)) == len(order)
    x = np.zeros(n, dtype=np.uint8)
    x[order] = 1
    final = evaluate_objectives3(suite, costs, x)
    assert final.statement_coverage == len(suite.statement_universe)
    assert final.fault_coverage == int(suite.fault_flags.sum())
    frontier = additional_greedy(suite, costs)
    assert len(frontier) <= n
    for member in frontier:
        assert member.objectives == evaluate_objectives3(suite, costs, member.assignment)


# archive extraction

def test_extract_archive_single_test(small_suite):
    costs = normalize_costs(small_suite)
    archive = extract_archive(small_suite, costs, [0, 1, 0])
    assert len(archive) == 1
    assert archive[0].selected.tolist() == [1]


def test_extract_archive_dimension_error(small_suite):
    with pytest.raises(DimensionError):
        extract_archive(small_suite, normalize_costs(small_suite), [1, 0])


@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
@settings(max_examples=100, deadline=None)
def test_extract_archive_properties(seed, n):
    rng = np.random.default_rng(seed)
    suite = random_three_objective_suite(rng, n, 10)
    costs = normalize_costs(suite)
    x = (rng.random(n) < 0.5).astype(np.uint8)
    archive = extract_archive(suite, costs, x)
    assert len(archive) <= int(x.sum())
    for member in archive:
        assert set(member.selected) <= set(np.flatnonzero(x))
        assert member.objectives == evaluate_objectives3(suite, costs, member.assignment)
    for a in archive:
        for b in archive:
            assert not dominates(a.vector, b.vector)


def test_extract_archive_pairwise_oracle_six_cases():
    suite = random_three_objective_suite(np.random.default_rng(66), 6, 9)
    costs = normalize_costs(suite)
    archive = extract_archive(suite, costs, np.ones(6, dtype=np.uint8))
    vectors = [m.objectives.as_tuple() for m in archive]
    for i, a in enumerate(vectors):
        for j, b in enumerate(vectors):
            if i != j:
                better_or_equal = a[0] <= b[0] and a[1] >= b[1] and a[2] >= b[2]
                strictly = a[0] < b[0] or a[1] > b[1] or a[2] > b[2]
                assert not (better_or_equal and strictly)


# bootstrap decomposition

@pytest.fixture
def two_objective_suite():
    return random_two_objective_suite(np.random.default_rng(21), 60)


def test_bootstrap_union_law(two_objective_suite):
    suite = two_objective_suite
    costs = normalize_costs(suite)
    result = bootstrap_solve(suite, costs, 0.5, BootstrapConfig(n=15, m=5, seed=9), AnnealConfig(20, 200, seed=9))
    union = np.unique(np.concatenate(result.sub_selections)) if result.sub_selections else np.array([])
    assert result.solution.selected.tolist() == union.tolist()
    sampled = set(np.concatenate(result.subsets).tolist())
    assert set(result.solution.selected.tolist()) <= sampled
    for subset, picked in zip(result.subsets, result.sub_selections):
        assert len(subset) == 15 and len(set(subset.tolist())) == 15
        assert set(picked.tolist()) <= set(subset.tolist())
    assert result.coverage == len(sampled) / len(suite)
    assert result.solution.objectives == evaluate_objectives2(suite, costs, result.solution.assignment)


def test_bootstrap_is_deterministic(two_objective_suite):
    costs = normalize_costs(two_objective_suite)
    args = (two_objective_suite, costs, 0.5, BootstrapConfig(n=10, m=8, seed=4), AnnealConfig(10, 100, seed=4))
    a, b = bootstrap_solve(*args), bootstrap_solve(*args, workers=4)
    assert a.solution.assignment.tolist() == b.solution.assignment.tolist()
    assert [s.tolist() for s in a.subsets] == [s.tolist() for s in b.subsets]


def test_bootstrap_degenerate_decomposition(two_objective_suite):
    suite = two_objective_suite
    costs = normalize_costs(suite)
    aconfig = AnnealConfig(20, 500, seed=7)
    result = bootstrap_solve(suite, costs, 0.5, BootstrapConfig(n=len(suite), m=1, seed=7), aconfig)
    model = build_two_objective_qubo(suite, costs, 0.5)
    whole = solve_sa(model, dataclasses.replace(aconfig, seed=derive_seed(aconfig.seed, 0))).first.assignment
    assert result.solution.assignment.tolist() == whole.tolist()
    assert result.coverage == 1.0 and result.meets_target
    # the linear model's optimum is known in closed form
    assert whole.tolist() == (model.linear < 0).astype(int).tolist()


@pytest.mark.parametrize("size, n, m", [(89, 30, 6), (287, 20, 21)])
def test_bootstrap_published_configurations_accepted(size, n, m):
    suite = random_two_objective_suite(np.random.default_rng(size), size)
    result = bootstrap_solve(suite, normalize_costs(suite), 0.5, BootstrapConfig(n=n, m=m, seed=1),
                             AnnealConfig(5, 50, seed=1))
    assert len(result.subsets) == m
    assert result.solution.assignment.shape == (size,)


def test_bootstrap_reports_shortfall(two_objective_suite):
    result = bootstrap_solve(two_objective_suite, normalize_costs(two_objective_suite), 0.5,
                             BootstrapConfig(n=5, m=2, beta_coverage=0.9), AnnealConfig(5, 50))
    assert result.coverage <= 10 / 60
    assert not result.meets_target


def test_bootstrap_parameter_errors(two_objective_suite, small_suite):
    with pytest.raises(ValidationError):
        sample_subsets(10, BootstrapConfig(n=11, m=1))
    with pytest.raises(ValidationError):
        bootstrap_solve(two_objective_suite, normalize_costs(two_objective_suite), 0.5, BootstrapConfig(n=61))
    with pytest.raises(ValidationError):
        bootstrap_solve(small_suite, normalize_costs(small_suite), 0.5, BootstrapConfig(n=2, m=1))
    for bad in ({"n": 0}, {"m": 0}, {"beta_coverage": 0.0}, {"beta_coverage": 1.5}):
        with pytest.raises(ValidationError):
            BootstrapConfig(**bad)


def test_sample_set_from_duplicate_samples():
    model = _linear_model([1.0, -1.0])
    sampleset = SampleSet.from_samples(model, np.array([[0, 1], [1, 1], [0, 1]], dtype=np.uint8))
    assert sampleset.samples.tolist() == [[0, 1], [1, 1]]
    assert sampleset.counts.tolist() == [2, 1]
    assert sampleset.energies.tolist() == [-1.0, 0.0]


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_bootstrap_selection_is_within_whole_optimum(seed):
    # each sub-problem is a restriction of the same separable objective, so it can only
    # select tests that the whole-problem optimum also selects
    suite = random_two_objective_suite(np.random.default_rng(seed), 50)
    costs = normalize_costs(suite)
    whole = set(np.flatnonzero(build_two_objective_qubo(suite, costs, 0.5).linear < 0).tolist())
    result = bootstrap_solve(suite, costs, 0.5, BootstrapConfig(n=10, m=5, seed=seed), AnnealConfig(10, 200, seed=seed))
    assert set(result.solution.selected.tolist()) <= whole
