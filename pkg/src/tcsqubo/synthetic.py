"""Random suites for experiments and tests."""

from __future__ import annotations

import numpy as np

from .suite import TestSuite

__all__ = ["random_three_objective_suite", "planted_exact_cover_suite", "random_two_objective_suite"]


def random_three_objective_suite(
    rng: np.random.Generator,
    n_cases: int,
    n_statements: int,
    density: float = 0.3,
    fault_probability: float = 0.3,
) -> TestSuite:
    """Independent Bernoulli coverage, uniform costs in [1, 100), Bernoulli fault flags."""
    coverage = rng.random((n_cases, n_statements)) < density
    costs = rng.uniform(1.0, 100.0, size=n_cases)
    faults = (rng.random(n_cases) < fault_probability).astype(int)
    return TestSuite.from_records(costs, faults, [np.flatnonzero(row) for row in coverage])


def planted_exact_cover_suite(
    rng: np.random.Generator,
    n_cases: int,
    n_statements: int,
    density: float = 0.3,
    fault_probability: float = 0.3,
) -> TestSuite:
    """Like :func:`random_three_objective_suite`, but some subset of tests covers every statement exactly once.

    Statements are dealt out to a random group of "planted" tests; the other
    tests get random coverage. The case order is shuffled.
    """
    n_planted = int(rng.integers(1, max(1, n_cases // 2) + 1))
    coverage = rng.random((n_cases, n_statements)) < density
    coverage[:n_planted] = False
    owner = rng.integers(0, n_planted, size=n_statements)
    coverage[owner, np.arange(n_statements)] = True
    perm = rng.permutation(n_cases)
    coverage = coverage[perm]
    costs = rng.uniform(1.0, 100.0, size=n_cases)
    faults = (rng.random(n_cases) < fault_probability).astype(int)
    return TestSuite.from_records(costs, faults, [np.flatnonzero(row) for row in coverage])


def random_two_objective_suite(rng: np.random.Generator, n_cases: int) -> TestSuite:
    """CI-history-like data: log-normal execution times and mostly-low failure rates.

    Rates come from Beta(0.5, 2) rounded to whole percent; cases whose rate
    rounds to zero are redrawn so exactly ``n_cases`` failing tests remain.
    """
    times = rng.lognormal(mean=0.0, sigma=1.0, size=n_cases)
    rates = np.zeros(n_cases)
    todo = np.arange(n_cases)
    while len(todo):
        rates[todo] = np.round(rng.beta(0.5, 2.0, size=len(todo)), 2)
        todo = todo[rates[todo] == 0]
    names = [f"t{i}" for i in range(n_cases)]
    return TestSuite.from_records(times, failure_rates=rates, names=names)
