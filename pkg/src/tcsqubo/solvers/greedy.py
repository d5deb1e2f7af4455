"""Additional-greedy selection and prefix-archive extraction.

Each step picks the unselected test with the highest score::

    score_i = (new statements covered by i / |K| + e_i) / max(cost_i, 1e-9)

breaking ties by lower cost, then lower index. Gains are maintained
incrementally through the statement -> tests index, so a full run touches
every (test, statement) incidence once.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..errors import DimensionError, ValidationError
from ..pareto import SelectionSolution, nondominated
from ..qubo import ObjectiveVector3
from ..suite import NormalizedCosts, TestSuite

__all__ = ["EPSILON", "greedy_order", "additional_greedy", "extract_archive", "prefix_candidates"]

EPSILON = 1e-9


def greedy_order(
    suite: TestSuite,
    costs: NormalizedCosts,
    candidates: Sequence[int] | None = None,
    stop_without_gain: bool = True,
) -> list[int]:
    """Order ``candidates`` (default: every test) by repeated additional-greedy picks.

    With ``stop_without_gain`` the order ends once no remaining candidate adds
    coverage or an unselected fault-revealing test; otherwise zero-score
    candidates are appended by the same tie-break rule.
    """
    values = np.asarray(costs.values, dtype=float)
    pool = list(range(len(suite))) if candidates is None else sorted(set(int(i) for i in candidates))
    in_pool = np.zeros(len(suite), dtype=bool)
    in_pool[pool] = True
    universe = len(suite.statement_universe)

    gain = np.zeros(len(suite))
    for i in pool:
        gain[i] = len(suite.cases[i].covered_statements)
    faults = suite.fault_flags.astype(float)
    denominator = np.maximum(values, EPSILON)
    covered: set[int] = set()
    remaining = np.array(pool, dtype=np.int64)
    order: list[int] = []

    while len(remaining):
        coverage_term = gain[remaining] / universe if universe else np.zeros(len(remaining))
        score = (coverage_term + faults[remaining]) / denominator[remaining]
        best = score.max()
        if best <= 0 and stop_without_gain:
            break
        tied = remaining[score == best]
        pick = int(tied[np.lexsort((tied, values[tied]))[0]])
        order.append(pick)
        remaining = remaining[remaining != pick]
        for k in suite.cases[pick].covered_statements - covered:
            covered.add(k)
            for j in suite.coverage_index[k]:
                if in_pool[j]:
                    gain[j] -= 1
    return order


def prefix_candidates(suite: TestSuite, costs: NormalizedCosts, order: Sequence[int],
                      algorithm: str, run: int = 0) -> list[SelectionSolution]:
    """One solution per prefix of ``order`` (lengths 1..len(order))."""
    values = np.asarray(costs.values, dtype=float)
    x = np.zeros(len(suite), dtype=np.uint8)
    covered: set[int] = set()
    picked_costs: list[float] = []
    faults = 0
    out = []
    for i in order:
        x[i] = 1
        covered |= suite.cases[i].covered_statements
        picked_costs.append(values[i])
        faults += suite.cases[i].fault_flag
        # fsum is exactly rounded, so this matches evaluate_objectives3 regardless of order
        objectives = ObjectiveVector3(math.fsum(picked_costs), len(covered), faults)
        out.append(SelectionSolution.make(x.copy(), objectives, algorithm, run))
    return out


def additional_greedy(suite: TestSuite, costs: NormalizedCosts, algorithm: str = "greedy",
                      run: int = 0) -> list[SelectionSolution]:
    """Non-dominated cumulative suites produced by additional greedy."""
    if len(suite) == 0:
        raise ValidationError("additional greedy needs a non-empty suite")
    order = greedy_order(suite, costs)
    return nondominated(prefix_candidates(suite, costs, order, algorithm, run), collapse_duplicates=False)


def extract_archive(suite: TestSuite, costs: NormalizedCosts, best_assignment, algorithm: str = "selectqa",
                    run: int = 0) -> list[SelectionSolution]:
    """Turn one selection into a set of non-dominated sub-suites.

    The selected tests are ordered by the additional-greedy rule restricted to
    the selection; every prefix is a candidate and the non-dominated ones are
    returned.
    """
    x = np.asarray(best_assignment)
    if x.ndim != 1 or len(x) != len(suite):
        raise DimensionError(f"assignment of length {len(x)} for a suite of {len(suite)} cases")
    selected = np.flatnonzero(x)
    order = greedy_order(suite, costs, selected, stop_without_gain=False)
    return nondominated(prefix_candidates(suite, costs, order, algorithm, run), collapse_duplicates=False)

