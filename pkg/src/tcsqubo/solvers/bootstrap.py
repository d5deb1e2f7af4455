"""Bootstrap decomposition: solve many small sampled sub-suites and merge by union."""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from ..pareto import SelectionSolution
from ..qubo import DEFAULT_ALPHA, build_two_objective_qubo, evaluate_objectives2
from ..suite import NormalizedCosts, TestSuite
from ._seeding import MASK64, derive_seed, seed_sequence
from .anneal import AnnealConfig, solve_sa

__all__ = ["BootstrapConfig", "BootstrapResult", "sample_subsets", "bootstrap_solve"]


@dataclass(frozen=True)
class BootstrapConfig:
    n: int = 20
    m: int = 10
    beta_coverage: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"sub-suite size n must be >= 1, got {self.n}")
        if self.m < 1:
            raise ValidationError(f"number of sub-suites m must be >= 1, got {self.m}")
        if not 0.0 < self.beta_coverage <= 1.0:
            raise ValidationError(f"beta_coverage must lie in (0, 1], got {self.beta_coverage}")
        object.__setattr__(self, "seed", int(self.seed) & MASK64)


@dataclass(frozen=True, eq=False)
class BootstrapResult:
    solution: SelectionSolution
    subsets: tuple[np.ndarray, ...]
    sub_selections: tuple[np.ndarray, ...]
    coverage: float
    target_coverage: float

    @property
    def meets_target(self) -> bool:
        return self.coverage >= self.target_coverage


def sample_subsets(size: int, config: BootstrapConfig) -> list[np.ndarray]:
    """``m`` sorted index sets of ``n`` distinct cases; a case may recur across sets."""
    if config.n > size:
        raise ValidationError(f"sub-suite size n={config.n} exceeds the suite size {size}")
    rng = np.random.Generator(np.random.PCG64(seed_sequence(config.seed, 0)))
    return [np.sort(rng.choice(size, size=config.n, replace=False)) for _ in range(config.m)]


def bootstrap_solve(
    suite: TestSuite,
    costs: NormalizedCosts,
    alpha: float = DEFAULT_ALPHA,
    bconfig: BootstrapConfig | None = None,
    aconfig: AnnealConfig | None = None,
    workers: int = 1,
    algorithm: str = "bootqa",
    run: int = 0,
) -> BootstrapResult:
    """Solve ``m`` sampled two-objective sub-problems and merge their selections.

    Sub-problems keep the suite-wide normalized costs and the global ``alpha``.
    A test is selected in the result iff some sub-problem selected it. A
    coverage shortfall against ``beta_coverage`` is reported, not corrected.
    """
    bconfig = bconfig or BootstrapConfig()
    aconfig = aconfig or AnnealConfig()
    if not suite.has_failure_rates:
        raise ValidationError("bootstrap decomposition needs two-objective data (failure rates)")
    subsets = sample_subsets(len(suite), bconfig)
    values = np.asarray(costs.values, dtype=float)

    def solve_one(index: int) -> np.ndarray:
        idx = subsets[index]
        model = build_two_objective_qubo(suite.subset(idx), NormalizedCosts(values[idx]), alpha)
        sub_config = dataclasses.replace(aconfig, seed=derive_seed(aconfig.seed, index))
        best = solve_sa(model, sub_config).first.assignment
        return idx[best.astype(bool)]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chosen = list(pool.map(solve_one, range(len(subsets))))
    else:
        chosen = [solve_one(i) for i in range(len(subsets))]

    merged = np.zeros(len(suite), dtype=np.uint8)
    for picked in chosen:
        merged[picked] = 1
    sampled = np.unique(np.concatenate(subsets))
    solution = SelectionSolution.make(merged, evaluate_objectives2(suite, costs, merged), algorithm, run)
    return BootstrapResult(
        solution=solution,
        subsets=tuple(subsets),
        sub_selections=tuple(chosen),
        coverage=len(sampled) / len(suite),
        target_coverage=bconfig.beta_coverage,
    )
