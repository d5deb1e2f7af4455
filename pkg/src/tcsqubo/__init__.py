"""QUBO formulation and solvers for regression test case selection."""

from .errors import CapacityError, ConsistencyError, DataError, DimensionError, SelectionError, ValidationError
from .pareto import (
    ParetoArchive,
    SelectionSolution,
    count_nondominated,
    dominates,
    nondominated,
    reference_frontier,
)
from .qubo import (
    DEFAULT_ALPHA,
    ObjectiveVector2,
    ObjectiveVector3,
    QuboModel,
    build_three_objective_qubo,
    build_two_objective_qubo,
    energies,
    energy,
    evaluate_objectives2,
    evaluate_objectives3,
    penalty_upper_bound,
)
from .solvers import (
    AnnealConfig,
    BootstrapConfig,
    BootstrapResult,
    SampleSet,
    additional_greedy,
    bootstrap_solve,
    extract_archive,
    solve_exact,
    solve_sa,
)
from .stats import classify_magnitude, mann_whitney_u, vargha_delaney_a12
from .suite import (
    NormalizedCosts,
    TestCase,
    TestSuite,
    load_three_objective_dataset,
    load_two_objective_dataset,
    normalize_costs,
)

__version__ = "0.1.0"
