"""QUBO construction for test case selection and energy evaluation.

Three-objective model (cost, fault history, statement coverage)::

    H(x) = a * sum_i cost_i x_i - (1 - a) * sum_i e_i x_i
           + P * sum_k (sum_{i in T_k} x_i - 1)^2

Expanding the square under ``x_i^2 = x_i`` gives, per statement ``k``,
``-P`` on the linear term of every member of ``T_k``, ``+2P`` on every
unordered pair inside ``T_k`` and a constant ``+P``. The constant is kept in
``QuboModel.offset`` so that energies equal the unexpanded form exactly.

Two-objective model (cost, failure rate)::

    H(x) = a * sum_i cost_i x_i - (1 - a) * sum_i f_i x_i
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from os import PathLike
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError, DimensionError, ValidationError
from .suite import NormalizedCosts, TestSuite

__all__ = [
    "DEFAULT_ALPHA",
    "QuboModel",
    "ObjectiveVector3",
    "ObjectiveVector2",
    "build_three_objective_qubo",
    "build_two_objective_qubo",
    "penalty_upper_bound",
    "energy",
    "energies",
    "evaluate_objectives3",
    "evaluate_objectives2",
    "dump_qubo",
    "load_qubo",
]

DEFAULT_ALPHA = 0.5


@dataclass(frozen=True, eq=False)
class QuboModel:
    """Binary quadratic model ``offset + sum lin_i x_i + sum_{i<j} q_ij x_i x_j``.

    ``linear`` is dense (one coefficient per variable); ``quadratic`` is keyed
    by ``(i, j)`` with ``i < j``.
    """

    num_vars: int
    linear: np.ndarray
    quadratic: Mapping[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0
    alpha: float = DEFAULT_ALPHA
    penalty: float = 0.0

    def __post_init__(self):
        linear = np.array(self.linear, dtype=float).reshape(-1)
        if linear.shape[0] != self.num_vars:
            raise DimensionError(f"linear has {linear.shape[0]} entries, expected {self.num_vars}")
        linear.setflags(write=False)
        object.__setattr__(self, "linear", linear)
        quadratic = {}
        for (i, j), v in self.quadratic.items():
            i, j = int(i), int(j)
            if i == j:
                raise ValidationError(f"diagonal quadratic term ({i}, {j}); fold it into the linear part")
            if i > j:
                i, j = j, i
            if not 0 <= i < j < self.num_vars:
                raise DimensionError(f"quadratic term ({i}, {j}) out of range for {self.num_vars} variables")
            quadratic[(i, j)] = quadratic.get((i, j), 0.0) + float(v)
        object.__setattr__(self, "quadratic", quadratic)
        object.__setattr__(self, "offset", float(self.offset))

    def __eq__(self, other):
        if not isinstance(other, QuboModel):
            return NotImplemented
        return (self.num_vars == other.num_vars and np.array_equal(self.linear, other.linear)
                and self.quadratic == other.quadratic and self.offset == other.offset
                and self.alpha == other.alpha and self.penalty == other.penalty)

    @cached_property
    def _quad_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        keys = sorted(self.quadratic)
        rows = np.array([k[0] for k in keys], dtype=np.int64)
        cols = np.array([k[1] for k in keys], dtype=np.int64)
        vals = np.array([self.quadratic[k] for k in keys], dtype=float)
        return rows, cols, vals

    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Symmetric CSR neighbour structure ``(indptr, indices, weights)``."""
        rows, cols, vals = self._quad_arrays
        src = np.concatenate([rows, cols])
        dst = np.concatenate([cols, rows])
        w = np.concatenate([vals, vals])
        order = np.lexsort((dst, src))
        src, dst, w = src[order], dst[order], w[order]
        indptr = np.zeros(self.num_vars + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, dst.astype(np.int64), w

    def to_upper_matrix(self) -> np.ndarray:
        """Dense upper-triangular matrix with the linear part on the diagonal."""
        q = np.diag(self.linear).astype(float)
        rows, cols, vals = self._quad_arrays
        q[rows, cols] = vals
        return q


@dataclass(frozen=True)
class ObjectiveVector3:
    total_cost: float
    statement_coverage: int
    fault_coverage: int

    def as_tuple(self) -> tuple[float, int, int]:
        return (self.total_cost, self.statement_coverage, self.fault_coverage)


@dataclass(frozen=True)
class ObjectiveVector2:
    total_cost: float
    total_failure_rate: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.total_cost, self.total_failure_rate)


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie strictly between 0 and 1, got {alpha}")


def _check_costs(suite: TestSuite, costs: NormalizedCosts) -> np.ndarray:
    values = np.asarray(costs.values if isinstance(costs, NormalizedCosts) else costs, dtype=float)
    if values.shape != (len(suite),):
        raise DimensionError(f"{values.shape[0]} costs for a suite of {len(suite)} cases")
    return values


def penalty_upper_bound(suite: TestSuite, costs: NormalizedCosts, alpha: float = DEFAULT_ALPHA) -> float:
    """Penalty weight just above the largest magnitude the objective part can reach.

    The cost term is at most ``alpha * sum(cost)`` and the fault term at most
    ``(1 - alpha) * sum(e)`` in magnitude, so one coverage violation always
    outweighs any objective gain.
    """
    values = _check_costs(suite, costs)
    return float(alpha * values.sum() + (1.0 - alpha) * suite.fault_flags.sum() + 1.0)


def build_three_objective_qubo(
    suite: TestSuite,
    costs: NormalizedCosts,
    alpha: float = DEFAULT_ALPHA,
    penalty: float | None = None,
) -> QuboModel:
    _check_alpha(alpha)
    values = _check_costs(suite, costs)
    if penalty is None:
        penalty = penalty_upper_bound(suite, costs, alpha)
    elif not penalty > 0:
        raise ValidationError(f"penalty must be > 0, got {penalty}")
    penalty = float(penalty)

    # shared[i, j] = number of statements covered by both i and j
    shared = _shared_statement_counts(suite)
    multiplicity = np.diag(shared)
    linear = alpha * values - (1.0 - alpha) * suite.fault_flags - penalty * multiplicity
    rows, cols = np.nonzero(np.triu(shared, k=1))
    quadratic = {(int(i), int(j)): 2.0 * penalty * float(shared[i, j]) for i, j in zip(rows, cols)}
    offset = penalty * len(suite.statement_universe)
    return QuboModel(len(suite), linear, quadratic, offset, alpha, penalty)


def _shared_statement_counts(suite: TestSuite, chunk: int = 4096) -> np.ndarray:
    n = len(suite)
    shared = np.zeros((n, n))
    statements = sorted(suite.statement_universe)
    for start in range(0, len(statements), chunk):
        block = statements[start:start + chunk]
        incidence = np.zeros((n, len(block)))
        for col, k in enumerate(block):
            incidence[list(suite.coverage_index[k]), col] = 1.0
        shared += incidence @ incidence.T
    return shared


def build_two_objective_qubo(suite: TestSuite, costs: NormalizedCosts, alpha: float = DEFAULT_ALPHA) -> QuboModel:
    _check_alpha(alpha)
    values = _check_costs(suite, costs)
    linear = alpha * values - (1.0 - alpha) * suite.failure_rates
    return QuboModel(len(suite), linear, {}, 0.0, alpha, 0.0)


def energies(model: QuboModel, assignments) -> np.ndarray:
    """Energies of a batch of assignments (one per row)."""
    x = np.asarray(assignments, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.num_vars:
        raise DimensionError(f"assignments of shape {x.shape} do not match {model.num_vars} variables")
    out = model.offset + x @ model.linear
    rows, cols, vals = model._quad_arrays
    if len(vals):
        out = out + (x[:, rows] * x[:, cols]) @ vals
    return out


def energy(model: QuboModel, assignment) -> float:
    x = np.asarray(assignment)
    if x.ndim != 1 or x.shape[0] != model.num_vars:
        raise DimensionError(f"assignment of length {x.shape[0] if x.ndim == 1 else x.shape} "
                             f"for a model with {model.num_vars} variables")
    return float(energies(model, x[None, :])[0])


def _selected(suite: TestSuite, assignment) -> np.ndarray:
    x = np.asarray(assignment)
    if x.ndim != 1 or x.shape[0] != len(suite):
        raise DimensionError(f"assignment of length {len(x)} for a suite of {len(suite)} cases")
    return np.flatnonzero(x)


def evaluate_objectives3(suite: TestSuite, costs: NormalizedCosts, assignment) -> ObjectiveVector3:
    values = _check_costs(suite, costs)
    chosen = _selected(suite, assignment)
    covered: set[int] = set()
    for i in chosen:
        covered |= suite.cases[i].covered_statements
    return ObjectiveVector3(
        total_cost=math.fsum(values[chosen]),
        statement_coverage=len(covered),
        fault_coverage=int(suite.fault_flags[chosen].sum()),
    )


def evaluate_objectives2(suite: TestSuite, costs: NormalizedCosts, assignment) -> ObjectiveVector2:
    values = _check_costs(suite, costs)
    chosen = _selected(suite, assignment)
    return ObjectiveVector2(
        total_cost=math.fsum(values[chosen]),
        total_failure_rate=math.fsum(suite.failure_rates[chosen]),
    )


# ---------------------------------------------------------------------------
# Text interchange: "offset <v>", "lin <i> <v>", "quad <i> <j> <v>"
# ---------------------------------------------------------------------------

def dump_qubo(model: QuboModel, path: str | PathLike) -> None:
    lines = [f"# alpha {model.alpha!r}", f"# penalty {model.penalty!r}", f"offset {model.offset!r}"]
    lines += [f"lin {i} {float(v)!r}" for i, v in enumerate(model.linear)]
    lines += [f"quad {i} {j} {v!r}" for (i, j), v in sorted(model.quadratic.items())]
    Path(path).write_text("\n".join(lines) + "\n")


def load_qubo(path: str | PathLike) -> QuboModel:
    path = Path(path)
    offset, alpha, penalty = 0.0, DEFAULT_ALPHA, 0.0
    linear: dict[int, float] = {}
    quadratic: dict[tuple[int, int], float] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        tokens = raw.split()
        if not tokens:
            continue
        try:
            if tokens[0] == "#":
                if len(tokens) == 3 and tokens[1] == "alpha":
                    alpha = float(tokens[2])
                elif len(tokens) == 3 and tokens[1] == "penalty":
                    penalty = float(tokens[2])
            elif tokens[0] == "offset" and len(tokens) == 2:
                offset = float(tokens[1])
            elif tokens[0] == "lin" and len(tokens) == 3:
                i = int(tokens[1])
                linear[i] = linear.get(i, 0.0) + float(tokens[2])
            elif tokens[0] == "quad" and len(tokens) == 4:
                i, j = int(tokens[1]), int(tokens[2])
                if i == j:
                    linear[i] = linear.get(i, 0.0) + float(tokens[3])
                else:
                    key = (min(i, j), max(i, j))
                    quadratic[key] = quadratic.get(key, 0.0) + float(tokens[3])
            elif not tokens[0].startswith("#"):
                raise ValueError(f"unknown record {tokens[0]!r}")
        except ValueError as exc:
            raise DataError(str(exc), path, lineno) from None
    indices = list(linear) + [i for key in quadratic for i in key]
    if any(i < 0 for i in indices):
        raise DataError("negative variable index", path)
    num_vars = max(indices) + 1 if indices else 0
    lin = np.zeros(num_vars)
    for i, v in linear.items():
        lin[i] = v
    return QuboModel(num_vars, lin, quadratic, offset, alpha, penalty)
