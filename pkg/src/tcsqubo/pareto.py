"""Pareto dominance, frontiers and non-dominated counting.

Objective vectors are plain tuples (or :class:`ObjectiveVector3` /
:class:`ObjectiveVector2`) paired with per-dimension senses. Three-objective
vectors are ``(cost, statement coverage, fault coverage)`` with senses
``(min, max, max)``; two-objective ones are ``(cost, failure rate)`` with
``(min, max)``.

Real-valued components compare with an absolute tolerance of ``1e-9``;
integer counts differ by at least 1, so the tolerance never blurs them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from os import PathLike
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError, DimensionError, ValidationError
from .qubo import ObjectiveVector2, ObjectiveVector3

__all__ = [
    "MIN",
    "MAX",
    "SENSES3",
    "SENSES2",
    "TOLERANCE",
    "SelectionSolution",
    "ParetoArchive",
    "dominates",
    "same_vector",
    "nondominated",
    "reference_frontier",
    "count_nondominated",
    "format_frontier",
    "write_frontier",
    "read_frontier",
]

MIN, MAX = "min", "max"
SENSES3 = (MIN, MAX, MAX)
SENSES2 = (MIN, MAX)
TOLERANCE = 1e-9

Objectives = ObjectiveVector3 | ObjectiveVector2


def _as_tuple(v) -> tuple:
    if isinstance(v, (ObjectiveVector3, ObjectiveVector2)):
        return v.as_tuple()
    if isinstance(v, SelectionSolution):
        return v.vector
    return tuple(v)


def _default_senses(dim: int) -> tuple[str, ...]:
    if dim == 3:
        return SENSES3
    if dim == 2:
        return SENSES2
    raise DimensionError(f"no default senses for {dim}-dimensional vectors; pass senses explicitly")


@dataclass(frozen=True, eq=False)
class SelectionSolution:
    """A selected sub-suite, its objective vector, and who produced it.

    ``provenance`` is a sorted tuple of ``(algorithm, run)`` pairs; it holds
    more than one pair only after duplicate vectors are merged in a reference
    frontier.
    """

    assignment: np.ndarray
    objectives: Objectives
    provenance: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        x = np.array(self.assignment, dtype=np.uint8).reshape(-1)
        x.setflags(write=False)
        object.__setattr__(self, "assignment", x)
        object.__setattr__(self, "provenance", tuple(sorted({(str(a), int(r)) for a, r in self.provenance})))

    @classmethod
    def make(cls, assignment, objectives: Objectives, algorithm: str, run: int = 0) -> SelectionSolution:
        return cls(assignment, objectives, ((algorithm, run),))

    @property
    def vector(self) -> tuple:
        return self.objectives.as_tuple()

    @property
    def selected(self) -> np.ndarray:
        return np.flatnonzero(self.assignment)

    def _sort_key(self):
        return (self.provenance, self.assignment.tobytes())

    def __repr__(self):
        return f"SelectionSolution(selected={self.selected.tolist()}, objectives={self.vector}, provenance={self.provenance})"


@dataclass(frozen=True)
class ParetoArchive:
    members: tuple[SelectionSolution, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        dims = {len(m.vector) for m in self.members}
        if len(dims) > 1:
            raise DimensionError(f"archive mixes objective dimensions {sorted(dims)}")

    @classmethod
    def from_solutions(cls, solutions: Iterable[SelectionSolution]) -> ParetoArchive:
        """Keep the non-dominated solutions (duplicate vectors are all kept)."""
        return cls(tuple(nondominated(list(solutions), collapse_duplicates=False)))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @property
    def dimension(self) -> int | None:
        return len(self.members[0].vector) if self.members else None

    def vectors(self) -> list[tuple]:
        return [m.vector for m in self.members]

    def is_mutually_nondominated(self) -> bool:
        vs = self.vectors()
        return not any(dominates(a, b) for a in vs for b in vs)


def dominates(a, b, senses: Sequence[str] | None = None, tol: float = TOLERANCE) -> bool:
    """True iff ``a`` is no worse than ``b`` everywhere and strictly better somewhere."""
    a, b = _as_tuple(a), _as_tuple(b)
    if len(a) != len(b):
        raise DimensionError(f"cannot compare vectors of length {len(a)} and {len(b)}")
    if senses is None:
        senses = _default_senses(len(a))
    elif len(senses) != len(a):
        raise DimensionError(f"{len(senses)} senses for {len(a)}-dimensional vectors")
    strictly = False
    for x, y, sense in zip(a, b, senses):
        if sense == MIN:
            x, y = -x, -y
        elif sense != MAX:
            raise ValidationError(f"unknown sense {sense!r}")
        # now larger is better
        if x < y - tol:
            return False
        if x > y + tol:
            strictly = True
    return strictly


def same_vector(a, b, tol: float = TOLERANCE) -> bool:
    a, b = _as_tuple(a), _as_tuple(b)
    return len(a) == len(b) and all(abs(x - y) <= tol for x, y in zip(a, b))


def _minimizing_key(vector: tuple, senses: Sequence[str]) -> tuple:
    return tuple(v if s == MIN else -v for v, s in zip(vector, senses))


def nondominated(
    solutions: Sequence[SelectionSolution],
    senses: Sequence[str] | None = None,
    collapse_duplicates: bool = True,
) -> list[SelectionSolution]:
    """Non-dominated subset of ``solutions``, in ascending objective order.

    Works as an insertion archive over the solutions sorted by objective
    vector: a candidate is dropped if a kept member dominates it, and evicts
    kept members it dominates. With ``collapse_duplicates`` solutions sharing
    an objective vector merge into one member carrying every provenance; the
    representative assignment is chosen deterministically, so the result does
    not depend on input order.
    """
    if not solutions:
        return []
    dims = {len(s.vector) for s in solutions}
    if len(dims) > 1:
        raise DimensionError(f"solutions mix objective dimensions {sorted(dims)}")
    if senses is None:
        senses = _default_senses(dims.pop())
    ordered = sorted(solutions, key=lambda s: (_minimizing_key(s.vector, senses), s._sort_key()))

    kept: list[SelectionSolution] = []
    for cand in ordered:
        if any(dominates(k, cand, senses) for k in kept):
            continue
        kept = [k for k in kept if not dominates(cand, k, senses)]
        if collapse_duplicates:
            twin = next((i for i, k in enumerate(kept) if same_vector(k, cand)), None)
            if twin is not None:
                kept[twin] = _merge(kept[twin], cand)
                continue
        kept.append(cand)
    kept.sort(key=lambda s: (_minimizing_key(s.vector, senses), s._sort_key()))
    return kept


def _merge(a: SelectionSolution, b: SelectionSolution) -> SelectionSolution:
    rep = min(a, b, key=lambda s: (s.assignment.tobytes(), s.provenance, s.vector))
    return SelectionSolution(rep.assignment, rep.objectives, a.provenance + b.provenance)


def reference_frontier(frontiers: Sequence[ParetoArchive]) -> ParetoArchive:
    """Non-dominated filter of the union of all given frontiers."""
    dims = {a.dimension for a in frontiers if a.dimension is not None}
    if len(dims) > 1:
        raise DimensionError(f"frontiers mix objective dimensions {sorted(dims)}")
    union = [m for archive in frontiers for m in archive.members]
    return ParetoArchive(tuple(nondominated(union, collapse_duplicates=True)))


def count_nondominated(run_frontier: ParetoArchive, reference: ParetoArchive, tol: float = TOLERANCE) -> int:
    """Number of ``run_frontier`` members whose objective vector is on ``reference``."""
    if not len(run_frontier) or not len(reference):
        return 0
    ref = np.array(reference.vectors(), dtype=float)
    count = 0
    for v in run_frontier.vectors():
        if np.any(np.all(np.abs(ref - np.asarray(v, dtype=float)) <= tol, axis=1)):
            count += 1
    return count


# ---------------------------------------------------------------------------
# Frontier files: "<algorithm> <run> <objective...>"
# Merged members list their provenances as comma-separated parallel fields.
# ---------------------------------------------------------------------------

def _format_value(v) -> str:
    return str(v) if isinstance(v, (int, np.integer)) else repr(float(v))


def format_frontier(members: Iterable[SelectionSolution]) -> str:
    lines = []
    for m in members:
        algorithms = ",".join(a for a, _ in m.provenance) or "-"
        runs = ",".join(str(r) for _, r in m.provenance) or "-"
        lines.append(" ".join([algorithms, runs] + [_format_value(v) for v in m.vector]))
    return "".join(line + "\n" for line in lines)


def write_frontier(path: str | PathLike, members: Iterable[SelectionSolution]) -> None:
    Path(path).write_text(format_frontier(members))


def read_frontier(path: str | PathLike) -> list[SelectionSolution]:
    """Read a frontier file back as solutions (assignments are not stored, so they are empty)."""
    path = Path(path)
    out = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        tokens = line.split()
        if not tokens or tokens[0].startswith("#"):
            continue
        if len(tokens) not in (4, 5):
            raise DataError("expected '<algorithm> <run> <objectives...>'", path, lineno)
        algorithms = tokens[0].split(",")
        try:
            runs = [int(r) for r in tokens[1].split(",")]
            if len(tokens) == 5:
                objectives = ObjectiveVector3(float(tokens[2]), int(tokens[3]), int(tokens[4]))
            else:
                objectives = ObjectiveVector2(float(tokens[2]), float(tokens[3]))
        except ValueError as exc:
            raise DataError(str(exc), path, lineno) from None
        if len(runs) != len(algorithms):
            raise DataError("algorithm and run lists differ in length", path, lineno)
        out.append(SelectionSolution(np.zeros(0, dtype=np.uint8), objectives, tuple(zip(algorithms, runs))))
    return out
