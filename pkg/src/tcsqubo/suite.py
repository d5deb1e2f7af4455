"""Test-suite domain types, dataset ingestion and cost normalization.

Two on-disk layouts are supported.

Three-objective (coverage / cost / fault history)::

    coverage.txt   <test_id>: <s1> <s2> ...      one line per test case
    costs.csv      <test_id>,<raw_cost>
    faults.csv     <test_id>,<fault_id>          e_i = 1 iff the test appears

Two-objective (execution time / failure rate)::

    id,time,rate[,rate_unit=percent|fraction]
    t1,12.5,0.25
    ...

Test ids are opaque labels kept as ``TestCase.name``; ``TestCase.id`` is the
0-based position of the case in the suite.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from os import PathLike
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConsistencyError, DataError, ValidationError

__all__ = [
    "TestCase",
    "TestSuite",
    "NormalizationMode",
    "NormalizedCosts",
    "normalize_costs",
    "load_three_objective_dataset",
    "load_two_objective_dataset",
    "write_three_objective_dataset",
    "write_two_objective_dataset",
]

StrPath = str | PathLike


@dataclass(frozen=True)
class TestCase:
    """A single test case.

    ``failure_rate`` is ``None`` for three-objective data, which carries a
    binary fault flag instead.
    """

    __test__ = False  # keep pytest from collecting this class

    id: int
    name: str
    raw_cost: float
    fault_flag: int = 0
    failure_rate: float | None = None
    covered_statements: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.id < 0:
            raise ValidationError(f"test index must be >= 0, got {self.id}")
        if not math.isfinite(self.raw_cost) or self.raw_cost < 0:
            raise ValidationError(f"test {self.name!r}: raw cost must be finite and >= 0, got {self.raw_cost}")
        if self.fault_flag not in (0, 1):
            raise ValidationError(f"test {self.name!r}: fault flag must be 0 or 1, got {self.fault_flag}")
        if self.failure_rate is not None and not 0.0 <= self.failure_rate <= 1.0:
            raise ValidationError(f"test {self.name!r}: failure rate must lie in [0, 1], got {self.failure_rate}")
        if not isinstance(self.covered_statements, frozenset):
            object.__setattr__(self, "covered_statements", frozenset(self.covered_statements))


@dataclass(frozen=True)
class TestSuite:
    """An ordered, immutable collection of test cases.

    ``statement_universe`` holds every statement covered by at least one case,
    and ``coverage_index[k]`` lists (ascending) the indices of cases covering
    statement ``k``.
    """

    __test__ = False

    cases: tuple[TestCase, ...]
    statement_universe: frozenset[int] = field(init=False, repr=False)
    coverage_index: dict[int, tuple[int, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        cases = tuple(self.cases)
        for position, case in enumerate(cases):
            if case.id != position:
                raise ValidationError(f"case at position {position} has index {case.id}")
        index: dict[int, list[int]] = {}
        for case in cases:
            for k in case.covered_statements:
                index.setdefault(k, []).append(case.id)
        object.__setattr__(self, "cases", cases)
        object.__setattr__(self, "statement_universe", frozenset(index))
        object.__setattr__(self, "coverage_index", {k: tuple(index[k]) for k in sorted(index)})

    @classmethod
    def from_records(
        cls,
        raw_costs: Sequence[float],
        fault_flags: Sequence[int] | None = None,
        coverage: Sequence[Iterable[int]] | None = None,
        failure_rates: Sequence[float] | None = None,
        names: Sequence[str] | None = None,
    ) -> TestSuite:
        """Build a suite from parallel per-case sequences."""
        n = len(raw_costs)
        for label, seq in (("fault_flags", fault_flags), ("coverage", coverage),
                           ("failure_rates", failure_rates), ("names", names)):
            if seq is not None and len(seq) != n:
                raise ValidationError(f"{label} has length {len(seq)}, expected {n}")
        cases = []
        for i in range(n):
            rate = None if failure_rates is None else float(failure_rates[i])
            if fault_flags is not None:
                flag = int(fault_flags[i])
            else:
                flag = int(rate is not None and rate > 0)
            cases.append(TestCase(
                id=i,
                name=str(i) if names is None else str(names[i]),
                raw_cost=float(raw_costs[i]),
                fault_flag=flag,
                failure_rate=rate,
                covered_statements=frozenset(int(k) for k in coverage[i]) if coverage is not None else frozenset(),
            ))
        return cls(tuple(cases))

    def __len__(self) -> int:
        return len(self.cases)

    def __iter__(self):
        return iter(self.cases)

    def __getitem__(self, i: int) -> TestCase:
        return self.cases[i]

    @property
    def raw_costs(self) -> np.ndarray:
        return np.array([c.raw_cost for c in self.cases], dtype=float)

    @property
    def fault_flags(self) -> np.ndarray:
        return np.array([c.fault_flag for c in self.cases], dtype=np.int64)

    @property
    def has_failure_rates(self) -> bool:
        return all(c.failure_rate is not None for c in self.cases)

    @property
    def failure_rates(self) -> np.ndarray:
        if not self.has_failure_rates:
            raise ValidationError("suite has no failure rates (three-objective data?)")
        return np.array([c.failure_rate for c in self.cases], dtype=float)

    def subset(self, indices: Sequence[int]) -> TestSuite:
        """Return a new suite of the given cases, re-indexed from 0 in the given order."""
        picked = []
        for new_id, i in enumerate(indices):
            c = self.cases[i]
            picked.append(TestCase(new_id, c.name, c.raw_cost, c.fault_flag, c.failure_rate, c.covered_statements))
        return TestSuite(tuple(picked))


class NormalizationMode(enum.Enum):
    MAX_DIVIDE = "max-divide"


@dataclass(frozen=True)
class NormalizedCosts:
    values: np.ndarray
    mode: NormalizationMode = NormalizationMode.MAX_DIVIDE

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __eq__(self, other):
        if not isinstance(other, NormalizedCosts):
            return NotImplemented
        return self.mode == other.mode and np.array_equal(self.values, other.values)

    __hash__ = None


def normalize_costs(suite: TestSuite) -> NormalizedCosts:
    """Divide every raw cost by the largest one.

    An all-zero suite maps to all-zero costs rather than failing.
    """
    if len(suite) == 0:
        raise ValidationError("cannot normalize the costs of an empty suite")
    raw = suite.raw_costs
    top = raw.max()
    if top == 0:
        return NormalizedCosts(np.zeros_like(raw))
    return NormalizedCosts(raw / top)


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------

def _data_lines(path: Path):
    """Yield (line_number, stripped_text) for non-blank, non-comment lines."""
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read file: {exc.strerror}", path) from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            yield lineno, stripped


def _parse_coverage(path: Path) -> dict[str, frozenset[int]]:
    coverage: dict[str, frozenset[int]] = {}
    for lineno, line in _data_lines(path):
        name, sep, rest = line.partition(":")
        name = name.strip()
        if not sep or not name:
            raise DataError("expected '<test_id>: <statements...>'", path, lineno)
        if name in coverage:
            raise DataError(f"duplicate test id {name!r}", path, lineno)
        try:
            statements = frozenset(int(tok) for tok in rest.split())
        except ValueError as exc:
            raise DataError(f"statement ids must be integers ({exc})", path, lineno) from None
        coverage[name] = statements
    return coverage


def _pairs(path: Path, header: str):
    """Yield (line_number, first, second) from a two-column comma-separated file."""
    first_line = True
    for lineno, line in _data_lines(path):
        if first_line and line.replace(" ", "").lower() == header:
            first_line = False
            continue
        first_line = False
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 2 or not fields[0] or not fields[1]:
            raise DataError("expected two comma-separated fields", path, lineno)
        yield lineno, fields[0], fields[1]


def load_three_objective_dataset(coverage_path: StrPath, cost_path: StrPath, fault_path: StrPath) -> TestSuite:
    """Load a coverage/cost/fault triple into a :class:`TestSuite`.

    The coverage file fixes the case order. Every case must have exactly one
    cost; ids in the cost or fault file that the coverage file does not know
    raise :class:`ConsistencyError`.
    """
    coverage_path, cost_path, fault_path = Path(coverage_path), Path(cost_path), Path(fault_path)
    coverage = _parse_coverage(coverage_path)

    costs: dict[str, float] = {}
    for lineno, name, value in _pairs(cost_path, "test_id,raw_cost"):
        if name not in coverage:
            raise ConsistencyError(f"unknown test id {name!r}", cost_path, lineno)
        if name in costs:
            raise DataError(f"duplicate cost for test id {name!r}", cost_path, lineno)
        try:
            cost = float(value)
        except ValueError:
            raise DataError(f"cost {value!r} is not a number", cost_path, lineno) from None
        if not math.isfinite(cost) or cost < 0:
            raise DataError(f"cost must be finite and >= 0, got {value}", cost_path, lineno)
        costs[name] = cost
    missing = [name for name in coverage if name not in costs]
    if missing:
        shown = ", ".join(missing[:5]) + (" ..." if len(missing) > 5 else "")
        raise ConsistencyError(f"{len(missing)} test id(s) have no cost: {shown}", cost_path)

    faulty: set[str] = set()
    for lineno, name, _fault in _pairs(fault_path, "test_id,fault_id"):
        if name not in coverage:
            raise ConsistencyError(f"unknown test id {name!r}", fault_path, lineno)
        faulty.add(name)

    cases = tuple(
        TestCase(id=i, name=name, raw_cost=costs[name], fault_flag=int(name in faulty),
                 covered_statements=statements)
        for i, (name, statements) in enumerate(coverage.items())
    )
    return TestSuite(cases)


def load_two_objective_dataset(csv_path: StrPath, drop_zero_rate: bool = True) -> TestSuite:
    """Load an ``id,time,rate`` table.

    Rates are read as fractions unless the header carries
    ``rate_unit=percent``. With ``drop_zero_rate`` the cases that never failed
    are removed before indexing.
    """
    path = Path(csv_path)
    try:
        handle = path.open(newline="")
    except OSError as exc:
        raise DataError(f"cannot read file: {exc.strerror}", path) from exc
    with handle:
        rows = [(n, row) for n, row in enumerate(csv.reader(handle), start=1)
                if row and any(cell.strip() for cell in row) and not row[0].lstrip().startswith("#")]
    if not rows:
        raise DataError("missing header 'id,time,rate'", path)

    header_line, header = rows[0]
    header = [h.strip().lower() for h in header]
    if header[:3] != ["id", "time", "rate"] or len(header) > 4:
        raise DataError("header must be 'id,time,rate[,rate_unit=percent|fraction]'", path, header_line)
    unit = "fraction"
    if len(header) == 4:
        key, _, value = header[3].partition("=")
        if key != "rate_unit" or value not in ("percent", "fraction"):
            raise DataError(f"bad header field {header[3]!r}", path, header_line)
        unit = value
    scale, upper = (100.0, 100.0) if unit == "percent" else (1.0, 1.0)

    names, times, rates = [], [], []
    seen = set()
    for lineno, row in rows[1:]:
        fields = [f.strip() for f in row]
        if len(fields) != 3 or not fields[0]:
            raise DataError("expected 3 fields: id,time,rate", path, lineno)
        name = fields[0]
        if name in seen:
            raise DataError(f"duplicate test id {name!r}", path, lineno)
        seen.add(name)
        try:
            time, rate = float(fields[1]), float(fields[2])
        except ValueError:
            raise DataError("time and rate must be numbers", path, lineno) from None
        if not math.isfinite(time) or time < 0:
            raise ValidationError(f"{path}:{lineno}: negative or non-finite time {fields[1]}")
        if not 0.0 <= rate <= upper:
            raise ValidationError(f"{path}:{lineno}: rate {fields[2]} outside [0, {upper:g}] ({unit})")
        if drop_zero_rate and rate == 0:
            continue
        names.append(name)
        times.append(time)
        rates.append(rate / scale)
    return TestSuite.from_records(times, failure_rates=rates, names=names)


def write_three_objective_dataset(suite: TestSuite, coverage_path: StrPath, cost_path: StrPath,
                                  fault_path: StrPath) -> None:
    """Write ``suite`` in the layout read by :func:`load_three_objective_dataset`."""
    with open(coverage_path, "w") as cov, open(cost_path, "w") as cst, open(fault_path, "w") as flt:
        for case in suite:
            statements = " ".join(str(k) for k in sorted(case.covered_statements))
            cov.write(f"{case.name}: {statements}\n" if statements else f"{case.name}:\n")
            cst.write(f"{case.name},{case.raw_cost!r}\n")
            if case.fault_flag:
                flt.write(f"{case.name},1\n")


def write_two_objective_dataset(suite: TestSuite, csv_path: StrPath, rate_unit: str = "fraction") -> None:
    if rate_unit not in ("percent", "fraction"):
        raise ValidationError(f"rate_unit must be 'percent' or 'fraction', got {rate_unit!r}")
    scale = 100.0 if rate_unit == "percent" else 1.0
    rates = suite.failure_rates
    with open(csv_path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["id", "time", "rate", f"rate_unit={rate_unit}"])
        for case, rate in zip(suite, rates):
            writer.writerow([case.name, repr(case.raw_cost), repr(float(rate * scale))])
