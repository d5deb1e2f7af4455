from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np
import pytest

from tcsqubo.suite import TestSuite


def write_three_case_fixture(directory: Path) -> tuple[Path, Path, Path]:
    # statement 0 is covered by tests 0 and 1, statement 1 by tests 1 and 2
    cov, cost, fault = directory / "coverage.txt", directory / "costs.txt", directory / "faults.txt"
    cov.write_text("# test: statements\nt0: 0\nt1: 0 1\nt2: 1\n")
    cost.write_text("test_id,raw_cost\nt0,10\nt1,5\nt2,20\n")
    fault.write_text("t1,f3\nt1,f7\nt2,f3\n")
    return cov, cost, fault


@pytest.fixture
def three_case_files(tmp_path: Path) -> tuple[Path, Path, Path]:
    return write_three_case_fixture(tmp_path)


@pytest.fixture
def small_suite() -> TestSuite:
    return TestSuite.from_records([10.0, 5.0, 20.0], [0, 1, 1], [{0}, {0, 1}, {1}])


def all_assignments(n: int) -> np.ndarray:
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.uint8).reshape(-1, n)


def brute_penalty_energy(suite: TestSuite, costs, alpha: float, penalty: float, x) -> float:
    """Energy written directly as weighted objectives plus squared coverage violations."""
    x = np.asarray(x, dtype=float)
    c = np.asarray(costs.values)
    e = suite.fault_flags.astype(float)
    value = alpha * float(x @ c) - (1 - alpha) * float(x @ e)
    for members in suite.coverage_index.values():
        value += penalty * (sum(x[i] for i in members) - 1.0) ** 2
    return value


def has_exact_cover(suite: TestSuite) -> bool:
    n = len(suite)
    for x in all_assignments(n):
        if all(sum(int(x[i]) for i in members) == 1 for members in suite.coverage_index.values()):
            return True
    return False


ACCEPTANCE_RESULTS: list[str] = []


def record_criterion(name: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE_RESULTS.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
