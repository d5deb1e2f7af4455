"""Batch runner: N seeded runs per algorithm, frontier assembly, counting and statistics.

Output files (all deterministic for a fixed configuration and inputs):

``meta.txt``       resolved configuration, one ``key=value`` per line
``solutions.txt``  ``<algorithm> <run> <energy|-> <objectives...> <selected ids>``
``frontier.txt``   per-run frontier members, ``<algorithm> <run> <objectives...>``
``reference.txt``  reference frontier (merged provenances comma-separated)
``counts.txt``     ``<algorithm> <run> <candidates> <frontier size> <on reference>``
``stats.txt``      ``<hypothesis>,<p_value>,<a12>,<magnitude>``

Wall-clock seconds per run go to ``timing.txt``, which is the one file that
varies between executions.
"""

from __future__ import annotations

import enum
import itertools
import logging
import shutil
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SelectionError, ValidationError
from .pareto import ParetoArchive, SelectionSolution, count_nondominated, nondominated, reference_frontier, write_frontier
from .qubo import (
    DEFAULT_ALPHA,
    QuboModel,
    build_three_objective_qubo,
    build_two_objective_qubo,
    evaluate_objectives2,
    evaluate_objectives3,
)
from .solvers import (
    MAX_EXACT_VARS,
    AnnealConfig,
    BootstrapConfig,
    bootstrap_solve,
    greedy_order,
    prefix_candidates,
    solve_exact,
    solve_sa,
)
from .stats import StatReport, directional_report, write_report
from .suite import (
    NormalizedCosts,
    TestSuite,
    load_three_objective_dataset,
    load_two_objective_dataset,
    normalize_costs,
)

__all__ = ["Mode", "ALGORITHMS", "ExperimentConfig", "RunRecord", "ExperimentReport", "ExperimentError",
           "run_experiment", "write_outputs"]

log = logging.getLogger(__name__)

ALGORITHMS = ("selectqa", "greedy", "bootqa", "exact")
OUTPUT_FILES = ("meta.txt", "solutions.txt", "frontier.txt", "reference.txt", "counts.txt", "stats.txt")


class Mode(str, enum.Enum):
    THREE = "three"
    TWO = "two"


class ExperimentError(SelectionError):
    """A module error raised inside one algorithm run."""

    def __init__(self, algorithm: str, run: int, cause: Exception):
        self.algorithm, self.run, self.cause = algorithm, run, cause
        super().__init__(f"{algorithm} run {run}: {cause}")


@dataclass(frozen=True)
class ExperimentConfig:
    mode: Mode
    algorithms: tuple[str, ...]
    coverage: Path | None = None
    costs: Path | None = None
    faults: Path | None = None
    dataset: Path | None = None
    drop_zero_rate: bool = True
    runs: int = 10
    alpha: float = DEFAULT_ALPHA
    penalty: float | None = None
    anneal: AnnealConfig = field(default_factory=AnnealConfig)
    bootstrap: BootstrapConfig = field(default_factory=BootstrapConfig)
    seed: int = 0
    out_dir: Path | None = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if not self.algorithms:
            raise ValidationError("no algorithms selected")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ValidationError(f"unknown algorithm(s) {unknown}; choose from {list(ALGORITHMS)}")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ValidationError("algorithms listed more than once")
        if self.runs < 1:
            raise ValidationError(f"runs must be >= 1, got {self.runs}")
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError(f"alpha must lie strictly between 0 and 1, got {self.alpha}")
        if self.penalty is not None and not self.penalty > 0:
            raise ValidationError(f"penalty must be > 0, got {self.penalty}")
        if self.workers < 1:
            raise ValidationError(f"workers must be >= 1, got {self.workers}")
        if self.mode is Mode.THREE:
            if "bootqa" in self.algorithms:
                raise ValidationError("bootqa compares two-objective data only")
            if None in (self.coverage, self.costs, self.faults):
                raise ValidationError("three-objective mode needs --coverage, --costs and --faults")
        else:
            if "greedy" in self.algorithms:
                raise ValidationError("additional greedy needs statement coverage (three-objective mode)")
            if self.dataset is None:
                raise ValidationError("two-objective mode needs --dataset")

    def run_seed(self, run: int) -> int:
        return self.seed + run

    def meta_lines(self) -> list[str]:
        """Resolved settings that determine the results (excludes output path and worker count)."""
        a, b = self.anneal, self.bootstrap
        items = [
            ("mode", self.mode.value),
            ("algorithms", ",".join(self.algorithms)),
            ("coverage", self.coverage), ("costs", self.costs), ("faults", self.faults),
            ("dataset", self.dataset), ("drop_zero_rate", self.drop_zero_rate),
            ("runs", self.runs), ("alpha", repr(self.alpha)),
            ("penalty", "upper-bound" if self.penalty is None else repr(self.penalty)),
            ("reads", a.num_reads), ("sweeps", a.sweeps),
            ("beta_initial", "auto" if a.beta_initial is None else repr(a.beta_initial)),
            ("beta_final", "auto" if a.beta_final is None else repr(a.beta_final)),
            ("n", b.n), ("m", b.m), ("beta_coverage", repr(b.beta_coverage)),
            ("seed", self.seed), ("run_seeds", "seed+run"),
        ]
        return [f"{k}={'-' if v is None else v}" for k, v in items]


@dataclass(frozen=True, eq=False)
class RunRecord:
    algorithm: str
    run: int
    best: SelectionSolution
    energy: float | None
    candidates: int
    frontier: ParetoArchive
    seconds: float
    info: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    config: ExperimentConfig
    suite_size: int
    records: tuple[RunRecord, ...]
    reference: ParetoArchive
    counts: dict[tuple[str, int], int]
    stats: tuple[StatReport, ...]
    model_penalty: float | None = None

    def records_for(self, algorithm: str) -> list[RunRecord]:
        return [r for r in self.records if r.algorithm == algorithm]


def _load(config: ExperimentConfig) -> TestSuite:
    if config.mode is Mode.THREE:
        return load_three_objective_dataset(config.coverage, config.costs, config.faults)
    return load_two_objective_dataset(config.dataset, drop_zero_rate=config.drop_zero_rate)


def _run_one(config: ExperimentConfig, suite: TestSuite, costs: NormalizedCosts, model: QuboModel,
             algorithm: str, run: int) -> RunRecord:
    seed = config.run_seed(run)
    anneal = AnnealConfig(config.anneal.num_reads, config.anneal.sweeps, config.anneal.beta_initial,
                          config.anneal.beta_final, seed)
    three = config.mode is Mode.THREE
    evaluate = evaluate_objectives3 if three else evaluate_objectives2
    started = time.perf_counter()
    info: dict = {}
    energy = None

    if algorithm == "greedy":
        order = greedy_order(suite, costs)
        candidates = prefix_candidates(suite, costs, order, algorithm, run)
        best = candidates[-1] if candidates else SelectionSolution.make(
            np.zeros(len(suite), dtype=np.uint8), evaluate(suite, costs, np.zeros(len(suite))), algorithm, run)
    elif algorithm == "bootqa":
        bconfig = BootstrapConfig(config.bootstrap.n, config.bootstrap.m, config.bootstrap.beta_coverage, seed)
        result = bootstrap_solve(suite, costs, config.alpha, bconfig, anneal, algorithm=algorithm, run=run)
        best = result.solution
        candidates = [best]
        info = {"coverage": result.coverage, "meets_target": result.meets_target}
        if not result.meets_target:
            log.warning("bootqa run %d: sampled %.3f of the cases, below beta=%.3f",
                        run, result.coverage, result.target_coverage)
    else:
        sampleset = solve_exact(model) if algorithm == "exact" else solve_sa(model, anneal)
        x = sampleset.first.assignment
        energy = sampleset.first.energy
        best = SelectionSolution.make(x, evaluate(suite, costs, x), algorithm, run)
        if three:
            order = greedy_order(suite, costs, np.flatnonzero(x), stop_without_gain=False)
            candidates = prefix_candidates(suite, costs, order, algorithm, run)
        else:
            candidates = [best]
    frontier = ParetoArchive(tuple(nondominated(candidates, collapse_duplicates=False)))
    return RunRecord(algorithm, run, best, energy, len(candidates), frontier,
                     time.perf_counter() - started, info)


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run every algorithm ``config.runs`` times and assemble frontiers and statistics.

    Runs may execute on ``config.workers`` threads; results are reduced in
    (algorithm, run) order so the report does not depend on scheduling.
    """
    suite = _load(config)
    if len(suite) == 0:
        raise ValidationError("the dataset has no test cases")
    if "exact" in config.algorithms and len(suite) > MAX_EXACT_VARS:
        raise ValidationError(f"exact solver limited to {MAX_EXACT_VARS} cases, dataset has {len(suite)}")
    costs = normalize_costs(suite)
    if config.mode is Mode.THREE:
        model = build_three_objective_qubo(suite, costs, config.alpha, config.penalty)
    else:
        model = build_two_objective_qubo(suite, costs, config.alpha)

    jobs = list(itertools.product(config.algorithms, range(config.runs)))

    def job(key):
        algorithm, run = key
        try:
            return _run_one(config, suite, costs, model, algorithm, run)
        except SelectionError as exc:
            raise ExperimentError(algorithm, run, exc) from exc

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            records = tuple(pool.map(job, jobs))
    else:
        records = tuple(job(key) for key in jobs)

    reference = reference_frontier([r.frontier for r in records])
    counts = {(r.algorithm, r.run): count_nondominated(r.frontier, reference) for r in records}

    reports: list[StatReport] = []
    for a, b in itertools.combinations(config.algorithms, 2):
        ra = [r for r in records if r.algorithm == a]
        rb = [r for r in records if r.algorithm == b]
        if config.mode is Mode.THREE:
            reports.append(directional_report("nondominated", a, [counts[a, r.run] for r in ra],
                                              b, [counts[b, r.run] for r in rb]))
        else:
            reports.append(directional_report("cost", a, [r.best.objectives.total_cost for r in ra],
                                              b, [r.best.objectives.total_cost for r in rb],
                                              higher_is_better=False))
            reports.append(directional_report("rate", a, [r.best.objectives.total_failure_rate for r in ra],
                                              b, [r.best.objectives.total_failure_rate for r in rb]))
    return ExperimentReport(config, len(suite), records, reference, counts, tuple(reports),
                            model.penalty if config.mode is Mode.THREE else None)


def _fmt(v) -> str:
    return str(v) if isinstance(v, (int, np.integer)) else repr(float(v))


def _file_contents(report: ExperimentReport) -> dict[str, str]:
    config = report.config
    meta = config.meta_lines() + [f"cases={report.suite_size}"]
    if report.model_penalty is not None:
        meta.append(f"resolved_penalty={report.model_penalty!r}")

    solutions = []
    counts = []
    for r in report.records:
        ids = ",".join(str(i) for i in r.best.selected) or "-"
        energy = "-" if r.energy is None else repr(r.energy)
        solutions.append(" ".join([r.algorithm, str(r.run), energy] + [_fmt(v) for v in r.best.vector] + [ids]))
        counts.append(f"{r.algorithm} {r.run} {r.candidates} {len(r.frontier)} {report.counts[r.algorithm, r.run]}")
    return {
        "meta.txt": "".join(line + "\n" for line in meta),
        "solutions.txt": "".join(line + "\n" for line in solutions),
        "counts.txt": "".join(line + "\n" for line in counts),
        "timing.txt": "".join(f"{r.algorithm} {r.run} {r.seconds:.6f}\n" for r in report.records),
    }


def write_outputs(report: ExperimentReport, out_dir: str | Path) -> Path:
    """Write every output file; on failure nothing is left behind in ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".partial-", dir=out_dir.parent))
    try:
        for name, text in _file_contents(report).items():
            (staging / name).write_text(text)
        write_frontier(staging / "frontier.txt", [m for r in report.records for m in r.frontier.members])
        write_frontier(staging / "reference.txt", report.reference.members)
        write_report(staging / "stats.txt", report.stats)
        out_dir.mkdir(exist_ok=True)
        for path in sorted(staging.iterdir()):
            path.replace(out_dir / path.name)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    return out_dir
