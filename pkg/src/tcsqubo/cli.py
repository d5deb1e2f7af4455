"""Command-line entry point: ``tcsqubo <command> [options]``.

Exit codes: 0 success, 2 validation error, 3 data error.
"""

from __future__ import annotations

import argparse
import itertools
import logging
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np

from .errors import DataError, SelectionError, ValidationError
from .experiment import ALGORITHMS, ExperimentConfig, ExperimentError, Mode, run_experiment, write_outputs
from .pareto import ParetoArchive, count_nondominated, format_frontier, read_frontier, reference_frontier
from .qubo import (
    DEFAULT_ALPHA,
    build_three_objective_qubo,
    build_two_objective_qubo,
    dump_qubo,
    load_qubo,
)
from .solvers import AnnealConfig, BootstrapConfig, additional_greedy, bootstrap_solve, solve_exact, solve_sa
from .stats import directional_report, write_report
from .suite import load_three_objective_dataset, load_two_objective_dataset, normalize_costs

log = logging.getLogger("tcsqubo")

EXIT_OK, EXIT_VALIDATION, EXIT_DATA = 0, 2, 3


def _add_data_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("dataset")
    g.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.THREE.value,
                   help="three: coverage/cost/fault files; two: time/rate table (default: three)")
    g.add_argument("--coverage", type=Path, help="coverage file, '<test_id>: <statements...>'")
    g.add_argument("--costs", type=Path, help="cost file, '<test_id>,<raw_cost>'")
    g.add_argument("--faults", type=Path, help="fault file, '<test_id>,<fault_id>'")
    g.add_argument("--dataset", type=Path, help="two-objective table 'id,time,rate[,rate_unit=...]'")
    g.add_argument("--keep-zero-rate", action="store_true",
                   help="keep two-objective cases that never failed (dropped by default)")


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="cost weight in (0, 1) (default 0.5)")
    p.add_argument("--penalty", type=float, default=None, help="coverage penalty (default: upper-bound rule)")


def _add_anneal_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("annealing")
    g.add_argument("--reads", type=int, default=100)
    g.add_argument("--sweeps", type=int, default=1000)
    g.add_argument("--beta-initial", type=float, default=None)
    g.add_argument("--beta-final", type=float, default=None)
    g.add_argument("--seed", type=int, default=0)


def _add_bootstrap_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("bootstrap decomposition")
    g.add_argument("--n", type=int, default=20, help="sub-suite size")
    g.add_argument("--m", type=int, default=10, help="number of sub-suites")
    g.add_argument("--beta-coverage", type=float, default=0.9, help="target fraction of distinct cases sampled")


def _anneal(args) -> AnnealConfig:
    return AnnealConfig(args.reads, args.sweeps, args.beta_initial, args.beta_final, args.seed)


def _load_suite(args):
    if args.mode == Mode.THREE.value:
        if None in (args.coverage, args.costs, args.faults):
            raise ValidationError("three-objective mode needs --coverage, --costs and --faults")
        return load_three_objective_dataset(args.coverage, args.costs, args.faults)
    if args.dataset is None:
        raise ValidationError("two-objective mode needs --dataset")
    return load_two_objective_dataset(args.dataset, drop_zero_rate=not args.keep_zero_rate)


def _build_model(args):
    suite = _load_suite(args)
    costs = normalize_costs(suite)
    if args.mode == Mode.THREE.value:
        return build_three_objective_qubo(suite, costs, args.alpha, args.penalty)
    return build_two_objective_qubo(suite, costs, args.alpha)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def cmd_build_qubo(args) -> int:
    model = _build_model(args)
    if args.out is None:
        raise ValidationError("build-qubo needs --out")
    dump_qubo(model, args.out)
    log.info("wrote %d variables, %d couplers to %s", model.num_vars, len(model.quadratic), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    model = load_qubo(args.qubo) if args.qubo else _build_model(args)
    sampleset = solve_exact(model) if args.exact else solve_sa(model, _anneal(args), workers=args.workers)
    lines = [f"{e!r} {c} {''.join(str(int(b)) for b in x)}" for x, e, c in sampleset]
    _emit("".join(line + "\n" for line in lines), args.out)
    return EXIT_OK


def cmd_greedy(args) -> int:
    args.mode = Mode.THREE.value
    suite = _load_suite(args)
    frontier = additional_greedy(suite, normalize_costs(suite))
    _emit(format_frontier(frontier), args.out)
    return EXIT_OK


def cmd_bootqa(args) -> int:
    args.mode = Mode.TWO.value
    suite = _load_suite(args)
    costs = normalize_costs(suite)
    result = bootstrap_solve(suite, costs, args.alpha, BootstrapConfig(args.n, args.m, args.beta_coverage, args.seed),
                             _anneal(args), workers=args.workers)
    sol = result.solution
    ids = ",".join(suite[i].name for i in sol.selected) or "-"
    text = (f"cost={sol.objectives.total_cost!r}\n"
            f"rate={sol.objectives.total_failure_rate!r}\n"
            f"coverage={result.coverage!r}\n"
            f"meets_beta={str(result.meets_target).lower()}\n"
            f"selected={ids}\n")
    if not result.meets_target:
        log.warning("sampled %.3f of the cases, below beta=%.3f", result.coverage, result.target_coverage)
    _emit(text, args.out)
    return EXIT_OK


def cmd_frontier(args) -> int:
    runs: dict[tuple[str, int], list] = defaultdict(list)
    for path in args.inputs:
        for member in read_frontier(path):
            runs[member.provenance[0]].append(member)
    archives = {key: ParetoArchive(tuple(members)) for key, members in sorted(runs.items())}
    reference = reference_frontier(list(archives.values()))
    _emit(format_frontier(reference.members), args.out)
    if args.counts:
        lines = [f"{alg} {run} {len(a)} {count_nondominated(a, reference)}" for (alg, run), a in archives.items()]
        args.counts.write_text("".join(line + "\n" for line in lines))
    return EXIT_OK


def cmd_stats(args) -> int:
    """Input: one '<group> <value>' pair per line; every pair of groups is compared."""
    groups: dict[str, list[float]] = {}
    for lineno, line in enumerate(args.input.read_text().splitlines(), start=1):
        tokens = line.split()
        if not tokens or tokens[0].startswith("#"):
            continue
        if len(tokens) != 2:
            raise DataError("expected '<group> <value>'", args.input, lineno)
        try:
            groups.setdefault(tokens[0], []).append(float(tokens[1]))
        except ValueError:
            raise DataError(f"value {tokens[1]!r} is not a number", args.input, lineno) from None
    reports = [directional_report(args.metric, a, groups[a], b, groups[b], higher_is_better=not args.lower_is_better)
               for a, b in itertools.combinations(groups, 2)]
    if args.out:
        write_report(args.out, reports)
    else:
        for r in reports:
            print(r.line())
    return EXIT_OK


def cmd_experiment(args) -> int:
    if args.out is None:
        raise ValidationError("experiment needs --out <directory>")
    algorithms = tuple(a.strip() for a in args.algorithms.split(",") if a.strip())
    config = ExperimentConfig(
        mode=Mode(args.mode),
        algorithms=algorithms,
        coverage=args.coverage, costs=args.costs, faults=args.faults, dataset=args.dataset,
        drop_zero_rate=not args.keep_zero_rate,
        runs=args.runs, alpha=args.alpha, penalty=args.penalty,
        anneal=_anneal(args),
        bootstrap=BootstrapConfig(args.n, args.m, args.beta_coverage, args.seed),
        seed=args.seed, out_dir=args.out, workers=args.workers,
    )
    report = run_experiment(config)
    write_outputs(report, args.out)
    for algorithm in config.algorithms:
        records = report.records_for(algorithm)
        sizes = [len(r.frontier) for r in records]
        counts = [report.counts[algorithm, r.run] for r in records]
        print(f"{algorithm:>9}: frontier size {np.mean(sizes):.1f} (sd {np.std(sizes, ddof=1) if len(sizes) > 1 else 0:.2f}),"
              f" on reference {np.mean(counts):.1f}")
    for r in report.stats:
        print(f"{r.hypothesis}: p={r.p_value:.4g} A12={r.a12:.2f} ({r.magnitude.letter})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tcsqubo", description="QUBO-based regression test case selection")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-qubo", help="write the selection QUBO of a dataset")
    _add_data_args(p)
    _add_model_args(p)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_build_qubo)

    p = sub.add_parser("solve", help="sample a QUBO (from --qubo or a dataset)")
    _add_data_args(p)
    _add_model_args(p)
    _add_anneal_args(p)
    p.add_argument("--qubo", type=Path, help="QUBO text file written by build-qubo")
    p.add_argument("--exact", action="store_true", help="exhaustive search instead of annealing")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("greedy", help="additional-greedy frontier of a three-objective dataset")
    _add_data_args(p)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_greedy)

    p = sub.add_parser("bootqa", help="bootstrap-decomposed solve of a two-objective dataset")
    _add_data_args(p)
    _add_model_args(p)
    _add_anneal_args(p)
    _add_bootstrap_args(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_bootqa)

    p = sub.add_parser("frontier", help="reference frontier of one or more frontier files")
    p.add_argument("inputs", nargs="+", type=Path)
    p.add_argument("--out", type=Path)
    p.add_argument("--counts", type=Path, help="write '<algorithm> <run> <size> <on reference>' here")
    p.set_defaults(func=cmd_frontier)

    p = sub.add_parser("stats", help="pairwise Mann-Whitney U / A12 over '<group> <value>' lines")
    p.add_argument("input", type=Path)
    p.add_argument("--metric", default="value")
    p.add_argument("--lower-is-better", action="store_true")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("experiment", help="run the full comparison protocol")
    _add_data_args(p)
    _add_model_args(p)
    _add_anneal_args(p)
    _add_bootstrap_args(p)
    p.add_argument("--algorithms", default="selectqa,greedy",
                   help=f"comma-separated subset of {','.join(ALGORITHMS)}")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--workers", type=int, default=1, help="concurrent runs (output does not depend on it)")
    p.add_argument("--out", type=Path, help="output directory")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ExperimentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA if isinstance(exc.cause, DataError) else EXIT_VALIDATION
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValidationError, SelectionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
