"""Command-line interface of cliquewise.

Exit codes: 0 on success, 1 for instances failing validation,
2 for unreadable or malformed input, 3 for inconsistent bounds.
"""

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from rich.console import Console
from rich.table import Table

from cliquewise.base import DualSolver
from cliquewise.bench import heuristic_ablation, scheduler_ablation
from cliquewise.error import (
    InconsistencyError,
    InstanceFormatError,
    SizeGuardError,
)
from cliquewise.formats import (
    read_dimacs,
    read_instance,
    write_instance,
    write_solution,
)
from cliquewise.instance import ProblemInstance, random_instance, validate
from cliquewise.oracle import brute_force_mwis
from cliquewise.scheduling import ScheduleConfig
from cliquewise.solvers import BregmanSolver, DualCoordinateDescent
from cliquewise.utils import format_cell

MODES = ("dual-nonsmooth", "lp-log", "lp-exp", "ilp")
SCHEDULERS = ("feasibility", "gap")
TRUNCATIONS = ("none", "heuristic", "accurate")
FORMATS = ("native", "dimacs")

EXIT_INVALID = 1
EXIT_PARSE = 2
EXIT_INCONSISTENT = 3


@dataclass
class RunConfig:
    """Everything a `solve` run needs.

    Accurate truncation always runs with tau_stab = 10,
    the other configurations default to tau_stab = 1e30.
    """

    instance: Path
    format: str = "native"
    mode: str = "lp-exp"
    scheduler: str = "gap"
    truncation: str = "none"
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    tau_stab: Optional[float] = None
    seed: Optional[int] = None
    max_sweeps: int = 1_000_000
    max_seconds: Optional[float] = None
    target_gap: float = 1e-3
    proposals_per_batch: int = 1
    heuristic_rounds: int = 50
    heuristic_start_gap: float = 1e-3
    trace: Optional[Path] = None
    solution: Optional[Path] = None
    omit_wall_time: bool = False
    repeat: int = 1
    workers: int = 1
    verbose: bool = False

    def __post_init__(self):
        for name, value, options in (
            ("mode", self.mode, MODES),
            ("scheduler", self.scheduler, SCHEDULERS),
            ("truncation", self.truncation, TRUNCATIONS),
            ("format", self.format, FORMATS),
        ):
            if value not in options:
                raise ValueError(
                    f"Unknown {name} '{value}', choose from {options}."
                )
        if self.truncation != "none" and self.mode not in ("lp-exp", "ilp"):
            raise ValueError("Truncation needs an exp-domain mode.")
        if self.truncation == "accurate":
            self.tau_stab = 10.0
        elif self.tau_stab is None:
            self.tau_stab = 1e30
        if self.repeat < 1 or self.workers < 1:
            raise ValueError("repeat and workers have to be positive.")

    @property
    def seeds(self) -> List[Optional[int]]:
        if self.repeat == 1:
            return [self.seed]
        first = 0 if self.seed is None else self.seed
        return [first + k for k in range(self.repeat)]

    def build_solver(self, seed: Optional[int]) -> DualSolver:
        if self.mode == "dual-nonsmooth":
            return DualCoordinateDescent(
                max_sweeps=self.max_sweeps,
                max_seconds=self.max_seconds,
                record_every=self.schedule.tau_batch,
                random_state=seed,
                verbose=self.verbose,
            )
        return BregmanSolver(
            domain="log" if self.mode == "lp-log" else "exp",
            scheduler=self.scheduler,
            truncation=self.truncation,
            schedule=self.schedule,
            tau_stab=self.tau_stab,
            max_sweeps=self.max_sweeps,
            max_seconds=self.max_seconds,
            target_gap=self.target_gap,
            primal_heuristic=self.mode == "ilp",
            proposals_per_batch=self.proposals_per_batch,
            heuristic_rounds=self.heuristic_rounds,
            heuristic_start_gap=self.heuristic_start_gap,
            random_state=seed,
            verbose=self.verbose,
        )

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        schedule = ScheduleConfig(
            T0=args.t0,
            tau_batch=args.tau_batch,
            tau_drop=args.tau_drop,
            tau_feas=args.tau_feas,
            tau_gap=args.tau_gap,
            T_floor=args.t_floor,
        )
        return cls(
            instance=Path(args.instance),
            format=args.format,
            mode=args.mode,
            scheduler=args.scheduler,
            truncation=args.truncation,
            schedule=schedule,
            tau_stab=args.tau_stab,
            seed=args.seed,
            max_sweeps=args.max_sweeps,
            max_seconds=args.max_seconds,
            target_gap=args.target_gap,
            proposals_per_batch=args.proposals_per_batch,
            heuristic_rounds=args.heuristic_rounds,
            heuristic_start_gap=args.heuristic_start_gap,
            trace=None if args.trace is None else Path(args.trace),
            solution=None if args.solution is None else Path(args.solution),
            omit_wall_time=args.omit_wall_time,
            repeat=args.repeat,
            workers=args.workers,
            verbose=args.verbose,
        )


def load_instance(
    path: Path, format: str = "native", seed: Optional[int] = None
) -> ProblemInstance:
    """Reads an instance and rejects it if it fails validation."""
    if format == "dimacs":
        instance = read_dimacs(path, random_state=seed)
    else:
        instance = read_instance(path)
    report = validate(instance)
    if not report.is_valid:
        kind, detail = report.violations[0]
        raise InstanceFormatError(f"invalid instance, {kind}: {detail}", 1)
    return instance


def _summary_table(solvers: Sequence[DualSolver]) -> Table:
    table = Table(show_lines=False)
    columns = [
        "seed",
        "status",
        "sweeps",
        "dual bound",
        "primal bound",
        "integer",
        "gap",
    ]
    for column in columns:
        table.add_column(column, justify="right")
    for solver in solvers:
        summary = solver.summary()
        table.add_row(
            *[
                format_cell(summary["seed"]),
                summary["status"],
                format_cell(summary["n_sweeps"]),
                format_cell(summary["dual_bound"]),
                format_cell(summary["primal_bound"]),
                format_cell(summary["integer_bound"]),
                format_cell(summary["relative_gap"]),
            ]
        )
    return table


def solve(config: RunConfig, console: Optional[Console] = None) -> int:
    """Runs the configured pipeline and writes its artifacts.

    With `repeat` > 1, the seeds seed, seed+1, ... run on a thread pool,
    the artifacts of the run with the best integer solution are written.
    """
    log = Console(stderr=True, quiet=not config.verbose)
    console = console or Console()
    instance = load_instance(config.instance, config.format, config.seed)
    log.log(
        f"Loaded {config.instance} with {instance.node_count} nodes "
        f"and {instance.clique_count} cliques."
    )
    # Derived structures are cached before threads share the instance
    instance.adjacency

    def run(seed: Optional[int]) -> DualSolver:
        return config.build_solver(seed).fit(instance)

    if config.repeat == 1:
        solvers = [run(config.seed)]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            solvers = list(executor.map(run, config.seeds))
    best = max(
        solvers,
        key=lambda solver: (solver.solution_.objective, -solver.dual_bound_),
    )
    if config.repeat > 1:
        duals = [solver.dual_bound_ for solver in solvers]
        integers = [solver.solution_.objective for solver in solvers]
        log.log(
            f"{config.repeat} runs: dual bound in "
            f"[{min(duals):.6g}, {max(duals):.6g}], integer objective in "
            f"[{min(integers):.6g}, {max(integers):.6g}]."
        )
    if config.trace is not None:
        best.write_trace(config.trace, omit_wall_time=config.omit_wall_time)
    if config.solution is not None:
        write_solution(config.solution, best.solution_)
    console.print(_summary_table(solvers))
    return 0


def generate(
    output: Path,
    n: int,
    edge_density: float,
    cost_low: float = 0.0,
    cost_high: float = 1.0,
    seed: Optional[int] = None,
) -> ProblemInstance:
    """Writes a random instance with a greedy clique cover."""
    instance = random_instance(
        n, edge_density, (cost_low, cost_high), random_state=seed
    )
    write_instance(output, instance)
    return instance


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cliquewise",
        description="Bounds and solutions for maximum-weight independent "
        "set problems over clique cover relaxations.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    solve_parser = commands.add_parser("solve", help="Solve an instance.")
    solve_parser.add_argument("instance", help="Instance file.")
    solve_parser.add_argument("--format", choices=FORMATS, default="native")
    solve_parser.add_argument("--mode", choices=MODES, default="lp-exp")
    solve_parser.add_argument(
        "--scheduler", choices=SCHEDULERS, default="gap"
    )
    solve_parser.add_argument(
        "--truncation", choices=TRUNCATIONS, default="none"
    )
    defaults = ScheduleConfig()
    solve_parser.add_argument("--t0", type=float, default=defaults.T0)
    solve_parser.add_argument(
        "--tau-batch", type=int, default=defaults.tau_batch
    )
    solve_parser.add_argument(
        "--tau-drop", type=float, default=defaults.tau_drop
    )
    solve_parser.add_argument(
        "--tau-feas", type=float, default=defaults.tau_feas
    )
    solve_parser.add_argument(
        "--tau-gap", type=float, default=defaults.tau_gap
    )
    solve_parser.add_argument(
        "--t-floor", type=float, default=defaults.T_floor
    )
    solve_parser.add_argument("--tau-stab", type=float, default=None)
    solve_parser.add_argument("--seed", type=int, default=None)
    solve_parser.add_argument("--max-sweeps", type=int, default=1_000_000)
    solve_parser.add_argument("--max-seconds", type=float, default=None)
    solve_parser.add_argument("--target-gap", type=float, default=1e-3)
    solve_parser.add_argument("--proposals-per-batch", type=int, default=1)
    solve_parser.add_argument("--heuristic-rounds", type=int, default=50)
    solve_parser.add_argument(
        "--heuristic-start-gap", type=float, default=1e-3
    )
    solve_parser.add_argument("--trace", help="JSON lines trace output.")
    solve_parser.add_argument("--solution", help="Solution file output.")
    solve_parser.add_argument(
        "--omit-wall-time",
        action="store_true",
        help="Write zero wall times so traces are reproducible.",
    )
    solve_parser.add_argument("--repeat", type=int, default=1)
    solve_parser.add_argument("--workers", type=int, default=1)
    solve_parser.add_argument("--verbose", action="store_true")

    generate_parser = commands.add_parser(
        "generate", help="Write a random instance."
    )
    generate_parser.add_argument("output", help="Instance file to write.")
    generate_parser.add_argument("--n", type=int, required=True)
    generate_parser.add_argument(
        "--edge-density", type=float, required=True
    )
    generate_parser.add_argument("--cost-low", type=float, default=0.0)
    generate_parser.add_argument("--cost-high", type=float, default=1.0)
    generate_parser.add_argument("--seed", type=int, default=None)

    validate_parser = commands.add_parser(
        "validate", help="Check an instance file."
    )
    validate_parser.add_argument("instance", help="Instance file.")
    validate_parser.add_argument(
        "--format", choices=FORMATS, default="native"
    )

    brute_parser = commands.add_parser(
        "brute", help="Solve a small instance exactly by enumeration."
    )
    brute_parser.add_argument("instance", help="Instance file.")
    brute_parser.add_argument("--solution", help="Solution file output.")

    bench_parser = commands.add_parser(
        "bench", help="Run a desk-scale ablation."
    )
    bench_parser.add_argument("ablation", choices=("scheduler", "heuristic"))
    bench_parser.add_argument("--n", type=int, default=None)
    bench_parser.add_argument("--edge-density", type=float, default=None)
    bench_parser.add_argument("--seeds", type=int, default=5)
    bench_parser.add_argument("--target-gap", type=float, default=None)
    bench_parser.add_argument(
        "--table-format",
        choices=("rich", "csv", "markdown", "latex"),
        default="rich",
    )
    return parser


def _validate_command(args, console: Console) -> int:
    if args.format == "dimacs":
        instance = read_dimacs(args.instance)
    else:
        instance = read_instance(args.instance)
    report = validate(instance)
    if report.is_valid:
        console.print(
            f"valid: {instance.node_count} nodes, {instance.edge_count} "
            f"edges, {instance.clique_count} cliques"
        )
        return 0
    for kind, detail in report.violations:
        console.print(f"{kind}: {detail}")
    return EXIT_INVALID


def _brute_command(args, console: Console) -> int:
    instance = read_instance(args.instance)
    solution = brute_force_mwis(instance)
    console.print(f"VALUE {solution.objective!r}")
    console.print(" ".join(str(i) for i in solution.selected))
    if args.solution is not None:
        write_solution(args.solution, solution)
    return 0


def _bench_command(args, console: Console) -> int:
    options = {"seeds": range(args.seeds)}
    for name in ("n", "edge_density", "target_gap"):
        value = getattr(args, name)
        if value is not None:
            options[name] = value
    if args.ablation == "scheduler":
        report = scheduler_ablation(**options)
    else:
        report = heuristic_ablation(**options)
    if args.table_format == "rich":
        report.print(console)
    else:
        console.print(report.export(args.table_format), markup=False)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    console = Console()
    errors = Console(stderr=True)
    try:
        if args.command == "solve":
            return solve(RunConfig.from_args(args), console)
        if args.command == "generate":
            generate(
                Path(args.output),
                args.n,
                args.edge_density,
                args.cost_low,
                args.cost_high,
                args.seed,
            )
            return 0
        if args.command == "validate":
            return _validate_command(args, console)
        if args.command == "brute":
            return _brute_command(args, console)
        return _bench_command(args, console)
    except (InstanceFormatError, SizeGuardError, OSError) as error:
        errors.print(f"[red]error:[/red] {error}", highlight=False)
        return EXIT_PARSE
    except InconsistencyError as error:
        errors.print(
            f"[red]inconsistent bounds:[/red] {error}", highlight=False
        )
        return EXIT_INCONSISTENT
    except ValueError as error:
        errors.print(f"[red]error:[/red] {error}", highlight=False)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
