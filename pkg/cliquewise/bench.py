"""Desk-scale ablations over seeded random instance families."""

import warnings
from dataclasses import dataclass, field
from typing import Any, Iterable, List, Optional

import numpy as np
from rich.console import Console
from rich.table import Table
from sklearn.exceptions import ConvergenceWarning

from cliquewise.dual import reduced_costs
from cliquewise.instance import random_instance
from cliquewise.primal import heuristic_loop
from cliquewise.scheduling import ScheduleConfig
from cliquewise.solvers.bregman import BregmanSolver
from cliquewise.utils import export_table, format_cell


@dataclass
class AblationReport:
    """Rows of an ablation with a short summary.

    Parameters
    ----------
    columns: list of str
        Column headers.
    rows: list of list
        One row per measurement.
    summary: dict
        Aggregates of the ablation.
    """

    columns: List[str]
    rows: List[List[Any]]
    summary: dict = field(default_factory=dict)

    def export(self, format: str = "csv") -> str:
        return export_table(self.columns, self.rows, format=format)

    def print(self, console: Optional[Console] = None):
        table = Table(show_lines=False)
        for column in self.columns:
            table.add_column(column, justify="right")
        for row in self.rows:
            table.add_row(*[format_cell(value) for value in row])
        console = console or Console()
        console.print(table)
        for key, value in self.summary.items():
            console.print(f"{key}: {format_cell(value)}")


def scheduler_ablation(
    n: int = 2000,
    edge_density: float = 0.005,
    seeds: Iterable[int] = range(5),
    target_gap: float = 1e-2,
    max_sweeps: int = 20_000,
    schedule: Optional[ScheduleConfig] = None,
) -> AblationReport:
    """Sweeps needed to reach `target_gap` with feasibility
    and with duality gap scheduling.

    The summary holds both medians and whether gap scheduling
    is not worse than feasibility scheduling on the median.
    Runs hitting `max_sweeps` count with `max_sweeps`.
    """
    rows = []
    sweeps = {"feasibility": [], "gap": []}
    for seed in seeds:
        instance = random_instance(n, edge_density, random_state=seed)
        for scheduler in ("feasibility", "gap"):
            solver = BregmanSolver(
                scheduler=scheduler,
                schedule=schedule,
                target_gap=target_gap,
                max_sweeps=max_sweeps,
            )
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ConvergenceWarning)
                solver.fit(instance)
            sweeps[scheduler].append(solver.n_sweeps_)
            rows.append(
                [
                    seed,
                    scheduler,
                    solver.n_sweeps_,
                    solver.dual_bound_,
                    solver.primal_bound_,
                    solver.status_,
                ]
            )
    summary = {
        f"median_{scheduler}": float(np.median(values))
        for scheduler, values in sweeps.items()
        if values
    }
    if sweeps["gap"]:
        summary["gap_not_worse"] = bool(
            summary["median_gap"] <= summary["median_feasibility"]
        )
    columns = ["seed", "scheduler", "sweeps", "dual", "primal", "status"]
    return AblationReport(columns, rows, summary)


def heuristic_ablation(
    n: int = 200,
    edge_density: float = 0.05,
    seeds: Iterable[int] = range(5),
    rounds: int = 50,
    target_gap: float = 1e-3,
) -> AblationReport:
    """Incumbent curves of the primal heuristic driven by reduced costs
    of a converged dual and by the original costs, side by side."""
    rows = []
    finals = {"reduced": [], "original": []}
    for seed in seeds:
        instance = random_instance(n, edge_density, random_state=seed)
        solver = BregmanSolver(target_gap=target_gap)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            solver.fit(instance)
        aug = solver.relaxation_
        reduced = reduced_costs(aug, solver.lambda_)
        curves = {}
        for name, use_reduced in (("reduced", True), ("original", False)):
            _, history = heuristic_loop(
                aug,
                reduced,
                random_state=seed,
                budget=rounds,
                use_reduced_costs=use_reduced,
                return_history=True,
            )
            curves[name] = history
            finals[name].append(history[-1])
        for i_round, (with_reduced, with_original) in enumerate(
            zip(curves["reduced"], curves["original"])
        ):
            rows.append(
                [
                    seed,
                    i_round,
                    with_reduced,
                    with_original,
                    solver.dual_bound_,
                ]
            )
    summary = {
        f"mean_final_{name}": float(np.mean(values))
        for name, values in finals.items()
        if values
    }
    columns = ["seed", "round", "reduced_costs", "original_costs", "dual"]
    return AblationReport(columns, rows, summary)
