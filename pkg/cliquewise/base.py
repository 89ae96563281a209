import json
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, List, Optional, Tuple, Union

import numpy as np
from rich.console import Console
from rich.table import Table
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from cliquewise.data import RunSummary, TraceRecord
from cliquewise.dual import dual_value
from cliquewise.error import InconsistencyError
from cliquewise.instance import (
    AugmentedInstance,
    ProblemInstance,
    augment,
    strip_nonpositive,
)
from cliquewise.primal import IntegerSolution
from cliquewise.scheduling import relative_gap
from cliquewise.utils import export_table, format_cell

TRACE_COLUMNS = [
    "sweep",
    "wall_ms",
    "temperature",
    "dual_bound",
    "primal_bound",
    "integer_bound",
    "max_residual",
    "stabilizations",
    "active_fraction",
    "delta",
    "truncation_error",
]

# Relative tolerance on the agreement of bounds computed two ways
BOUND_TOL = 1e-6


class DualSolver(ABC, BaseEstimator):
    """Base class for the dual solvers in cliquewise.

    Solvers are configured through their constructor and fitted on a
    `ProblemInstance`. Fitted solvers expose their bounds in the units
    of the original costs:

    Attributes
    ----------
    dual_bound_: float
        Certified upper bound on the clique relaxation optimum.
    primal_bound_: float
        Objective of the best feasible fractional point found.
    lambda_: ndarray of shape (m',)
        Dual vector the dual bound was computed from,
        indexed by the cliques of `relaxation_`.
    relaxation_: AugmentedInstance
        Relaxation of the instance stripped of non-positive nodes.
    primal_estimate_: ndarray of shape (n,)
        Projected fractional point over the nodes of the instance.
    solution_: IntegerSolution
        Best integer solution found.
    trace_: list of TraceRecord
        One record per batch of sweeps.
    relative_gap_: float
        Relative gap between `dual_bound_` and `primal_bound_`.
    n_sweeps_: int
        Number of sweeps run.
    status_: str
        Reason the run stopped.
    """

    verbose: bool = False

    @abstractmethod
    def fit(self, instance: ProblemInstance, y=None) -> "DualSolver":
        """Runs the solver on an instance.

        Parameters
        ----------
        instance: ProblemInstance
            Valid instance to solve.
        y: None
            Ignored, exists for sklearn compatibility.
        """
        pass

    def _console(self) -> Console:
        return Console(stderr=True, quiet=not self.verbose)

    @staticmethod
    def _prepare(instance: ProblemInstance) -> AugmentedInstance:
        stripped, original_index = strip_nonpositive(instance)
        return augment(stripped, original_index)

    def _check_fitted(self):
        if getattr(self, "trace_", None) is None:
            raise NotFittedError(
                f"This {type(self).__name__} instance is not fitted yet, "
                "call 'fit' with an instance first."
            )

    def _finalize(
        self,
        instance: ProblemInstance,
        base: AugmentedInstance,
        aug: AugmentedInstance,
        lam: np.ndarray,
        xhat: np.ndarray,
        solution: IntegerSolution,
    ):
        """Lifts working quantities back to the original instance
        and cross-checks the dual bound."""
        lifted = aug.lift_duals(lam)
        dual_bound = aug.unscale(dual_value(aug, lam))
        recomputed = dual_value(base, lifted)
        if abs(recomputed - dual_bound) > BOUND_TOL * max(
            1.0, abs(recomputed)
        ):
            raise InconsistencyError(
                f"Dual bound {dual_bound!r} does not match "
                f"its recomputation {recomputed!r}."
            )
        self.relaxation_ = base
        self.lambda_ = lifted
        self.dual_bound_ = recomputed
        estimate = np.zeros(instance.node_count)
        estimate[base.original_index] = xhat[: base.n]
        self.primal_estimate_ = estimate
        self.solution_ = solution.lift(instance, base.original_index)
        self.relative_gap_ = relative_gap(self.dual_bound_, self.primal_bound_)

    def summary(self) -> RunSummary:
        """Final bounds of the fitted solver."""
        self._check_fitted()
        seed = (
            self.random_state if isinstance(self.random_state, int) else None
        )
        return RunSummary(
            seed=seed,
            dual_bound=self.dual_bound_,
            primal_bound=self.primal_bound_,
            integer_bound=self.solution_.objective,
            relative_gap=self.relative_gap_,
            n_sweeps=self.n_sweeps_,
            status=self.status_,
        )

    def _trace_table(self) -> Tuple[List[str], List[List[Any]]]:
        self._check_fitted()
        rows = [
            [record[column] for column in TRACE_COLUMNS]
            for record in self.trace_
        ]
        return TRACE_COLUMNS, rows

    def print_trace(self, every: int = 1):
        """Pretty prints the trace of the run in a table.

        Parameters
        ----------
        every: int, default 1
            Only every k-th record is shown, the last one always is.
        """
        columns, rows = self._trace_table()
        if every > 1:
            shown = rows[::every]
            if rows and shown[-1] is not rows[-1]:
                shown.append(rows[-1])
            rows = shown
        table = Table(show_lines=False)
        for column in columns:
            style = "blue" if column in ("sweep", "temperature") else None
            table.add_column(column, style=style, justify="right")
        for row in rows:
            table.add_row(*[format_cell(value) for value in row])
        console = Console()
        console.print(table)

    def export_trace(self, format: str = "csv") -> str:
        """Exports the trace of the run as a text table.

        Parameters
        ----------
        format: 'csv', 'latex' or 'markdown'
            Specifies which format should be used.
        """
        columns, rows = self._trace_table()
        return export_table(columns, rows, format=format)

    def write_trace(
        self, path: Union[str, Path], omit_wall_time: bool = False
    ):
        """Writes the trace as JSON lines, one record per batch.

        Parameters
        ----------
        path: str or Path
            File to write.
        omit_wall_time: bool, default False
            Writes zero wall times, so that runs with identical
            configuration and seed produce identical files.
        """
        self._check_fitted()
        with Path(path).open("w", encoding="utf-8") as out_file:
            for record in self.trace_:
                record = dict(record)
                if omit_wall_time:
                    record["wall_ms"] = 0
                out_file.write(json.dumps(record, sort_keys=True) + "\n")


def make_record(
    sweep: int,
    wall_ms: int,
    temperature: float,
    dual_bound: float,
    primal_bound: float,
    integer_bound: Optional[float] = None,
    max_residual: float = 0.0,
    stabilizations: int = 0,
    active_fraction: float = 1.0,
    delta: float = 0.0,
    truncation_error: float = 0.0,
) -> TraceRecord:
    return TraceRecord(
        sweep=int(sweep),
        wall_ms=int(wall_ms),
        temperature=float(temperature),
        dual_bound=float(dual_bound),
        primal_bound=float(primal_bound),
        integer_bound=(
            None if integer_bound is None else float(integer_bound)
        ),
        max_residual=float(max_residual),
        stabilizations=int(stabilizations),
        active_fraction=float(active_fraction),
        delta=float(delta),
        truncation_error=float(truncation_error),
    )
