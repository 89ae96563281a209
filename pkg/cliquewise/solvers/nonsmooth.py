import time
import warnings
from typing import Optional

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils import check_random_state

from cliquewise.base import DualSolver, make_record
from cliquewise.dual import DualState, alg1_sweep, dual_value, sign_indicator
from cliquewise.instance import ProblemInstance
from cliquewise.primal import greedy_generate
from cliquewise.scheduling import (
    feasibility_residuals,
    initialize,
    truncation_projection,
)


class DualCoordinateDescent(DualSolver):
    """Non-smooth dual coordinate descent over the clique relaxation.

    Every clique update absorbs the largest reduced cost of the clique
    into its dual variable. The method stops at a fixed point, which
    need not be optimal for the relaxation.

    Parameters
    ----------
    max_sweeps: int, default 1_000_000
        Largest number of sweeps.
    max_seconds: float, default None
        Wall clock limit.
    record_every: int, default 50
        Sweeps between two trace records.
    random_state: int, RandomState or None, default None
        Seed of the greedy solution built from the final reduced costs.
    verbose: bool, default False
        Logs progress to stderr.
    """

    def __init__(
        self,
        max_sweeps: int = 1_000_000,
        max_seconds: Optional[float] = None,
        record_every: int = 50,
        random_state=None,
        verbose: bool = False,
    ):
        self.max_sweeps = max_sweeps
        self.max_seconds = max_seconds
        self.record_every = record_every
        self.random_state = random_state
        self.verbose = verbose

    def fit(
        self, instance: ProblemInstance, y=None
    ) -> "DualCoordinateDescent":
        if self.record_every < 1:
            raise ValueError("record_every has to be at least one.")
        random_state = check_random_state(self.random_state)
        console = self._console()
        start = time.perf_counter()
        with console.status("Running dual coordinate descent") as status:
            base = self._prepare(instance)
            aug, _ = initialize(base)
            console.log(
                f"Preprocessing done: {aug.n} nodes, {aug.m} cliques."
            )
            state = DualState.initial(aug, temperature=1.0)
            threshold = 1e-12 * (1.0 + np.max(np.abs(aug.costs), initial=0.0))
            trace = []
            n_sweeps = 0
            run_status = "max_sweeps"
            status.update("Running sweeps")
            while True:
                change = np.inf
                if n_sweeps < self.max_sweeps:
                    change = alg1_sweep(state, aug)
                    n_sweeps += 1
                elapsed = time.perf_counter() - start
                if change <= threshold:
                    run_status = "fixed_point"
                elif (
                    self.max_seconds is not None
                    and elapsed >= self.max_seconds
                ):
                    run_status = "max_seconds"
                done = (
                    run_status != "max_sweeps" or n_sweeps >= self.max_sweeps
                )
                if done or n_sweeps % self.record_every == 0:
                    dual = aug.unscale(dual_value(aug, state.lam))
                    xstar = sign_indicator(state.reduced)
                    estimate = truncation_projection(aug, xstar)
                    residuals = feasibility_residuals(aug, xstar)
                    trace.append(
                        make_record(
                            sweep=n_sweeps,
                            wall_ms=int(1000 * elapsed),
                            temperature=0.0,
                            dual_bound=dual,
                            primal_bound=estimate.objective,
                            max_residual=np.max(residuals, initial=0.0),
                        )
                    )
                if done:
                    break
            state.refresh(aug)
            solution = greedy_generate(aug, state.reduced, random_state)
            self.trace_ = trace
            self.n_sweeps_ = n_sweeps
            self.status_ = run_status
            self.primal_bound_ = estimate.objective
            self._finalize(
                instance, base, aug, state.lam, estimate.xhat, solution
            )
            console.log(
                f"Stopped ({run_status}) after {n_sweeps} sweeps "
                f"with dual bound {self.dual_bound_:.6g}."
            )
        if run_status != "fixed_point":
            warnings.warn(
                f"No fixed point reached ({run_status}).", ConvergenceWarning
            )
        return self
