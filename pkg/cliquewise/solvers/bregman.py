import time
import warnings
from typing import Literal, Optional

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils import check_random_state

from cliquewise.base import BOUND_TOL, DualSolver, make_record
from cliquewise.dual import (
    DualState,
    alg3_sweep,
    alg4_sweep,
    dual_value,
    smoothed_dual_value,
)
from cliquewise.error import InconsistencyError
from cliquewise.instance import AugmentedInstance, ProblemInstance
from cliquewise.primal import IntegerSolution, heuristic_loop
from cliquewise.scheduling import (
    ScheduleConfig,
    feasibility_residuals,
    feasibility_step,
    gap_step,
    initialize,
    relative_gap,
    truncation_projection,
)
from cliquewise.sparsify import (
    ActiveSets,
    accurate_refresh,
    heuristic_refresh,
    truncation_error,
    update_delta,
)

LIMIT_STATUSES = ("max_sweeps", "max_seconds")


class BregmanSolver(DualSolver):
    """Smoothed dual coordinate descent over the clique relaxation,
    also known as the Bregman or Sinkhorn method.
    The temperature of the entropic smoothing is lowered by a scheduler,
    bounds are certified once every batch of sweeps.

    ```python
    from cliquewise import BregmanSolver, read_instance

    instance = read_instance("graph.mwis")
    solver = BregmanSolver(scheduler="gap", primal_heuristic=True)
    solver.fit(instance)
    print(solver.dual_bound_, solver.solution_.objective)
    ```

    Parameters
    ----------
    domain: 'exp' or 'log', default 'exp'
        Stabilized exp-domain sweeps or log-domain sweeps.
    scheduler: 'gap' or 'feasibility', default 'gap'
        Temperature control. 'feasibility' drops the temperature by a
        constant factor once clique residuals are small, 'gap' lowers it
        proportionally to the smoothed duality gap.
    truncation: 'none', 'heuristic' or 'accurate', default 'none'
        Active-set truncation of clique sums, needs the exp-domain.
    schedule: ScheduleConfig, default None
        Scheduler parameters, the defaults of ScheduleConfig if None.
    tau_stab: float, default None
        Stabilization threshold of the exp-domain, 1e30 if None.
        Accurate truncation always runs with 10 and ignores this value.
    max_sweeps: int, default 1_000_000
        Largest number of sweeps.
    max_seconds: float, default None
        Wall clock limit, checked after every batch.
    target_gap: float, default 1e-3
        The run stops once the relative gap falls below this value.
        With the primal heuristic, the gap to the best integer solution
        is used.
    primal_heuristic: bool, default False
        Generates and recombines integer solutions from the reduced
        costs once the relaxation gap is below `heuristic_start_gap`.
    proposals_per_batch: int, default 1
        Greedy proposals generated per batch.
    heuristic_rounds: int, default 50
        Total number of proposals, the run stops when they are spent.
    heuristic_start_gap: float, default 1e-3
        Relaxation gap at which the heuristic starts.
    random_state: int, RandomState or None, default None
        Seed of the heuristic.
    verbose: bool, default False
        Logs progress to stderr.

    Attributes
    ----------
    temperature_: float
        Temperature at the end of the run, in units of scaled costs.
    smoothing_exhausted_: bool
        Whether the gap scheduler hit the temperature floor.
    """

    def __init__(
        self,
        domain: Literal["exp", "log"] = "exp",
        scheduler: Literal["gap", "feasibility"] = "gap",
        truncation: Literal["none", "heuristic", "accurate"] = "none",
        schedule: Optional[ScheduleConfig] = None,
        tau_stab: Optional[float] = None,
        max_sweeps: int = 1_000_000,
        max_seconds: Optional[float] = None,
        target_gap: float = 1e-3,
        primal_heuristic: bool = False,
        proposals_per_batch: int = 1,
        heuristic_rounds: int = 50,
        heuristic_start_gap: float = 1e-3,
        random_state=None,
        verbose: bool = False,
    ):
        self.domain = domain
        self.scheduler = scheduler
        self.truncation = truncation
        self.schedule = schedule
        self.tau_stab = tau_stab
        self.max_sweeps = max_sweeps
        self.max_seconds = max_seconds
        self.target_gap = target_gap
        self.primal_heuristic = primal_heuristic
        self.proposals_per_batch = proposals_per_batch
        self.heuristic_rounds = heuristic_rounds
        self.heuristic_start_gap = heuristic_start_gap
        self.random_state = random_state
        self.verbose = verbose

    @property
    def effective_tau_stab(self) -> float:
        if self.truncation == "accurate":
            return 10.0
        if self.tau_stab is not None:
            return float(self.tau_stab)
        return 1e30

    def _check_params(self):
        if self.domain not in ("exp", "log"):
            raise ValueError(
                f"Unknown domain '{self.domain}', use 'exp' or 'log'."
            )
        if self.scheduler not in ("gap", "feasibility"):
            raise ValueError(
                f"Unknown scheduler '{self.scheduler}', "
                "use 'gap' or 'feasibility'."
            )
        if self.truncation not in ("none", "heuristic", "accurate"):
            raise ValueError(
                f"Unknown truncation '{self.truncation}', "
                "use 'none', 'heuristic' or 'accurate'."
            )
        if self.truncation != "none" and self.domain != "exp":
            raise ValueError("Truncation is only available in the exp-domain.")
        if self.effective_tau_stab <= 1:
            raise ValueError("tau_stab has to be greater than one.")
        if self.max_sweeps < 0:
            raise ValueError("max_sweeps has to be non-negative.")
        if self.target_gap < 0:
            raise ValueError("target_gap has to be non-negative.")
        if self.proposals_per_batch < 1:
            raise ValueError("proposals_per_batch has to be at least one.")

    def _active_sets(
        self,
        aug: AugmentedInstance,
        state: DualState,
        delta: float,
        batch: int,
    ) -> Optional[ActiveSets]:
        if self.truncation == "heuristic":
            return heuristic_refresh(aug, state.x, refresh_batch=batch)
        if self.truncation == "accurate":
            return accurate_refresh(
                aug,
                state.x,
                state.temperature,
                self.effective_tau_stab,
                delta,
                refresh_batch=batch,
            )
        return None

    def _sweep(
        self,
        state: DualState,
        aug: AugmentedInstance,
        active: Optional[ActiveSets],
    ) -> int:
        if self.domain == "log":
            alg3_sweep(state, aug)
            return 0
        stats = alg4_sweep(state, aug, self.effective_tau_stab, active)
        return stats.stabilizations

    def fit(self, instance: ProblemInstance, y=None) -> "BregmanSolver":
        """Runs the solver on an instance.

        Parameters
        ----------
        instance: ProblemInstance
            Valid instance to solve.
        y: None
            Ignored, exists for sklearn compatibility.

        Returns
        -------
        BregmanSolver
            The fitted solver.
        """
        self._check_params()
        schedule = self.schedule
        if schedule is None:
            schedule = ScheduleConfig()
        random_state = check_random_state(self.random_state)
        console = self._console()
        start = time.perf_counter()
        with console.status("Solving relaxation") as status:
            status.update("Preprocessing instance")
            base = self._prepare(instance)
            aug, _ = initialize(base)
            console.log(
                f"Preprocessing done: {aug.n} nodes, {aug.m} cliques, "
                f"cost scale {aug.scale_factor:.4g}."
            )
            status.update("Running sweeps")
            state = DualState.initial(aug, temperature=schedule.T0)
            trace = []
            n_sweeps = 0
            batch = 0
            delta = 0.0
            exhausted = False
            incumbent: Optional[IntegerSolution] = None
            rounds_used = 0
            heuristic_started = False
            best_dual = np.inf
            best_lam = state.lam.copy()
            best_primal = -np.inf
            best_xhat = np.zeros(aug.size)
            while True:
                temperature = state.temperature
                state.fold(aug)
                state.refresh(aug)
                active = self._active_sets(aug, state, delta, batch)
                smoothed_start = smoothed_dual_value(
                    aug, state.lam, temperature
                )
                stabilizations = 0
                sweeps = min(schedule.tau_batch, self.max_sweeps - n_sweeps)
                for _ in range(sweeps):
                    stabilizations += self._sweep(state, aug, active)
                n_sweeps += sweeps
                lam = state.effective_lambda()
                x = state.materialize(aug)
                error = 0.0
                if active is not None:
                    error = truncation_error(aug, state, active)
                residuals = feasibility_residuals(aug, x)
                estimate = truncation_projection(aug, x, costs=aug.costs)
                primal = float(np.dot(base.original_costs, estimate.xhat))
                dual = aug.unscale(dual_value(aug, lam))
                smoothed_end = smoothed_dual_value(aug, lam, temperature)
                if dual < best_dual:
                    best_dual, best_lam = dual, lam.copy()
                if primal > best_primal:
                    best_primal, best_xhat = primal, estimate.xhat
                if stabilizations:
                    console.log(
                        f"Batch {batch}: {stabilizations} stabilizations."
                    )
                lp_gap = relative_gap(best_dual, best_primal)
                if self.primal_heuristic and (
                    heuristic_started or lp_gap <= self.heuristic_start_gap
                ):
                    if not heuristic_started:
                        console.log(
                            f"Relaxation gap {lp_gap:.3g} reached, "
                            "starting primal heuristic."
                        )
                        heuristic_started = True
                    incumbent, spent = self._improve(
                        aug, state, random_state, incumbent, rounds_used
                    )
                    rounds_used += spent
                    if spent:
                        console.log(
                            "Best integer objective "
                            f"{incumbent.objective:.6g}."
                        )
                integer_bound = None
                if incumbent is not None:
                    integer_bound = incumbent.objective
                _check_sandwich(best_dual, best_primal, integer_bound)
                wall_ms = int(1000 * (time.perf_counter() - start))
                trace.append(
                    make_record(
                        sweep=n_sweeps,
                        wall_ms=wall_ms,
                        temperature=temperature,
                        dual_bound=best_dual,
                        primal_bound=best_primal,
                        integer_bound=integer_bound,
                        max_residual=np.max(residuals, initial=0.0),
                        stabilizations=stabilizations,
                        active_fraction=(
                            1.0 if active is None else active.active_fraction
                        ),
                        delta=delta,
                        truncation_error=error,
                    )
                )
                run_status = self._stopping(
                    best_dual,
                    lp_gap,
                    integer_bound,
                    heuristic_started,
                    rounds_used,
                    n_sweeps,
                    time.perf_counter() - start,
                )
                if run_status is not None:
                    break
                if self.scheduler == "feasibility":
                    new_temperature = feasibility_step(
                        temperature, residuals, schedule
                    )
                else:
                    new_temperature, exhausted = gap_step(
                        temperature,
                        smoothed_end,
                        estimate.objective,
                        estimate.entropy,
                        schedule,
                    )
                delta = update_delta(smoothed_start - smoothed_end)
                if new_temperature < temperature:
                    state.set_temperature(aug, new_temperature)
                    console.log(
                        f"Sweep {n_sweeps}: temperature lowered "
                        f"to {new_temperature:.3g}."
                    )
                batch += 1
            state.fold(aug)
            if incumbent is None:
                incumbent = heuristic_loop(aug, state, random_state, budget=0)
            self.trace_ = trace
            self.n_sweeps_ = n_sweeps
            self.status_ = run_status
            self.temperature_ = state.temperature
            self.smoothing_exhausted_ = exhausted
            self.primal_bound_ = best_primal
            self._finalize(
                instance, base, aug, best_lam, best_xhat, incumbent
            )
            console.log(
                f"Run stopped ({run_status}) after {n_sweeps} sweeps: "
                f"dual bound {self.dual_bound_:.6g}, "
                f"primal bound {self.primal_bound_:.6g}."
            )
        if run_status in LIMIT_STATUSES:
            warnings.warn(
                f"Relative gap {self.relative_gap_:.3g} did not reach "
                f"the target {self.target_gap:.3g} ({run_status}).",
                ConvergenceWarning,
            )
        return self

    def _improve(
        self,
        aug: AugmentedInstance,
        state: DualState,
        random_state: np.random.RandomState,
        incumbent: Optional[IntegerSolution],
        rounds_used: int,
    ):
        budget = min(
            self.proposals_per_batch, self.heuristic_rounds - rounds_used
        )
        if budget <= 0:
            return incumbent, 0
        if incumbent is None:
            incumbent = heuristic_loop(
                aug, state, random_state, budget=budget - 1
            )
        else:
            incumbent = heuristic_loop(
                aug, state, random_state, budget=budget, incumbent=incumbent
            )
        return incumbent, budget

    def _stopping(
        self,
        dual: float,
        lp_gap: float,
        integer_bound: Optional[float],
        heuristic_started: bool,
        rounds_used: int,
        n_sweeps: int,
        elapsed: float,
    ) -> Optional[str]:
        if self.primal_heuristic:
            if (
                integer_bound is not None
                and relative_gap(dual, integer_bound) <= self.target_gap
            ):
                return "converged"
            if heuristic_started and rounds_used >= self.heuristic_rounds:
                return "heuristic_budget"
        elif lp_gap <= self.target_gap:
            return "converged"
        if n_sweeps >= self.max_sweeps:
            return "max_sweeps"
        if self.max_seconds is not None and elapsed >= self.max_seconds:
            return "max_seconds"
        return None


def _check_sandwich(
    dual: float, primal: float, integer_bound: Optional[float]
):
    tolerance = BOUND_TOL * max(1.0, abs(dual))
    for name, value in (("primal", primal), ("integer", integer_bound)):
        if value is not None and value > dual + tolerance:
            raise InconsistencyError(
                f"The {name} bound {value!r} exceeds the dual bound {dual!r}."
            )
