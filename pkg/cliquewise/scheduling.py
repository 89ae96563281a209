from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import xlogy

from cliquewise.dual import DualState, alg1_sweep
from cliquewise.error import InconsistencyError
from cliquewise.instance import AugmentedInstance

# Slack allowed on weak duality before the bounds count as inconsistent
WEAK_DUALITY_TOL = 1e-6


@dataclass(frozen=True)
class ScheduleConfig:
    """Temperature control parameters.

    Parameters
    ----------
    T0: float, default 0.01
        Starting temperature.
    tau_batch: int, default 50
        Number of sweeps between two scheduler decisions.
    tau_drop: float, default 0.5
        Factor of the feasibility scheduler, in (0, 1).
    tau_feas: float, default 0.01
        Largest clique residual that lets the feasibility scheduler
        lower the temperature.
    tau_gap: float, default 0.5
        Factor of the duality gap scheduler, in (0, 1).
    T_floor: float, default 1e-9
        Temperatures never drop below this value.
    """

    T0: float = 0.01
    tau_batch: int = 50
    tau_drop: float = 0.5
    tau_feas: float = 0.01
    tau_gap: float = 0.5
    T_floor: float = 1e-9

    def __post_init__(self):
        if not self.T0 > 0:
            raise ValueError("T0 has to be positive.")
        if int(self.tau_batch) != self.tau_batch or self.tau_batch < 1:
            raise ValueError("tau_batch has to be a positive integer.")
        if not 0 < self.tau_drop < 1:
            raise ValueError("tau_drop has to lie in (0, 1).")
        if not self.tau_feas >= 0:
            raise ValueError("tau_feas has to be non-negative.")
        if not 0 < self.tau_gap < 1:
            raise ValueError("tau_gap has to lie in (0, 1).")
        if not self.T_floor > 0:
            raise ValueError("T_floor has to be positive.")


@dataclass
class PrimalEstimate:
    """Feasible fractional point of the clique relaxation.

    Parameters
    ----------
    xhat: ndarray of shape (n+m,)
        Point in [0, 1] with all clique sums equal to one.
    objective: float
        <c, xhat> under the costs the projection was computed for.
    entropy: float
        H(xhat) = −Σ_i (xhat_i log xhat_i − xhat_i).
    max_residual_source: float
        Largest clique residual of the point before projection.
    """

    xhat: np.ndarray
    objective: float
    entropy: float
    max_residual_source: float


def entropy(x: np.ndarray) -> float:
    """H(x) = −Σ (x log x − x) with 0·log 0 = 0."""
    x = np.asarray(x, dtype=np.float64)
    return float(np.sum(x - xlogy(x, x)))


def feasibility_residuals(
    aug: AugmentedInstance, x: np.ndarray
) -> np.ndarray:
    """r_j = |Σ_{i∈K̄_j} x_i − 1| for every clique."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (aug.size,):
        raise ValueError(f"Expected a point of length {aug.size}.")
    return np.abs(aug.constraint_matrix @ x - 1.0)


def feasibility_step(
    temperature: float, residuals: np.ndarray, cfg: ScheduleConfig
) -> float:
    """Drops the temperature by tau_drop once the clique constraints
    are satisfied up to tau_feas."""
    max_residual = float(np.max(residuals, initial=0.0))
    if max_residual <= cfg.tau_feas:
        return max(cfg.T_floor, cfg.tau_drop * temperature)
    return temperature


def truncation_projection(
    aug: AugmentedInstance,
    x: np.ndarray,
    costs: np.ndarray = None,
) -> PrimalEstimate:
    """Maps a non-negative point onto a feasible point of the relaxation.

    All slacks start at one, then every real variable takes as much as
    the slacks of its cliques still allow and decrements them.
    The map is the identity on feasible points and moves no coordinate
    by more than the largest residual of the input.

    Parameters
    ----------
    aug: AugmentedInstance
        Relaxation.
    x: ndarray of shape (n+m,)
        Non-negative point, its slack coordinates are ignored.
    costs: ndarray of shape (n+m,), optional
        Costs for the objective, the original costs by default.

    Returns
    -------
    PrimalEstimate
        The projected point with objective and entropy.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (aug.size,):
        raise ValueError(f"Expected a point of length {aug.size}.")
    if np.any(x < 0):
        raise ValueError("Projection needs a non-negative point.")
    n = aug.n
    xhat = np.zeros(aug.size)
    slacks = xhat[n:]
    slacks[:] = 1.0
    for i in range(n):
        cliques = aug.incidence[i]
        value = min(x[i], slacks[cliques].min())
        value = max(value, 0.0)
        xhat[i] = value
        slacks[cliques] -= value
    np.clip(slacks, 0.0, 1.0, out=slacks)
    if costs is None:
        costs = aug.original_costs
    residuals = feasibility_residuals(aug, x)
    return PrimalEstimate(
        xhat=xhat,
        objective=float(np.dot(costs, xhat)),
        entropy=entropy(xhat),
        max_residual_source=float(np.max(residuals, initial=0.0)),
    )


def gap_step(
    temperature: float,
    smoothed_dual: float,
    primal_objective: float,
    entropy: float,
    cfg: ScheduleConfig,
) -> Tuple[float, bool]:
    """Lowers the temperature proportionally to the duality gap.

    T' = min(T, tau_gap·(D^T − <c, x̂>)/H(x̂)), never below T_floor.

    Returns
    -------
    temperature: float
        New temperature.
    exhausted: bool
        True when smoothing cannot make further progress,
        i.e. the entropy vanished or the candidate hit the floor.

    Raises
    ------
    InconsistencyError
        If the bounds violate weak duality beyond tolerance.
    """
    if entropy < 0:
        raise ValueError("Entropy has to be non-negative.")
    slack = smoothed_dual - primal_objective - temperature * entropy
    if slack < -WEAK_DUALITY_TOL * max(1.0, abs(smoothed_dual)):
        raise InconsistencyError(
            f"Smoothed dual {smoothed_dual!r} lies below the smoothed "
            f"primal value {primal_objective + temperature * entropy!r}."
        )
    if entropy < 1e-12:
        return cfg.T_floor, True
    candidate = cfg.tau_gap * (smoothed_dual - primal_objective) / entropy
    if candidate < cfg.T_floor:
        return cfg.T_floor, True
    return min(temperature, candidate), False


def relative_gap(dual_bound: float, primal_bound: float) -> float:
    """(D − P) / max(|D|, 1e-30)"""
    return (dual_bound - primal_bound) / max(abs(dual_bound), 1e-30)


def fractional_share(x: np.ndarray, n: int, tol: float = 1e-6) -> float:
    """Share of the first n coordinates lying strictly inside (0, 1)."""
    real = np.asarray(x, dtype=np.float64)[:n]
    if not len(real):
        return 0.0
    inside = (real > tol) & (real < 1.0 - tol)
    return float(np.mean(inside))


def initialize(
    aug: AugmentedInstance,
) -> Tuple[AugmentedInstance, np.ndarray]:
    """Runs one non-smooth sweep from λ = 0 and rescales the costs.

    Returns
    -------
    aug: AugmentedInstance
        Reparametrized relaxation whose costs lie in [−1, 0].
    lam: ndarray of shape (m,)
        Dual vector of the base relaxation the new costs correspond to.
    """
    state = DualState.initial(aug, temperature=1.0)
    alg1_sweep(state, aug)
    reduced = np.minimum(state.reduced, 0.0)
    scale = float(np.max(np.abs(reduced), initial=0.0))
    if scale == 0.0:
        scale = 1.0
    lifted = aug.lift_duals(state.lam)
    scaled = AugmentedInstance(
        base=aug.base,
        costs=reduced / scale,
        original_index=aug.original_index,
        scale_factor=aug.scale_factor * scale,
        dual_shift=lifted,
    )
    return scaled, lifted
