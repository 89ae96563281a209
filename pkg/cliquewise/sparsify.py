"""Active-set truncation of the clique sums of the exp-domain sweep.

Variables whose value is negligible are left out of the clique sums
until the next refresh. The heuristic variant uses a relative threshold
inside each clique, the accurate variant per-variable thresholds that
bound the change of the smoothed dual by a budget δ.
"""

from dataclasses import dataclass
from typing import List, Literal, Optional

import numpy as np

from cliquewise.dual import DualState
from cliquewise.instance import AugmentedInstance

HEURISTIC_FACTOR = 1e-8


@dataclass
class ActiveSets:
    """Members of every clique that take part in the clique sums.

    Parameters
    ----------
    members: list of ndarray
        Active subset A_j ⊆ K̄_j for every clique, stored contiguously.
    thresholds: ndarray of shape (n+m,), optional
        Per-variable thresholds ε_i of the accurate variant.
    delta: float
        Truncation budget the thresholds were derived from.
    refresh_batch: int
        Index of the batch the sets were built in.
    mode: 'heuristic' or 'accurate'
        Variant the sets were built with.
    """

    members: List[np.ndarray]
    thresholds: Optional[np.ndarray] = None
    delta: float = 0.0
    refresh_batch: int = 0
    mode: Literal["heuristic", "accurate"] = "heuristic"
    full_size: int = 0

    @property
    def active_fraction(self) -> float:
        if not self.full_size:
            return 1.0
        total = sum(len(members) for members in self.members)
        return total / self.full_size

    def truncated(self, aug: AugmentedInstance) -> np.ndarray:
        """Mask of variables left out of at least one of their cliques."""
        active_count = np.zeros(aug.size, dtype=np.int64)
        for members in self.members:
            active_count[members] += 1
        return active_count < aug.membership_counts

    def restart(self, state: DualState, aug: AugmentedInstance):
        """Rebuilds the sets after a stabilization.
        Only the accurate variant needs this to keep its bound."""
        if self.mode != "accurate":
            return
        state.x = state.materialize(aug)
        self.members = _select(aug, state.x, self.thresholds)


def _select(
    aug: AugmentedInstance, x: np.ndarray, thresholds: np.ndarray
) -> List[np.ndarray]:
    members = []
    for clique in aug.cliques:
        values = x[clique]
        keep = values >= thresholds[clique]
        keep[np.argmax(values)] = True
        members.append(clique[keep])
    return members


def heuristic_refresh(
    aug: AugmentedInstance,
    x: np.ndarray,
    refresh_batch: int = 0,
    factor: float = HEURISTIC_FACTOR,
) -> ActiveSets:
    """Keeps the members of each clique that are at least
    `factor` times the largest value in the clique.

    Parameters
    ----------
    aug: AugmentedInstance
        Relaxation.
    x: ndarray of shape (n+m,)
        Current non-negative iterate.
    refresh_batch: int, default 0
        Batch index to record on the sets.
    factor: float, default 1e-8
        Relative threshold.
    """
    x = np.asarray(x, dtype=np.float64)
    members = []
    for clique in aug.cliques:
        values = x[clique]
        keep = values >= factor * values.max()
        keep[np.argmax(values)] = True
        members.append(clique[keep])
    return ActiveSets(
        members=members,
        refresh_batch=refresh_batch,
        mode="heuristic",
        full_size=int(aug.constraint_matrix.nnz),
    )


def accurate_thresholds(
    aug: AugmentedInstance, temperature: float, tau_stab: float, delta: float
) -> np.ndarray:
    """Thresholds ε_i = δ / (T·(n+m)·tau_stab^|J_i|).

    Truncating every variable below its threshold changes the smoothed
    dual by at most δ as long as no exponentiated dual leaves
    (1/tau_stab, tau_stab). Overflowing powers give ε_i = 0.
    """
    if temperature <= 0:
        raise ValueError("Temperature has to be positive.")
    if tau_stab <= 1:
        raise ValueError("tau_stab has to be greater than one.")
    if delta < 0:
        raise ValueError("delta has to be non-negative.")
    if delta == 0:
        return np.zeros(aug.size)
    with np.errstate(over="ignore"):
        power = np.power(
            float(tau_stab), aug.membership_counts.astype(np.float64)
        )
        thresholds = delta / (temperature * aug.size * power)
    thresholds[~np.isfinite(power)] = 0.0
    return thresholds


def accurate_refresh(
    aug: AugmentedInstance,
    x: np.ndarray,
    temperature: float,
    tau_stab: float,
    delta: float,
    refresh_batch: int = 0,
) -> ActiveSets:
    """Keeps every variable at or above its accurate threshold,
    the largest member of every clique always stays."""
    thresholds = accurate_thresholds(aug, temperature, tau_stab, delta)
    members = _select(aug, np.asarray(x, dtype=np.float64), thresholds)
    return ActiveSets(
        members=members,
        thresholds=thresholds,
        delta=delta,
        refresh_batch=refresh_batch,
        mode="accurate",
        full_size=int(aug.constraint_matrix.nnz),
    )


def update_delta(previous_batch_improvement: Optional[float]) -> float:
    """δ = 0.1 × the smoothed dual improvement of the previous batch,
    zero when there is no history."""
    if previous_batch_improvement is None:
        return 0.0
    return 0.1 * max(0.0, float(previous_batch_improvement))


def truncation_error(
    aug: AugmentedInstance, state: DualState, active_sets: ActiveSets
) -> float:
    """Measured D^T − D̄: the smoothed dual mass of the truncated
    variables at the current effective dual."""
    x = state.materialize(aug)
    mask = active_sets.truncated(aug)
    return float(state.temperature * np.sum(x[mask]))
