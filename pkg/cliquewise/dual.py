"""Reduced costs, dual bounds and the clique-wise dual sweeps.

Every sweep visits the cliques in ascending index order.
Ties in an argmax are broken toward the lowest variable index.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from cliquewise.error import NumericalUnderflow, SignSetViolation
from cliquewise.instance import AugmentedInstance

# Largest exponent argument that does not overflow float64
_MAX_EXP = 700.0


def reduced_costs(aug: AugmentedInstance, lam: np.ndarray) -> np.ndarray:
    """Computes c^λ_i = c_i − Σ_{j∈J_i} λ_j over all n+m variables.

    Parameters
    ----------
    aug: AugmentedInstance
        Relaxation to reparametrize.
    lam: ndarray of shape (m,)
        Dual vector.

    Returns
    -------
    ndarray of shape (n+m,)
        Reduced costs.
    """
    lam = np.asarray(lam, dtype=np.float64)
    if lam.shape != (aug.m,):
        raise ValueError(f"Expected {aug.m} dual variables, got {lam.shape}.")
    return aug.costs - aug.constraint_matrix.T @ lam


def dual_value(aug: AugmentedInstance, lam: np.ndarray) -> float:
    """Lagrange dual D(λ) = Σ_j λ_j + Σ_i max(0, c^λ_i).
    An upper bound on the relaxation optimum for every λ."""
    reduced = reduced_costs(aug, lam)
    return float(np.sum(lam) + np.sum(np.maximum(reduced, 0.0)))


def smoothed_terms(reduced: np.ndarray, temperature: float) -> np.ndarray:
    """Per-coordinate maximum of c·x + T·H(x) over x ∈ [0, 1]."""
    reduced = np.asarray(reduced, dtype=np.float64)
    below = temperature * np.exp(np.minimum(reduced, 0.0) / temperature)
    return np.where(reduced <= 0, below, reduced + temperature)


def smoothed_dual_value(
    aug: AugmentedInstance, lam: np.ndarray, temperature: float
) -> float:
    """Smoothed dual D^T(λ) = Σ_j λ_j + Σ_i φ_T(c^λ_i).

    For non-positive reduced costs φ_T(c) = T·exp(c/T),
    positive ones contribute c + T.

    Parameters
    ----------
    aug: AugmentedInstance
        Relaxation.
    lam: ndarray of shape (m,)
        Dual vector.
    temperature: float
        Smoothing temperature T > 0.
    """
    if temperature <= 0:
        raise ValueError("Temperature has to be positive.")
    reduced = reduced_costs(aug, lam)
    return float(np.sum(lam) + np.sum(smoothed_terms(reduced, temperature)))


def subgradient(
    aug: AugmentedInstance,
    lam: np.ndarray,
    xstar: np.ndarray,
    tol: float = 1e-9,
) -> np.ndarray:
    """Subgradient g_j = 1 − Σ_{i∈K̄_j} x*_i of the dual at λ.

    Parameters
    ----------
    aug: AugmentedInstance
        Relaxation.
    lam: ndarray of shape (m,)
        Dual vector.
    xstar: ndarray of shape (n+m,)
        Member of the Sign set of c^λ: 1 where c^λ > 0,
        0 where c^λ < 0 and anything in [0, 1] where c^λ = 0.
    tol: float, default 1e-9
        Reduced costs within tol of zero count as zero.

    Raises
    ------
    SignSetViolation
        If xstar does not belong to the Sign set.
    """
    reduced = reduced_costs(aug, lam)
    xstar = np.asarray(xstar, dtype=np.float64)
    if xstar.shape != reduced.shape:
        raise ValueError(
            f"Expected a point of length {len(reduced)}, got {xstar.shape}."
        )
    positive = reduced > tol
    negative = reduced < -tol
    admissible = np.where(
        positive,
        xstar == 1.0,
        np.where(negative, xstar == 0.0, (xstar >= 0.0) & (xstar <= 1.0)),
    )
    if not np.all(admissible):
        i = int(np.flatnonzero(~admissible)[0])
        raise SignSetViolation(i, float(xstar[i]), float(reduced[i]))
    return 1.0 - aug.constraint_matrix @ xstar


def sign_indicator(reduced: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """0/1 member of the Sign set choosing 1 for every
    reduced cost that is numerically non-negative."""
    return (np.asarray(reduced) >= -tol).astype(np.float64)


@dataclass
class SweepStats:
    stabilizations: int = 0
    max_residual: float = 0.0


@dataclass
class DualState:
    """Iterate of a dual run.

    In the exp-domain the dual is carried in two parts,
    the effective dual is ``lam − T·log(alpha)``.
    `reduced` always holds the reduced costs of the plain `lam`,
    and ``x = exp(reduced/T)·Π_{j∈J_i} alpha_j``.

    Parameters
    ----------
    lam: ndarray of shape (m,)
        Dual variables.
    reduced: ndarray of shape (n+m,)
        Cached reduced costs of `lam`.
    alpha: ndarray of shape (m,)
        Exponentiated dual residue, all ones outside the exp-domain.
    x: ndarray of shape (n+m,)
        Cached primal iterate.
    temperature: float
        Smoothing temperature.
    sweep_count: int
        Number of completed sweeps.
    """

    lam: np.ndarray
    reduced: np.ndarray
    alpha: np.ndarray
    x: np.ndarray
    temperature: float
    sweep_count: int = 0

    @classmethod
    def initial(
        cls,
        aug: AugmentedInstance,
        temperature: float = 1.0,
        lam: Optional[np.ndarray] = None,
    ) -> "DualState":
        if temperature <= 0:
            raise ValueError("Temperature has to be positive.")
        if lam is None:
            lam = np.zeros(aug.m)
        lam = np.array(lam, dtype=np.float64)
        reduced = reduced_costs(aug, lam)
        state = cls(
            lam=lam,
            reduced=reduced,
            alpha=np.ones(aug.m),
            x=np.empty_like(reduced),
            temperature=float(temperature),
        )
        state.x = state.materialize(aug)
        return state

    def effective_lambda(self) -> np.ndarray:
        return self.lam - self.temperature * np.log(self.alpha)

    def effective_reduced(self, aug: AugmentedInstance) -> np.ndarray:
        log_alpha = np.log(self.alpha)
        return self.reduced + self.temperature * (
            aug.constraint_matrix.T @ log_alpha
        )

    def materialize(self, aug: AugmentedInstance) -> np.ndarray:
        """Recomputes x = exp(c^λ̂/T) from the effective dual."""
        exponent = self.effective_reduced(aug) / self.temperature
        return np.exp(np.minimum(exponent, _MAX_EXP))

    def fold(self, aug: AugmentedInstance):
        """Pushes alpha into lam, after this alpha is all ones."""
        if np.all(self.alpha == 1.0):
            return
        self.reduced = self.effective_reduced(aug)
        self.lam = self.effective_lambda()
        self.alpha = np.ones_like(self.alpha)

    def refresh(self, aug: AugmentedInstance):
        """Recomputes reduced costs from scratch and rebuilds x,
        removing drift of the incremental updates."""
        self.reduced = reduced_costs(aug, self.lam)
        self.x = self.materialize(aug)

    def set_temperature(self, aug: AugmentedInstance, temperature: float):
        if temperature <= 0:
            raise ValueError("Temperature has to be positive.")
        self.fold(aug)
        self.temperature = float(temperature)
        self.x = self.materialize(aug)


def alg1_sweep(state: DualState, aug: AugmentedInstance) -> float:
    """One sweep of non-smooth dual coordinate descent.

    For every clique the largest reduced cost in K̄_j is absorbed
    into λ_j, so that afterwards max_{i∈K̄_j} c^λ_i = 0.

    Returns
    -------
    float
        Largest absolute change of a dual variable, 0 at a fixed point.
    """
    max_change = 0.0
    for j, members in enumerate(aug.cliques):
        costs = state.reduced[members]
        best = costs[np.argmax(costs)]
        state.lam[j] += best
        state.reduced[members] = costs - best
        max_change = max(max_change, abs(best))
    state.sweep_count += 1
    return max_change


def alg2_sweep(x: np.ndarray, aug: AugmentedInstance) -> np.ndarray:
    """One sweep of the naive Bregman method.
    Every clique sum is normalized to one, a new array is returned.

    Raises
    ------
    NumericalUnderflow
        If a clique sum is numerically zero.
    """
    x = np.array(x, dtype=np.float64)
    if np.any(x < 0):
        raise ValueError("The naive iteration needs a non-negative point.")
    for j, members in enumerate(aug.cliques):
        total = x[members].sum()
        if not (total > 0.0 and np.isfinite(total)):
            raise NumericalUnderflow(j, float(total))
        x[members] /= total
    return x


def alg3_update(state: DualState, aug: AugmentedInstance, j: int) -> float:
    """Log-domain update of a single clique.

    Returns
    -------
    float
        Residual |s − 1| of the clique sum before the update.
    """
    members = aug.cliques[j]
    temperature = state.temperature
    costs = state.reduced[members]
    shift = temperature * logsumexp(costs / temperature)
    state.lam[j] += shift
    state.reduced[members] = costs - shift
    return float(abs(np.expm1(min(shift / temperature, _MAX_EXP))))


def alg3_sweep(state: DualState, aug: AugmentedInstance) -> float:
    """One sweep of the Bregman method in the log-domain.

    After the sweep all reduced costs are non-positive,
    and exp(c^λ/T) equals one naive sweep applied to the previous
    exp(c^λ/T).

    Returns
    -------
    float
        Largest clique residual met during the sweep.
    """
    if state.temperature <= 0:
        raise ValueError("Temperature has to be positive.")
    max_residual = 0.0
    for j in range(aug.m):
        max_residual = max(max_residual, alg3_update(state, aug, j))
    state.sweep_count += 1
    return max_residual


def _stabilize(state: DualState, aug: AugmentedInstance, j: int):
    state.fold(aug)
    members = aug.cliques[j]
    exponent = state.reduced[members] / state.temperature
    state.x[members] = np.exp(np.minimum(exponent, _MAX_EXP))


def alg4_sweep(
    state: DualState,
    aug: AugmentedInstance,
    tau_stab: float,
    active_sets=None,
) -> SweepStats:
    """One sweep of the stabilized Bregman method in the exp-domain.

    Parameters
    ----------
    state: DualState
        Iterate with consistent lam, alpha and x, updated in place.
    aug: AugmentedInstance
        Relaxation.
    tau_stab: float
        Stabilization threshold, α_j + 1/α_j ≥ tau_stab folds
        all exponentiated duals into λ.
    active_sets: ActiveSets, optional
        When given, clique sums only run over the active members.

    Returns
    -------
    SweepStats
        Number of stabilizations and the largest clique residual.
    """
    if state.temperature <= 0:
        raise ValueError("Temperature has to be positive.")
    stats = SweepStats()
    for j, members in enumerate(aug.cliques):
        if active_sets is not None:
            members = active_sets.members[j]
        total = state.x[members].sum()
        if not (total > 0.0 and np.isfinite(total)):
            # Sum over the active set vanished
            stats.max_residual = max(stats.max_residual, 1.0)
            state.fold(aug)
            alg3_update(state, aug, j)
            _stabilize(state, aug, j)
            stats.stabilizations += 1
            if active_sets is not None:
                active_sets.restart(state, aug)
            continue
        stats.max_residual = max(stats.max_residual, abs(total - 1.0))
        alpha = state.alpha[j] / total
        state.alpha[j] = alpha
        if alpha + 1.0 / alpha < tau_stab:
            state.x[members] /= total
        else:
            _stabilize(state, aug, j)
            stats.stabilizations += 1
            if active_sets is not None:
                active_sets.restart(state, aug)
    state.sweep_count += 1
    return stats
