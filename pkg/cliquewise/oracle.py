"""Independent ground truth for tests and benchmarks."""

import warnings
from typing import Callable, NamedTuple, Union

import numpy as np
from sklearn.exceptions import ConvergenceWarning

from cliquewise.error import SizeGuardError
from cliquewise.instance import AugmentedInstance, ProblemInstance
from cliquewise.primal import IntegerSolution
from cliquewise.solvers.bregman import BregmanSolver

MAX_BRUTE_FORCE_NODES = 25


def brute_force_mwis(
    instance: ProblemInstance, max_nodes: int = MAX_BRUTE_FORCE_NODES
) -> IntegerSolution:
    """Exact maximum-weight independent set by branch and bound.

    Only nodes with positive cost are branched on. Among optimal sets
    the lexicographically smallest one is returned.

    Parameters
    ----------
    instance: ProblemInstance
        Instance to solve, cliques are not used.
    max_nodes: int, default 25
        Size guard.

    Raises
    ------
    SizeGuardError
        If the instance has more than `max_nodes` nodes.
    """
    n = instance.node_count
    if n > max_nodes:
        raise SizeGuardError(
            f"Brute force is limited to {max_nodes} nodes, got {n}."
        )
    costs = instance.costs.tolist()
    candidates = [i for i in range(n) if costs[i] > 0]
    neighbor_masks = [0] * n
    for u, v in instance.edges.tolist():
        neighbor_masks[u] |= 1 << v
        neighbor_masks[v] |= 1 << u
    remaining = [0.0] * (len(candidates) + 1)
    for k in range(len(candidates) - 1, -1, -1):
        remaining[k] = remaining[k + 1] + costs[candidates[k]]
    best_value = 0.0
    best_set = []

    def branch(k: int, chosen_mask: int, value: float, chosen: list):
        nonlocal best_value, best_set
        if value > best_value:
            best_value, best_set = value, list(chosen)
        if k == len(candidates) or value + remaining[k] <= best_value:
            return
        node = candidates[k]
        if not neighbor_masks[node] & chosen_mask:
            chosen.append(node)
            branch(
                k + 1, chosen_mask | (1 << node), value + costs[node], chosen
            )
            chosen.pop()
        branch(k + 1, chosen_mask, value, chosen)

    branch(0, 0, 0.0, [])
    return IntegerSolution.from_selection(instance, best_set)


def finite_diff_grad(
    function: Callable[[np.ndarray], float],
    point: np.ndarray,
    step: float = 1e-6,
) -> np.ndarray:
    """Central finite difference gradient of a scalar function."""
    if step <= 0:
        raise ValueError("step has to be positive.")
    point = np.asarray(point, dtype=np.float64)
    gradient = np.zeros_like(point)
    for i in range(len(point)):
        forward = point.copy()
        forward[i] += step
        backward = point.copy()
        backward[i] -= step
        gradient[i] = (function(forward) - function(backward)) / (2 * step)
    return gradient


class LPBracket(NamedTuple):
    dual_bound: float
    primal_bound: float
    xhat: np.ndarray
    converged: bool


def lp_reference(
    problem: Union[ProblemInstance, AugmentedInstance],
    target_gap: float = 1e-6,
    max_sweeps: int = 200_000,
) -> LPBracket:
    """Brackets the optimum of the clique relaxation.

    Runs the exp-domain solver with gap scheduling until the relative
    gap is below `target_gap`. By weak duality the relaxation optimum
    lies between the two bounds.

    Parameters
    ----------
    problem: ProblemInstance or AugmentedInstance
        Instance whose clique relaxation is bracketed.
    target_gap: float, default 1e-6
        Relative width of the bracket.
    max_sweeps: int, default 200_000
        Sweep limit, the achieved bracket is returned when it is hit.

    Returns
    -------
    LPBracket
        Dual and primal bound, the projected point over the nodes,
        and whether the target was reached.
    """
    if target_gap <= 0:
        raise ValueError("target_gap has to be positive.")
    if isinstance(problem, AugmentedInstance):
        problem = problem.base
    solver = BregmanSolver(
        domain="exp",
        scheduler="gap",
        target_gap=target_gap,
        max_sweeps=max_sweeps,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        solver.fit(problem)
    converged = solver.status_ == "converged"
    if not converged:
        warnings.warn(
            f"Bracket [{solver.primal_bound_!r}, {solver.dual_bound_!r}] "
            f"is wider than the target gap {target_gap}.",
            ConvergenceWarning,
        )
    return LPBracket(
        dual_bound=solver.dual_bound_,
        primal_bound=solver.primal_bound_,
        xhat=solver.primal_estimate_,
        converged=converged,
    )
