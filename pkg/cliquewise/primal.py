"""Integer solutions: greedy generation over reduced costs
and exact recombination of two solutions with a minimum cut."""

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Set, Tuple, Union

import networkx as nx
import numpy as np
from networkx.algorithms.flow import preflow_push
from sklearn.utils import check_random_state

from cliquewise.error import InconsistencyError, InfeasibleSolutionError
from cliquewise.instance import AugmentedInstance, ProblemInstance

SOURCE = "source"
SINK = "sink"


def violated_edge(
    instance: ProblemInstance, selected: Iterable[int]
) -> Optional[Tuple[int, int]]:
    """First edge with both endpoints selected, None for independent sets."""
    mask = np.zeros(instance.node_count, dtype=bool)
    mask[np.asarray(list(selected), dtype=np.int64)] = True
    if not instance.edge_count:
        return None
    both = mask[instance.edges[:, 0]] & mask[instance.edges[:, 1]]
    if not np.any(both):
        return None
    u, v = instance.edges[np.argmax(both)].tolist()
    return u, v


@dataclass(frozen=True)
class IntegerSolution:
    """0/1 assignment given by its selected nodes.

    Parameters
    ----------
    selected: tuple of int
        Selected node indices in ascending order.
    objective: float
        Sum of the original costs of the selected nodes.
    feasible: bool
        Whether the selected nodes are pairwise non-adjacent.
    """

    selected: Tuple[int, ...]
    objective: float
    feasible: bool = True

    @classmethod
    def from_selection(
        cls, instance: ProblemInstance, selected: Iterable[int]
    ) -> "IntegerSolution":
        selected = tuple(sorted({int(i) for i in selected}))
        objective = math.fsum(instance.costs[list(selected)].tolist())
        feasible = violated_edge(instance, selected) is None
        return cls(selected, objective, feasible)

    def indicator(self, n: int) -> np.ndarray:
        x = np.zeros(n)
        x[list(self.selected)] = 1.0
        return x

    def lift(
        self, instance: ProblemInstance, original_index: np.ndarray
    ) -> "IntegerSolution":
        """Maps a solution of a stripped instance back onto `instance`."""
        selected = np.asarray(original_index)[list(self.selected)]
        return IntegerSolution.from_selection(instance, selected.tolist())


def greedy_generate(
    aug: AugmentedInstance, reduced_costs: np.ndarray, random_state=None
) -> IntegerSolution:
    """Generates an independent set clique by clique.

    Cliques are visited in a random order. A clique that already holds
    a selected variable is skipped, otherwise its undecided variable
    with the largest reduced cost is selected and all of its graph
    neighbors are fixed to zero. Picking a slack selects no node.

    Parameters
    ----------
    aug: AugmentedInstance
        Relaxation, the solution refers to the nodes of ``aug.base``.
    reduced_costs: ndarray of shape (n+m,)
        Costs steering the choice, usually reduced costs of a dual run.
    random_state: int, RandomState or None
        Seed of the clique order.

    Returns
    -------
    IntegerSolution
        Independent set valued with the original costs.
    """
    random_state = check_random_state(random_state)
    reduced_costs = np.asarray(reduced_costs, dtype=np.float64)
    n = aug.n
    # -1 marks undecided variables
    x = np.full(aug.size, -1, dtype=np.int8)
    for j in random_state.permutation(aug.m):
        members = aug.cliques[j]
        values = x[members]
        if np.any(values == 1):
            continue
        undecided = members[values == -1]
        chosen = undecided[np.argmax(reduced_costs[undecided])]
        x[chosen] = 1
        if chosen < n:
            x[aug.base.neighbors(chosen)] = 0
    selected = np.flatnonzero(x[:n] == 1)
    return IntegerSolution.from_selection(aug.base, selected.tolist())


@dataclass
class FusionSubproblem:
    """Bipartite MWIS over the nodes two solutions disagree on.

    Parameters
    ----------
    nodes: ndarray
        V′, nodes selected by exactly one of the solutions.
    side_one: ndarray
        V¹, nodes of V′ selected by the first solution.
    side_two: ndarray
        V², nodes of V′ selected by the second solution.
    edges: ndarray of shape (k, 2)
        E′, edges inside V′ oriented from V¹ to V².
    weights: ndarray
        Oriented-form weights over `nodes`, c_i on V¹ and −c_i on V².
    frozen: tuple of int
        Nodes selected by both solutions.
    """

    nodes: np.ndarray
    side_one: np.ndarray
    side_two: np.ndarray
    edges: np.ndarray
    weights: np.ndarray
    frozen: Tuple[int, ...]


def build_fusion(
    instance: ProblemInstance,
    first: IntegerSolution,
    second: IntegerSolution,
) -> FusionSubproblem:
    """Restricts the problem to the coordinates the solutions differ in.

    Raises
    ------
    InfeasibleSolutionError
        If one of the solutions is not independent,
        the error carries the violated edge.
    """
    for solution in (first, second):
        edge = violated_edge(instance, solution.selected)
        if edge is not None:
            raise InfeasibleSolutionError(edge)
    n = instance.node_count
    a = first.indicator(n).astype(bool)
    b = second.indicator(n).astype(bool)
    side_one = np.flatnonzero(a & ~b)
    side_two = np.flatnonzero(b & ~a)
    nodes = np.union1d(side_one, side_two)
    in_one = np.zeros(n, dtype=bool)
    in_one[side_one] = True
    in_two = np.zeros(n, dtype=bool)
    in_two[side_two] = True
    edges = instance.edges
    if len(edges):
        u, v = edges[:, 0], edges[:, 1]
        inside = (in_one[u] | in_two[u]) & (in_one[v] | in_two[v])
        edges = edges[inside]
        if np.any(in_one[edges[:, 0]] == in_one[edges[:, 1]]):
            raise InconsistencyError("Fusion subproblem is not bipartite.")
        flip = in_two[edges[:, 0]]
        edges = np.where(flip[:, None], edges[:, ::-1], edges)
    else:
        edges = np.empty((0, 2), dtype=np.int64)
    weights = np.where(in_one[nodes], 1.0, -1.0) * instance.costs[nodes]
    frozen = tuple(np.flatnonzero(a & b).tolist())
    return FusionSubproblem(
        nodes=nodes,
        side_one=side_one,
        side_two=side_two,
        edges=edges,
        weights=weights,
        frozen=frozen,
    )


def max_flow(
    network: nx.DiGraph, source=SOURCE, sink=SINK
) -> Tuple[float, Tuple[Set, Set]]:
    """Maximum flow value and a minimum cut (source side, sink side).
    Arcs carry their capacity in the 'capacity' attribute."""
    value, (reachable, non_reachable) = nx.minimum_cut(
        network, source, sink, capacity="capacity", flow_func=preflow_push
    )
    return float(value), (set(reachable), set(non_reachable))


def fusion_network(
    instance: ProblemInstance, subproblem: FusionSubproblem
) -> nx.DiGraph:
    """Project selection network of the oriented form.

    Keeping i ∈ V¹ on the source side selects it, keeping i ∈ V² on the
    sink side selects it. Conflicting pairs are joined by arcs no
    minimum cut can afford.
    """
    costs = np.maximum(instance.costs, 0.0)
    uncuttable = float(np.sum(costs[subproblem.nodes])) + 1.0
    network = nx.DiGraph()
    network.add_node(SOURCE)
    network.add_node(SINK)
    for i in subproblem.side_one.tolist():
        network.add_edge(SOURCE, i, capacity=float(costs[i]))
    for i in subproblem.side_two.tolist():
        network.add_edge(i, SINK, capacity=float(costs[i]))
    for u, v in subproblem.edges.tolist():
        network.add_edge(u, v, capacity=uncuttable)
    return network


def fuse(
    instance: ProblemInstance,
    first: IntegerSolution,
    second: IntegerSolution,
) -> IntegerSolution:
    """Best independent set that agrees with both solutions wherever
    they agree, found exactly with a minimum cut.

    The result is never worse than either input.

    Parameters
    ----------
    instance: ProblemInstance
        Instance both solutions belong to.
    first: IntegerSolution
        First solution.
    second: IntegerSolution
        Second solution.

    Returns
    -------
    IntegerSolution
        Recombined solution.
    """
    subproblem = build_fusion(instance, first, second)
    if not len(subproblem.nodes):
        return first
    network = fusion_network(instance, subproblem)
    _, (source_side, sink_side) = max_flow(network)
    positive = instance.costs > 0
    selected = list(subproblem.frozen)
    selected.extend(
        i
        for i in subproblem.side_one.tolist()
        if i in source_side and positive[i]
    )
    selected.extend(
        i
        for i in subproblem.side_two.tolist()
        if i in sink_side and positive[i]
    )
    fused = IntegerSolution.from_selection(instance, selected)
    best = max(first, second, key=lambda solution: solution.objective)
    # Rounding in the cut may only lose ties
    if fused.objective < best.objective:
        return best
    return fused


def heuristic_loop(
    aug: AugmentedInstance,
    dual_state,
    random_state=None,
    budget: int = 1,
    incumbent: Optional[IntegerSolution] = None,
    use_reduced_costs: bool = True,
    return_history: bool = False,
) -> Union[IntegerSolution, Tuple[IntegerSolution, List[float]]]:
    """Alternates greedy generation and recombination with the incumbent.

    Parameters
    ----------
    aug: AugmentedInstance
        Relaxation the dual run works on.
    dual_state: DualState or ndarray
        State of the dual run, or reduced costs directly.
    random_state: int, RandomState or None
        Seed of the proposals.
    budget: int, default 1
        Number of generate and fuse rounds.
    incumbent: IntegerSolution, optional
        Best solution so far, the first proposal when not given.
    use_reduced_costs: bool, default True
        When False, proposals are generated from the original costs.
    return_history: bool, default False
        Also return the incumbent objective after every round.

    Returns
    -------
    IntegerSolution
        Incumbent after the last round, its objective never decreases.
    """
    if budget < 0:
        raise ValueError("budget has to be non-negative.")
    random_state = check_random_state(random_state)
    if not use_reduced_costs:
        costs = aug.original_costs
    elif isinstance(dual_state, np.ndarray):
        costs = dual_state
    else:
        costs = dual_state.effective_reduced(aug)
    history = []
    if incumbent is None:
        incumbent = greedy_generate(aug, costs, random_state)
        history.append(incumbent.objective)
    for _ in range(budget):
        proposal = greedy_generate(aug, costs, random_state)
        incumbent = fuse(aug.base, incumbent, proposal)
        history.append(incumbent.objective)
    if return_history:
        return incumbent, history
    return incumbent
