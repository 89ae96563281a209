import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import scipy.sparse as spr
from sklearn.utils import check_random_state


def _as_clique(nodes: Iterable[int]) -> np.ndarray:
    clique = np.unique(np.asarray(list(nodes), dtype=np.int64))
    clique.setflags(write=False)
    return clique


def _as_edges(edges) -> np.ndarray:
    pairs = np.asarray(
        [tuple(edge) for edge in edges], dtype=np.int64
    ).reshape(-1, 2)
    pairs = np.sort(pairs, axis=1)
    if len(pairs):
        pairs = np.unique(pairs, axis=0)
    pairs.setflags(write=False)
    return pairs


def _clique_pairs(cliques: Iterable[np.ndarray]) -> set:
    pairs = set()
    for clique in cliques:
        pairs.update(itertools.combinations(clique.tolist(), 2))
    return pairs


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Maximum-weight independent set problem over a graph
    with a clique cover attached.

    Node indices are 0-based.
    Instances are immutable, derived structures (adjacency, networkx graph)
    are computed lazily and cached.

    Parameters
    ----------
    node_count: int
        Number of nodes n.
    costs: array-like of shape (n,)
        Node costs (weights) to be maximized.
    edges: iterable of pairs
        Undirected edges, stored sorted and deduplicated.
    cliques: iterable of iterables
        Clique cover K_1..K_m, every clique is stored as a sorted array.
    """

    node_count: int
    costs: np.ndarray
    edges: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    cliques: Tuple[np.ndarray, ...] = ()

    def __post_init__(self):
        if self.node_count < 0:
            raise ValueError("node_count has to be non-negative.")
        costs = np.array(self.costs, dtype=np.float64).reshape(-1)
        if costs.shape[0] != self.node_count:
            raise ValueError(
                f"Expected {self.node_count} costs, got {costs.shape[0]}."
            )
        costs.setflags(write=False)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "edges", _as_edges(self.edges))
        object.__setattr__(
            self, "cliques", tuple(_as_clique(c) for c in self.cliques)
        )

    @classmethod
    def from_cliques(
        cls, costs: Sequence[float], cliques: Iterable[Iterable[int]]
    ) -> "ProblemInstance":
        """Builds an instance whose edge set is exactly the union
        of all pairs inside the given cliques."""
        cliques = [_as_clique(c) for c in cliques]
        costs = np.asarray(costs, dtype=np.float64)
        edges = sorted(_clique_pairs(cliques))
        return cls(len(costs), costs, edges, tuple(cliques))

    @classmethod
    def from_edges(
        cls,
        costs: Sequence[float],
        edges: Iterable[Tuple[int, int]],
        cliques: Iterable[Iterable[int]] = (),
    ) -> "ProblemInstance":
        costs = np.asarray(costs, dtype=np.float64)
        return cls(len(costs), costs, list(edges), tuple(cliques))

    def with_cliques(
        self, cliques: Iterable[Iterable[int]]
    ) -> "ProblemInstance":
        return ProblemInstance(
            self.node_count, self.costs, self.edges, tuple(cliques)
        )

    @property
    def clique_count(self) -> int:
        return len(self.cliques)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> spr.csr_matrix:
        """Symmetric boolean adjacency matrix of shape (n, n)."""
        n = self.node_count
        rows = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        cols = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        data = np.ones(len(rows), dtype=bool)
        adjacency = spr.csr_matrix((data, (rows, cols)), shape=(n, n))
        adjacency.sort_indices()
        return adjacency

    def neighbors(self, node: int) -> np.ndarray:
        adjacency = self.adjacency
        start, end = adjacency.indptr[node], adjacency.indptr[node + 1]
        return adjacency.indices[start:end]

    @cached_property
    def graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.node_count))
        graph.add_edges_from(self.edges.tolist())
        return graph

    def objective(self, selected: Iterable[int]) -> float:
        selected = np.asarray(list(selected), dtype=np.int64)
        return float(self.costs[selected].sum())


class Violation(NamedTuple):
    kind: str
    detail: str


@dataclass
class ValidationReport:
    """Every violated invariant of an instance.
    The report is empty if and only if the instance is valid."""

    violations: List[Violation] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def kinds(self) -> set:
        return {violation.kind for violation in self.violations}

    def add(self, kind: str, detail: str):
        self.violations.append(Violation(kind, detail))


def validate(instance: ProblemInstance) -> ValidationReport:
    """Checks index ranges, that cliques are complete subgraphs,
    and that the cliques cover all edges and nodes.

    Parameters
    ----------
    instance: ProblemInstance
        Instance to check.

    Returns
    -------
    ValidationReport
        Report listing all violations, empty for valid instances.
    """
    report = ValidationReport()
    n = instance.node_count
    if not np.all(np.isfinite(instance.costs)):
        bad = np.flatnonzero(~np.isfinite(instance.costs)).tolist()
        report.add("non-finite-cost", f"nodes {bad} have non-finite costs")
    edge_set = set()
    for u, v in instance.edges.tolist():
        if not (0 <= u < n and 0 <= v < n):
            report.add("index-out-of-range", f"edge {{{u},{v}}}, n={n}")
            continue
        if u == v:
            report.add("self-loop", f"edge {{{u},{v}}}")
            continue
        edge_set.add((u, v))
    covered_nodes = np.zeros(n, dtype=bool)
    covered_pairs = set()
    for j, clique in enumerate(instance.cliques):
        nodes = clique.tolist()
        out_of_range = [i for i in nodes if not 0 <= i < n]
        if out_of_range:
            report.add(
                "index-out-of-range",
                f"clique {j} contains {out_of_range}, n={n}",
            )
            continue
        covered_nodes[nodes] = True
        for pair in itertools.combinations(nodes, 2):
            if pair not in edge_set:
                report.add(
                    "non-clique",
                    f"clique {j}: {{{pair[0]},{pair[1]}}} is not an edge",
                )
            covered_pairs.add(pair)
    for u, v in sorted(edge_set - covered_pairs):
        report.add("uncovered-edge", f"edge {{{u},{v}}}")
    for i in np.flatnonzero(~covered_nodes).tolist():
        report.add("uncovered-node", f"node {i}")
    return report


def strip_nonpositive(
    instance: ProblemInstance,
) -> Tuple[ProblemInstance, np.ndarray]:
    """Removes nodes with non-positive costs together with their edges.
    The optimal objective value is unchanged.

    Returns
    -------
    instance: ProblemInstance
        Instance restricted to nodes with positive cost.
        Empty cliques are dropped.
    original_index: ndarray of shape (n_kept,)
        Original index of every kept node.
    """
    keep = np.flatnonzero(instance.costs > 0)
    remap = np.full(instance.node_count, -1, dtype=np.int64)
    remap[keep] = np.arange(len(keep))
    edges = remap[instance.edges] if instance.edge_count else instance.edges
    edges = edges[np.all(edges >= 0, axis=1)]
    cliques = []
    for clique in instance.cliques:
        restricted = remap[clique]
        restricted = restricted[restricted >= 0]
        if len(restricted):
            cliques.append(restricted)
    stripped = ProblemInstance(
        len(keep), instance.costs[keep], edges, tuple(cliques)
    )
    return stripped, keep


@dataclass(frozen=True, eq=False)
class AugmentedInstance:
    """Equality form of the clique cover relaxation.

    Every clique K_j gets a slack variable with index n+j,
    the augmented clique is K̄_j = K_j ∪ {n+j}.
    Variables are indexed over [n+m], real nodes first.

    The working costs may be reparametrized and rescaled,
    for every x satisfying the clique equalities the original objective is
    ``scale_factor * <costs, x> + dual_shift.sum()``.

    Parameters
    ----------
    base: ProblemInstance
        Instance the relaxation is built from.
    costs: ndarray of shape (n+m,)
        Working costs, slack costs are zero before reparametrization.
    original_index: ndarray of shape (n,)
        Index of every base node in the instance before stripping.
    scale_factor: float, default 1.0
        Positive factor the working costs were divided by.
    dual_shift: ndarray of shape (m,)
        Dual vector of the base relaxation absorbed into the working costs.
    """

    base: ProblemInstance
    costs: np.ndarray
    original_index: np.ndarray
    scale_factor: float = 1.0
    dual_shift: Optional[np.ndarray] = None

    def __post_init__(self):
        costs = np.array(self.costs, dtype=np.float64)
        costs.setflags(write=False)
        object.__setattr__(self, "costs", costs)
        if self.dual_shift is None:
            object.__setattr__(self, "dual_shift", np.zeros(self.m))
        if self.scale_factor <= 0:
            raise ValueError("scale_factor has to be positive.")

    @property
    def n(self) -> int:
        return self.base.node_count

    @property
    def m(self) -> int:
        return self.base.clique_count

    @property
    def size(self) -> int:
        return self.n + self.m

    @property
    def offset(self) -> float:
        return float(np.sum(self.dual_shift))

    @cached_property
    def constraint_matrix(self) -> spr.csr_matrix:
        """Clique-variable incidence of shape (m, n+m), row j is K̄_j."""
        n, m = self.n, self.m
        rows = [
            np.append(clique, n + j)
            for j, clique in enumerate(self.base.cliques)
        ]
        sizes = np.array([len(row) for row in rows], dtype=np.int64)
        indptr = np.concatenate([[0], np.cumsum(sizes)])
        indices = (
            np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
        )
        data = np.ones(len(indices))
        return spr.csr_matrix((data, indices, indptr), shape=(m, n + m))

    @cached_property
    def cliques(self) -> Tuple[np.ndarray, ...]:
        """Augmented cliques K̄_j, sorted, with the slack last."""
        matrix = self.constraint_matrix
        return tuple(
            matrix.indices[matrix.indptr[j] : matrix.indptr[j + 1]]
            for j in range(self.m)
        )

    @cached_property
    def incidence(self) -> Tuple[np.ndarray, ...]:
        """J_i, the sorted clique indices containing variable i."""
        matrix = self.constraint_matrix.tocsc()
        matrix.sort_indices()
        return tuple(
            matrix.indices[matrix.indptr[i] : matrix.indptr[i + 1]]
            for i in range(self.size)
        )

    @cached_property
    def membership_counts(self) -> np.ndarray:
        """|J_i| for every variable."""
        return np.diff(self.constraint_matrix.tocsc().indptr)

    @property
    def original_costs(self) -> np.ndarray:
        """Costs of the base instance extended by zero slack costs."""
        return np.concatenate([self.base.costs, np.zeros(self.m)])

    def reparametrize(
        self, lam: np.ndarray, scale: float = 1.0
    ) -> "AugmentedInstance":
        """Absorbs a dual vector into the working costs and divides them
        by `scale`. Bound bookkeeping is carried along."""
        lam = np.asarray(lam, dtype=np.float64)
        costs = (self.costs - self.constraint_matrix.T @ lam) / scale
        return AugmentedInstance(
            base=self.base,
            costs=costs,
            original_index=self.original_index,
            scale_factor=self.scale_factor * scale,
            dual_shift=self.dual_shift + self.scale_factor * lam,
        )

    def lift_duals(self, lam: np.ndarray) -> np.ndarray:
        """Dual vector of the base relaxation that corresponds
        to `lam` on the working costs."""
        return self.dual_shift + self.scale_factor * np.asarray(lam)

    def unscale(self, value: float) -> float:
        """Maps an objective or bound in working units
        to the units of the original costs."""
        return self.offset + self.scale_factor * value


def augment(
    instance: ProblemInstance, original_index: Optional[np.ndarray] = None
) -> AugmentedInstance:
    """Introduces one zero-cost slack variable per clique.

    Parameters
    ----------
    instance: ProblemInstance
        Valid instance, every node has to be covered by a clique.
    original_index: ndarray, optional
        Original node indices, when `instance` is a stripped instance.

    Returns
    -------
    AugmentedInstance
        Equality form of the clique cover relaxation.
    """
    n, m = instance.node_count, instance.clique_count
    covered = np.zeros(n, dtype=bool)
    for clique in instance.cliques:
        covered[clique] = True
    if not np.all(covered):
        missing = np.flatnonzero(~covered).tolist()
        raise ValueError(f"Nodes {missing} are not covered by any clique.")
    if original_index is None:
        original_index = np.arange(n)
    costs = np.concatenate([instance.costs, np.zeros(m)])
    return AugmentedInstance(
        base=instance,
        costs=costs,
        original_index=np.asarray(original_index, dtype=np.int64),
    )


def edge_cover(instance: ProblemInstance) -> ProblemInstance:
    """Cover with one clique per edge and a singleton clique
    per isolated node, the least tight relaxation of the family."""
    degree = np.zeros(instance.node_count, dtype=np.int64)
    np.add.at(degree, instance.edges.reshape(-1), 1)
    cliques = [edge for edge in instance.edges]
    cliques.extend([i] for i in np.flatnonzero(degree == 0))
    return instance.with_cliques(cliques)


def greedy_clique_cover(
    instance: ProblemInstance, random_state=None
) -> ProblemInstance:
    """Covers the graph with maximal cliques.
    Every yet uncovered edge is extended to a maximal clique by adding
    common neighbors in a seeded random order.
    Isolated nodes get singleton cliques.

    Parameters
    ----------
    instance: ProblemInstance
        Instance with an edge list, existing cliques are ignored.
    random_state: int, RandomState or None
        Seed of the edge and candidate orders.

    Returns
    -------
    ProblemInstance
        The same graph with a cover of maximal cliques.
    """
    random_state = check_random_state(random_state)
    graph = instance.graph
    covered = set()
    cliques = []
    edge_order = random_state.permutation(instance.edge_count)
    for u, v in instance.edges[edge_order].tolist():
        if (u, v) in covered:
            continue
        clique = [u, v]
        candidates = sorted(set(graph[u]) & set(graph[v]))
        candidates = [
            candidates[k] for k in random_state.permutation(len(candidates))
        ]
        for w in candidates:
            if all(graph.has_edge(w, member) for member in clique):
                clique.append(w)
        clique.sort()
        covered.update(itertools.combinations(clique, 2))
        cliques.append(clique)
    cliques.extend([i] for i in nx.isolates(graph))
    return instance.with_cliques(cliques)


def maximal_clique_cover(instance: ProblemInstance) -> ProblemInstance:
    """Cover with all maximal cliques of the graph.
    This is the tightest relaxation of the clique cover family.
    The number of maximal cliques can grow exponentially."""
    cliques = sorted(sorted(c) for c in nx.find_cliques(instance.graph))
    return instance.with_cliques(cliques)


def dedupe(instance: ProblemInstance) -> ProblemInstance:
    """Drops duplicate cliques and cliques contained in another one.
    First occurrences are kept in their original order."""
    sets = []
    for clique in instance.cliques:
        members = frozenset(clique.tolist())
        if members not in sets:
            sets.append(members)
    kept = [
        members
        for members in sets
        if not any(members < other for other in sets)
    ]
    return instance.with_cliques([sorted(members) for members in kept])


def random_instance(
    n: int,
    edge_density: float,
    cost_range: Tuple[float, float] = (0.0, 1.0),
    random_state=None,
) -> ProblemInstance:
    """Erdős–Rényi graph with uniform costs and a greedy clique cover.

    Parameters
    ----------
    n: int
        Number of nodes.
    edge_density: float
        Edge probability in [0, 1].
    cost_range: tuple of float, default (0.0, 1.0)
        Costs are drawn uniformly from this interval.
    random_state: int, RandomState or None
        Seed, the instance is deterministic given the seed.
    """
    if n < 0:
        raise ValueError("n has to be non-negative.")
    if not 0.0 <= edge_density <= 1.0:
        raise ValueError("edge_density has to lie in [0, 1].")
    low, high = cost_range
    if high < low:
        raise ValueError("cost_range has to be an interval (low, high).")
    random_state = check_random_state(random_state)
    graph = nx.gnp_random_graph(n, edge_density, seed=random_state)
    costs = random_state.uniform(low, high, size=n)
    instance = ProblemInstance.from_edges(costs, graph.edges())
    return greedy_clique_cover(instance, random_state)
