"""Reading and writing instance and solution files.

Native instance grammar (UTF-8, one record per line)::

    MWIS <n> <m>
    <n whitespace separated costs>
    <0-based node indices of clique 1>
    ...
    <0-based node indices of clique m>

Lines starting with ``#`` and blank lines are ignored,
the cost line is omitted when n = 0.

Solution files consist of ``VALUE <objective>`` followed by a line
with the selected node indices in ascending order.
"""

import math
import re
from pathlib import Path
from typing import Iterator, List, NamedTuple, Tuple, Union

import numpy as np

from cliquewise.error import InstanceFormatError
from cliquewise.instance import ProblemInstance, greedy_clique_cover
from cliquewise.primal import IntegerSolution

PathLike = Union[str, Path]

_TOKEN = re.compile(r"\S+")


class Token(NamedTuple):
    text: str
    line: int
    column: int


def _records(text: str) -> Iterator[Tuple[int, List[Token]]]:
    for i_line, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = [
            Token(match.group(), i_line, match.start() + 1)
            for match in _TOKEN.finditer(raw)
        ]
        yield i_line, tokens


def _parse_int(token: Token, what: str) -> int:
    try:
        return int(token.text)
    except ValueError:
        raise InstanceFormatError(
            f"expected an integer {what}, got '{token.text}'",
            token.line,
            token.column,
        ) from None


def _parse_cost(token: Token) -> float:
    try:
        value = float(token.text)
    except ValueError:
        raise InstanceFormatError(
            f"expected a real cost, got '{token.text}'",
            token.line,
            token.column,
        ) from None
    if not math.isfinite(value):
        raise InstanceFormatError(
            f"cost '{token.text}' is not finite", token.line, token.column
        )
    return value


def parse_instance(text: str) -> ProblemInstance:
    """Parses an instance in the native grammar.
    The edge set is the union of all pairs inside the cliques."""
    records = _records(text)
    try:
        i_line, header = next(records)
    except StopIteration:
        raise InstanceFormatError("missing 'MWIS <n> <m>' header", 1)
    if len(header) != 3 or header[0].text != "MWIS":
        raise InstanceFormatError(
            "header has to read 'MWIS <n> <m>'", i_line, header[0].column
        )
    n = _parse_int(header[1], "node count")
    m = _parse_int(header[2], "clique count")
    for token, value in ((header[1], n), (header[2], m)):
        if value < 0:
            raise InstanceFormatError(
                "counts have to be non-negative", token.line, token.column
            )
    costs = []
    if n > 0:
        try:
            i_line, cost_tokens = next(records)
        except StopIteration:
            raise InstanceFormatError("missing cost line", i_line + 1)
        if len(cost_tokens) != n:
            raise InstanceFormatError(
                f"expected {n} costs, got {len(cost_tokens)}", i_line
            )
        costs = [_parse_cost(token) for token in cost_tokens]
    cliques = []
    for i_line, tokens in records:
        if len(cliques) == m:
            raise InstanceFormatError(
                f"found more than the declared {m} cliques", i_line
            )
        clique = []
        for token in tokens:
            node = _parse_int(token, "node index")
            if not 0 <= node < n:
                raise InstanceFormatError(
                    f"node index {node} out of range for n={n}",
                    token.line,
                    token.column,
                )
            clique.append(node)
        cliques.append(clique)
    if len(cliques) != m:
        raise InstanceFormatError(
            f"expected {m} cliques, found {len(cliques)}",
            len(text.splitlines()) + 1,
        )
    return ProblemInstance.from_cliques(
        np.asarray(costs, dtype=float), cliques
    )


def format_instance(instance: ProblemInstance) -> str:
    lines = [f"MWIS {instance.node_count} {instance.clique_count}"]
    if instance.node_count:
        lines.append(" ".join(repr(float(c)) for c in instance.costs))
    for j, clique in enumerate(instance.cliques):
        if not len(clique):
            raise ValueError(f"Clique {j} is empty and cannot be written.")
        lines.append(" ".join(str(i) for i in clique.tolist()))
    return "\n".join(lines) + "\n"


def read_instance(path: PathLike) -> ProblemInstance:
    """Reads an instance file in the native grammar.

    Parameters
    ----------
    path: str or Path
        File to read.

    Returns
    -------
    ProblemInstance
        Parsed instance.

    Raises
    ------
    InstanceFormatError
        When the file does not follow the grammar,
        the error carries the line and column of the problem.
    """
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def write_instance(path: PathLike, instance: ProblemInstance):
    Path(path).write_text(format_instance(instance), encoding="utf-8")


def read_dimacs(path: PathLike, random_state=None) -> ProblemInstance:
    """Reads a graph in DIMACS edge format and attaches
    a greedy clique cover.

    Recognized lines are ``c`` comments, ``p edge <n> <e>``,
    ``e <u> <v>`` and ``n <v> <weight>`` with 1-based node indices.
    Nodes without a weight line get weight 1.

    Parameters
    ----------
    path: str or Path
        File to read.
    random_state: int, RandomState or None
        Seed of the greedy clique cover.
    """
    text = Path(path).read_text(encoding="utf-8")
    n = None
    edges = []
    weights = {}
    for i_line, tokens in _records(text):
        kind = tokens[0].text
        if kind == "c":
            continue
        if kind == "p":
            if len(tokens) != 4:
                raise InstanceFormatError(
                    "problem line has to read 'p edge <n> <e>'", i_line
                )
            n = _parse_int(tokens[2], "node count")
            continue
        if n is None:
            raise InstanceFormatError(
                "problem line has to precede data lines",
                i_line,
                tokens[0].column,
            )
        if kind not in ("e", "n") or len(tokens) != 3:
            raise InstanceFormatError(
                f"unrecognized line type '{kind}'", i_line, tokens[0].column
            )
        node = _parse_int(tokens[1], "node index")
        if not 1 <= node <= n:
            raise InstanceFormatError(
                f"node index {node} out of range for n={n}",
                i_line,
                tokens[1].column,
            )
        if kind == "n":
            weights[node - 1] = _parse_cost(tokens[2])
            continue
        other = _parse_int(tokens[2], "node index")
        if not 1 <= other <= n:
            raise InstanceFormatError(
                f"node index {other} out of range for n={n}",
                i_line,
                tokens[2].column,
            )
        if other == node:
            raise InstanceFormatError(
                f"self-loop on node {node}", i_line, tokens[2].column
            )
        edges.append((node - 1, other - 1))
    if n is None:
        raise InstanceFormatError("missing problem line", 1)
    costs = np.ones(n)
    for node, weight in weights.items():
        costs[node] = weight
    instance = ProblemInstance.from_edges(costs, edges)
    return greedy_clique_cover(instance, random_state)


class SolutionFile(NamedTuple):
    objective: float
    selected: Tuple[int, ...]


def read_solution(path: PathLike) -> SolutionFile:
    records = _records(Path(path).read_text(encoding="utf-8"))
    try:
        i_line, header = next(records)
    except StopIteration:
        raise InstanceFormatError("missing 'VALUE <objective>' line", 1)
    if len(header) != 2 or header[0].text != "VALUE":
        raise InstanceFormatError(
            "first line has to read 'VALUE <objective>'", i_line
        )
    objective = _parse_cost(header[1])
    selected = []
    for _, tokens in records:
        selected.extend(_parse_int(token, "node index") for token in tokens)
    return SolutionFile(objective, tuple(sorted(selected)))


def write_solution(path: PathLike, solution: IntegerSolution):
    lines = [
        f"VALUE {solution.objective!r}",
        " ".join(str(i) for i in solution.selected),
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
