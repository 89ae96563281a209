import pytest

from cliquewise.instance import ProblemInstance

# Five nodes, six cliques, LP optimum 17/3, integer optimum {0, 4}
EXAMPLE_COSTS = [3.0, 2.0, 4.0, 2.0, 2.0]
EXAMPLE_CLIQUES = [[0, 1], [1, 2], [0, 2], [0, 2, 3], [3, 4], [2, 4]]
EXAMPLE_LP_OPTIMUM = 17.0 / 3.0

EXAMPLE_FILE = """\
# small instance with a non-optimal fixed point
MWIS 5 6
3 2 4 2 2
0 1
1 2
0 2
0 2 3
3 4
2 4
"""


@pytest.fixture
def example():
    return ProblemInstance.from_cliques(EXAMPLE_COSTS, EXAMPLE_CLIQUES)


@pytest.fixture
def triangle():
    return ProblemInstance.from_cliques([2.0, 1.0, 1.0], [[0, 1, 2]])


@pytest.fixture
def example_file(tmp_path):
    path = tmp_path / "example.mwis"
    path.write_text(EXAMPLE_FILE, encoding="utf-8")
    return path
