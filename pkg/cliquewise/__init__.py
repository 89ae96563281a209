from cliquewise.base import DualSolver
from cliquewise.formats import (
    parse_instance,
    read_dimacs,
    read_instance,
    read_solution,
    write_instance,
    write_solution,
)
from cliquewise.instance import (
    AugmentedInstance,
    ProblemInstance,
    augment,
    random_instance,
    validate,
)
from cliquewise.oracle import brute_force_mwis, lp_reference
from cliquewise.primal import IntegerSolution, heuristic_loop
from cliquewise.scheduling import ScheduleConfig
from cliquewise.solvers import BregmanSolver, DualCoordinateDescent

__all__ = [
    "DualSolver",
    "BregmanSolver",
    "DualCoordinateDescent",
    "ProblemInstance",
    "AugmentedInstance",
    "IntegerSolution",
    "ScheduleConfig",
    "augment",
    "validate",
    "random_instance",
    "parse_instance",
    "read_instance",
    "write_instance",
    "read_dimacs",
    "read_solution",
    "write_solution",
    "heuristic_loop",
    "brute_force_mwis",
    "lp_reference",
]
