from cliquewise.solvers.bregman import BregmanSolver
from cliquewise.solvers.nonsmooth import DualCoordinateDescent

__all__ = ["BregmanSolver", "DualCoordinateDescent"]
