"""Exceptions raised by cliquewise.

Validation findings on instances are returned as data
(see `cliquewise.instance.ValidationReport`), everything in here
signals that a computation cannot go on."""

from typing import Optional, Tuple


class InstanceFormatError(ValueError):
    """Raised when an instance or solution file cannot be parsed.

    Parameters
    ----------
    message: str
        Description of the problem.
    line: int
        1-based line number of the offending line.
    column: int, default 1
        1-based column of the offending token.
    """

    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class NumericalUnderflow(ArithmeticError):
    """The normalizer of a clique is numerically zero in the naive
    exp-domain iteration."""

    def __init__(self, clique: int, total: float):
        self.clique = clique
        self.total = total
        super().__init__(
            f"Sum over clique {clique} is numerically zero ({total!r}). "
            "Use the log-domain or the stabilized exp-domain sweep."
        )


class InconsistencyError(RuntimeError):
    """Bounds contradict weak duality or their own bookkeeping.
    This always signals a numerics bug, never bad input."""


class InfeasibleSolutionError(ValueError):
    """A 0/1 assignment selects both endpoints of an edge."""

    def __init__(self, edge: Tuple[int, int], message: Optional[str] = None):
        self.edge = edge
        if message is None:
            message = f"Both endpoints of edge {edge} are selected."
        super().__init__(message)


class SignSetViolation(ValueError):
    """A point passed as a maximizer of the reduced-cost objective
    does not belong to the Sign set of the reduced costs."""

    def __init__(self, index: int, value: float, reduced_cost: float):
        self.index = index
        super().__init__(
            f"x[{index}] = {value} is not admissible "
            f"for reduced cost {reduced_cost}."
        )


class SizeGuardError(ValueError):
    """Instance is too large for exhaustive enumeration."""
