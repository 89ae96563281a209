from typing import Optional, TypedDict


class TraceRecord(TypedDict):
    """One row of a solver trace, written once per batch of sweeps.
    All bounds are in the units of the original (unscaled) costs."""

    sweep: int
    wall_ms: int
    temperature: float
    dual_bound: float
    primal_bound: float
    integer_bound: Optional[float]
    max_residual: float
    stabilizations: int
    active_fraction: float
    delta: float
    truncation_error: float


class RunSummary(TypedDict):
    seed: Optional[int]
    dual_bound: float
    primal_bound: float
    integer_bound: Optional[float]
    relative_gap: float
    n_sweeps: int
    status: str
