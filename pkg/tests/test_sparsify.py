import warnings

import numpy as np
import pytest
from sklearn.exceptions import ConvergenceWarning

from cliquewise.dual import (
    DualState,
    alg4_sweep,
    smoothed_dual_value,
    smoothed_terms,
)
from cliquewise.instance import ProblemInstance, augment, random_instance
from cliquewise.scheduling import initialize
from cliquewise.solvers import BregmanSolver
from cliquewise.sparsify import (
    accurate_refresh,
    accurate_thresholds,
    heuristic_refresh,
    truncation_error,
    update_delta,
)


def test_heuristic_threshold():
    aug = augment(ProblemInstance.from_cliques([1.0, 1.0], [[0, 1]]))
    active = heuristic_refresh(aug, np.array([1.0, 1e-3, 1e-12]))
    np.testing.assert_array_equal(active.members[0], [0, 1])
    assert active.active_fraction == pytest.approx(2 / 3)
    np.testing.assert_array_equal(active.truncated(aug), [False, False, True])


def test_heuristic_keeps_equal_values():
    aug = augment(ProblemInstance.from_cliques([1.0, 1.0], [[0, 1]]))
    active = heuristic_refresh(aug, np.full(3, 1e-30))
    np.testing.assert_array_equal(active.members[0], [0, 1, 2])


def test_largest_member_always_stays():
    aug = augment(ProblemInstance.from_cliques([1.0], [[0]]))
    active = heuristic_refresh(aug, np.array([0.0, 0.0]))
    assert len(active.members[0]) >= 1
    accurate = accurate_refresh(aug, np.array([1e-20, 1e-30]), 1.0, 10.0, 1.0)
    np.testing.assert_array_equal(accurate.members[0], [0])


def test_accurate_threshold_formula():
    cliques = [[0, 1], [1, 2]] + [[i] for i in range(3, 50)] + [[0]]
    aug = augment(ProblemInstance.from_cliques([1.0] * 50, cliques))
    assert aug.size == 100
    thresholds = accurate_thresholds(aug, 0.001, 10.0, 0.01)
    assert thresholds[1] == pytest.approx(0.001)
    assert thresholds[0] == pytest.approx(0.001)
    assert thresholds[3] == pytest.approx(0.01)
    np.testing.assert_array_equal(
        accurate_thresholds(aug, 0.001, 10.0, 0.0), 0.0
    )


@pytest.mark.parametrize(
    "arguments",
    [(0.0, 10.0, 0.1), (1.0, 1.0, 0.1), (1.0, 10.0, -0.1)],
)
def test_accurate_threshold_validation(arguments):
    aug = augment(ProblemInstance.from_cliques([1.0], [[0]]))
    with pytest.raises(ValueError):
        accurate_thresholds(aug, *arguments)


def test_update_delta():
    assert update_delta(0.5) == pytest.approx(0.05)
    assert update_delta(0.0) == 0.0
    assert update_delta(None) == 0.0
    assert update_delta(-1.0) == 0.0


@pytest.mark.parametrize("seed", range(3))
def test_truncation_error_within_budget(seed):
    aug, _ = initialize(augment(random_instance(40, 0.15, random_state=seed)))
    temperature = 0.05
    state = DualState.initial(aug, temperature=temperature)
    for _ in range(20):
        alg4_sweep(state, aug, 10.0)
    state.fold(aug)
    state.refresh(aug)
    delta = 1e-3
    active = accurate_refresh(aug, state.x, temperature, 10.0, delta)
    for _ in range(10):
        alg4_sweep(state, aug, 10.0, active)
    error = truncation_error(aug, state, active)
    assert 0.0 <= error <= delta
    exact = smoothed_dual_value(aug, state.effective_lambda(), temperature)
    mask = active.truncated(aug)
    lam = state.effective_lambda()
    reduced = aug.costs - aug.constraint_matrix.T @ lam
    kept = np.where(mask, 0.0, smoothed_terms(reduced, temperature))
    assert exact - (np.sum(lam) + np.sum(kept)) == pytest.approx(
        error, rel=1e-6, abs=1e-12
    )


@pytest.mark.parametrize("seed", range(2))
def test_accurate_run_respects_budget(seed):
    instance = random_instance(40, 0.15, random_state=seed)
    solver = BregmanSolver(
        truncation="accurate", target_gap=1e-4, max_sweeps=5000
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        solver.fit(instance)
    assert solver.effective_tau_stab == 10.0
    for record in solver.trace_:
        assert record["truncation_error"] <= record["delta"] + 1e-12
    assert any(record["active_fraction"] < 1.0 for record in solver.trace_)


@pytest.mark.parametrize("truncation", ["heuristic", "accurate"])
def test_truncated_runs_match_exact_run(truncation):
    instance = random_instance(25, 0.2, random_state=11)
    exact = BregmanSolver(target_gap=1e-6, max_sweeps=100_000).fit(instance)
    truncated = BregmanSolver(
        truncation=truncation, target_gap=1e-6, max_sweeps=100_000
    ).fit(instance)
    assert truncated.dual_bound_ == pytest.approx(exact.dual_bound_, rel=1e-4)
