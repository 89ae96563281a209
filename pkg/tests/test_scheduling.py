import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cliquewise.dual import DualState, alg1_sweep, dual_value
from cliquewise.error import InconsistencyError
from cliquewise.instance import ProblemInstance, augment, random_instance
from cliquewise.scheduling import (
    ScheduleConfig,
    entropy,
    feasibility_residuals,
    feasibility_step,
    fractional_share,
    gap_step,
    initialize,
    relative_gap,
    truncation_projection,
)


def test_schedule_defaults():
    cfg = ScheduleConfig()
    assert (cfg.T0, cfg.tau_batch, cfg.tau_drop) == (0.01, 50, 0.5)
    assert (cfg.tau_feas, cfg.tau_gap, cfg.T_floor) == (0.01, 0.5, 1e-9)


@pytest.mark.parametrize(
    "options",
    [
        {"T0": 0.0},
        {"tau_batch": 0},
        {"tau_drop": 1.0},
        {"tau_gap": 0.0},
        {"T_floor": -1.0},
        {"tau_feas": -0.1},
    ],
)
def test_schedule_validation(options):
    with pytest.raises(ValueError):
        ScheduleConfig(**options)


def test_feasibility_residuals(triangle):
    aug = augment(triangle)
    np.testing.assert_allclose(
        feasibility_residuals(aug, np.array([0.5, 0.25, 0.25, 0.0])), [0.0]
    )
    np.testing.assert_allclose(
        feasibility_residuals(aug, np.array([1.0, 0.3, 0.0, 0.0])), [0.3]
    )
    np.testing.assert_allclose(feasibility_residuals(aug, np.zeros(4)), [1.0])


def test_feasibility_step():
    cfg = ScheduleConfig()
    assert feasibility_step(0.01, np.array([0.005]), cfg) == pytest.approx(
        0.005
    )
    assert feasibility_step(0.01, np.array([0.02]), cfg) == 0.01
    assert feasibility_step(cfg.T_floor, np.array([0.0]), cfg) == cfg.T_floor


def test_projection_single_clique():
    aug = augment(ProblemInstance.from_cliques([1.0, 1.0, 1.0], [[0, 1, 2]]))
    estimate = truncation_projection(aug, np.array([0.9, 0.3, 0.2, 0.1]))
    np.testing.assert_allclose(estimate.xhat, [0.9, 0.1, 0.0, 0.0])
    assert estimate.objective == pytest.approx(1.0)
    assert estimate.max_residual_source == pytest.approx(0.5)


def test_projection_of_zero(triangle):
    aug = augment(triangle)
    estimate = truncation_projection(aug, np.zeros(4))
    np.testing.assert_array_equal(estimate.xhat, [0.0, 0.0, 0.0, 1.0])
    assert estimate.objective == 0.0
    assert estimate.entropy == pytest.approx(1.0)


def test_projection_rejects_negative(triangle):
    with pytest.raises(ValueError):
        truncation_projection(augment(triangle), -np.ones(4))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**16), spread=st.floats(0.0, 2.0))
def test_projection_properties(seed, spread):
    instance = random_instance(20, 0.25, random_state=seed)
    aug = augment(instance)
    x = spread * np.random.RandomState(seed).uniform(size=aug.size)
    estimate = truncation_projection(aug, x)
    xhat = estimate.xhat
    assert np.all(xhat >= 0.0) and np.all(xhat <= 1.0)
    residuals = feasibility_residuals(aug, xhat)
    np.testing.assert_allclose(residuals, 0.0, atol=1e-12)
    again = truncation_projection(aug, xhat).xhat
    np.testing.assert_allclose(again, xhat, atol=1e-12)
    moved = np.max(np.abs(xhat[: aug.n] - x[: aug.n]), initial=0.0)
    assert moved <= estimate.max_residual_source + 1e-12


def test_entropy():
    assert entropy(np.zeros(3)) == 0.0
    assert entropy(np.ones(2)) == pytest.approx(2.0)
    half = entropy(np.array([0.5]))
    assert half == pytest.approx(0.5 - 0.5 * np.log(0.5))


def test_gap_step():
    cfg = ScheduleConfig()
    assert gap_step(0.3, 10.0, 8.0, 4.0, cfg) == (pytest.approx(0.25), False)
    assert gap_step(0.1, 10.0, 8.0, 4.0, cfg) == (0.1, False)
    assert gap_step(0.1, 8.0, 8.0, 0.0, cfg) == (cfg.T_floor, True)


def test_gap_step_floor():
    cfg = ScheduleConfig(T_floor=1e-4)
    temperature, exhausted = gap_step(1.5e-4, 8.0 + 1.6e-4, 8.0, 1.0, cfg)
    assert exhausted
    assert temperature == 1e-4


def test_gap_step_detects_inconsistency():
    with pytest.raises(InconsistencyError):
        gap_step(0.1, 5.0, 8.0, 4.0, ScheduleConfig())


def test_relative_gap():
    assert relative_gap(2.0, 2.0) == 0.0
    assert relative_gap(10.0, 9.0) == pytest.approx(0.1)
    assert relative_gap(0.0, 0.0) == 0.0


def test_fractional_share():
    assert fractional_share(np.array([0.0, 0.5, 1.0, 0.3, 0.0]), 4) == 0.5
    assert fractional_share(np.array([]), 0) == 0.0


@pytest.mark.parametrize("seed", range(4))
def test_initialize_scales_costs(seed):
    base = augment(random_instance(30, 0.2, random_state=seed))
    scaled, lifted = initialize(base)
    assert np.all(scaled.costs <= 0.0)
    assert np.all(scaled.costs >= -1.0)
    assert np.min(scaled.costs) == pytest.approx(-1.0)
    zeros = np.zeros(scaled.m)
    assert scaled.unscale(dual_value(scaled, zeros)) == pytest.approx(
        dual_value(base, lifted)
    )
    state = DualState.initial(base)
    alg1_sweep(state, base)
    np.testing.assert_allclose(lifted, state.lam)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**16), scale=st.floats(0.0, 2.0))
def test_unscaled_bounds_agree(seed, scale):
    base = augment(random_instance(15, 0.3, random_state=seed))
    scaled, _ = initialize(base)
    lam = scale * np.random.RandomState(seed).normal(size=scaled.m)
    working = scaled.unscale(dual_value(scaled, lam))
    original = dual_value(base, scaled.lift_duals(lam))
    assert working == pytest.approx(original, rel=1e-9, abs=1e-9)
