import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import EXAMPLE_LP_OPTIMUM
from cliquewise.dual import (
    DualState,
    alg1_sweep,
    alg2_sweep,
    alg3_sweep,
    alg3_update,
    alg4_sweep,
    dual_value,
    reduced_costs,
    sign_indicator,
    smoothed_dual_value,
    subgradient,
)
from cliquewise.error import NumericalUnderflow, SignSetViolation
from cliquewise.instance import ProblemInstance, augment, random_instance
from cliquewise.oracle import brute_force_mwis, finite_diff_grad
from cliquewise.scheduling import initialize, truncation_projection


def scaled_random(seed, n=15, edge_density=0.3):
    instance = random_instance(n, edge_density, random_state=seed)
    aug, _ = initialize(augment(instance))
    return aug


def test_reduced_costs():
    aug = augment(ProblemInstance.from_cliques([1.0, 2.0], [[0, 1]]))
    np.testing.assert_allclose(reduced_costs(aug, [0.5]), [0.5, 1.5, -0.5])
    np.testing.assert_array_equal(reduced_costs(aug, [0.0]), aug.costs)
    shared = augment(ProblemInstance.from_cliques([5.0, 1.0], [[0, 1], [0]]))
    assert reduced_costs(shared, [1.0, 2.0])[0] == pytest.approx(2.0)
    with pytest.raises(ValueError):
        reduced_costs(aug, [0.0, 1.0])


def test_dual_value(triangle):
    aug = augment(triangle)
    assert dual_value(aug, [0.0]) == pytest.approx(4.0)
    assert dual_value(aug, [2.0]) == pytest.approx(2.0)
    assert dual_value(aug, [3.0]) == pytest.approx(3.0)


def test_subgradient(triangle):
    aug = augment(triangle)
    lam = np.array([2.0])
    np.testing.assert_array_equal(subgradient(aug, lam, np.zeros(4)), [1.0])
    one = np.array([1.0, 0.0, 0.0, 0.0])
    np.testing.assert_array_equal(subgradient(aug, lam, one), [0.0])
    pair = augment(ProblemInstance.from_cliques([1.0, 1.0], [[0, 1]]))
    g = subgradient(pair, np.array([1.0]), np.array([1.0, 1.0, 0.0]))
    np.testing.assert_array_equal(g, [-1.0])
    with pytest.raises(SignSetViolation) as info:
        subgradient(aug, np.array([0.0]), np.zeros(4))
    assert info.value.index == 0


def test_alg1_single_clique(triangle):
    aug = augment(triangle)
    state = DualState.initial(aug)
    change = alg1_sweep(state, aug)
    assert change == pytest.approx(2.0)
    np.testing.assert_allclose(state.lam, [2.0])
    np.testing.assert_allclose(state.reduced, [0.0, -1.0, -1.0, -2.0])
    assert dual_value(aug, state.lam) == pytest.approx(2.0)
    assert alg1_sweep(state, aug) == 0.0
    np.testing.assert_allclose(state.lam, [2.0])


def test_alg1_fixed_point_above_relaxation(example):
    aug = augment(example)
    state = DualState.initial(aug, lam=np.ones(aug.m))
    np.testing.assert_allclose(state.reduced[: aug.n], 0.0)
    assert alg1_sweep(state, aug) == 0.0
    np.testing.assert_array_equal(state.lam, np.ones(aug.m))
    assert dual_value(aug, state.lam) == pytest.approx(6.0)


def test_alg1_from_scratch(example):
    aug = augment(example)
    state = DualState.initial(aug)
    alg1_sweep(state, aug)
    np.testing.assert_allclose(state.lam, [3, 4, 0, 2, 2, 0])
    assert dual_value(aug, state.lam) == pytest.approx(11.0)
    while alg1_sweep(state, aug) > 0:
        pass
    np.testing.assert_allclose(state.lam, [1, 2, 0, 2, 2, 0])
    assert dual_value(aug, state.lam) == pytest.approx(7.0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**16), density=st.floats(0.05, 0.7))
def test_alg1_never_increases_dual(seed, density):
    aug = augment(random_instance(20, density, random_state=seed))
    state = DualState.initial(aug)
    previous = dual_value(aug, state.lam)
    for _ in range(15):
        alg1_sweep(state, aug)
        current = dual_value(aug, state.lam)
        assert current <= previous + 1e-9 * (1.0 + abs(previous))
        previous = current


def test_zero_subgradient_certifies_optimum(example):
    aug = augment(example)
    lam = np.array([4.0, 2.0, 0.0, 5.0, 1.0, 5.0]) / 3.0
    # slack of the third clique takes the remaining third
    x = np.array([1, 2, 1, 1, 2, 0, 0, 1, 0, 0, 0]) / 3.0
    np.testing.assert_allclose(subgradient(aug, lam, x), 0.0, atol=1e-12)
    assert np.dot(aug.costs, x) == pytest.approx(dual_value(aug, lam))
    assert dual_value(aug, lam) == pytest.approx(EXAMPLE_LP_OPTIMUM)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**16))
def test_sign_set_points_close_the_dual(seed):
    aug = augment(random_instance(15, 0.3, random_state=seed))
    lam = np.random.RandomState(seed).uniform(0.0, 1.0, size=aug.m)
    xstar = sign_indicator(reduced_costs(aug, lam))
    g = subgradient(aug, lam, xstar)
    assert np.dot(aug.costs, xstar) == pytest.approx(
        dual_value(aug, lam) - np.dot(lam, g), abs=1e-7
    )


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**16), scale=st.floats(0.1, 3.0))
def test_reparametrization_keeps_feasible_objectives(seed, scale):
    aug = augment(random_instance(15, 0.3, random_state=seed))
    rng = np.random.RandomState(seed)
    lam = rng.normal(size=aug.m)
    x = truncation_projection(aug, rng.uniform(size=aug.size)).xhat
    objective = np.dot(aug.costs, x)
    reduced = reduced_costs(aug, lam)
    assert np.dot(reduced, x) + lam.sum() == pytest.approx(objective, abs=1e-9)
    moved = aug.reparametrize(lam, scale)
    restored = moved.unscale(np.dot(moved.costs, x))
    assert restored == pytest.approx(objective, abs=1e-9)


def test_alg2_normalizes_cliques(triangle):
    aug = augment(triangle)
    x = np.array([1.0, 1.0, np.exp(-1.0), 1.0])
    normalized = alg2_sweep(x, aug)
    assert normalized.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(alg2_sweep(normalized, aug), normalized)
    np.testing.assert_array_equal(x, [1.0, 1.0, np.exp(-1.0), 1.0])


def test_alg2_underflow():
    aug = augment(ProblemInstance.from_cliques([1.0, 1.0], [[0, 1]]))
    costs = np.array([-1000.0, -1000.0, -1000.0])
    with pytest.raises(NumericalUnderflow) as info:
        alg2_sweep(np.exp(costs / 1e-3), aug)
    assert info.value.clique == 0


def test_alg3_single_clique(triangle):
    aug = augment(triangle)
    state = DualState.initial(aug, temperature=1.0)
    alg3_sweep(state, aug)
    expected = 2.0 + np.log(1.0 + 2.0 * np.exp(-1.0) + np.exp(-2.0))
    np.testing.assert_allclose(state.lam, [expected])
    assert np.all(state.reduced <= 0.0)


def test_alg3_approaches_alg1_at_low_temperature(triangle):
    aug = augment(triangle)
    state = DualState.initial(aug, temperature=1e-3)
    alg3_sweep(state, aug)
    np.testing.assert_allclose(state.lam, [2.0], atol=1e-2)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**16), temperature=st.floats(0.05, 2.0))
def test_alg3_never_increases_smoothed_dual(seed, temperature):
    aug = scaled_random(seed)
    state = DualState.initial(aug, temperature=temperature)
    previous = smoothed_dual_value(aug, state.lam, temperature)
    for _ in range(10):
        alg3_sweep(state, aug)
        current = smoothed_dual_value(aug, state.lam, temperature)
        assert current <= previous + 1e-9 * (1.0 + abs(previous))
        previous = current


@settings(max_examples=50, deadline=None)
@given(
    seed=st.integers(0, 2**16),
    n=st.integers(2, 30),
    temperature=st.floats(0.05, 2.0),
)
def test_log_domain_matches_naive_sweep(seed, n, temperature):
    aug = scaled_random(seed, n=n)
    state = DualState.initial(aug, temperature=temperature)
    before = np.exp(state.reduced / temperature)
    alg3_sweep(state, aug)
    after = np.exp(state.reduced / temperature)
    np.testing.assert_allclose(
        after, alg2_sweep(before, aug), rtol=1e-10, atol=1e-12
    )


@pytest.mark.parametrize("tau_stab", [1e30, 10.0, 2.0])
@pytest.mark.parametrize("seed", range(50))
def test_exp_domain_matches_log_domain(seed, tau_stab):
    aug = scaled_random(seed, n=10 + seed % 21)
    log_state = DualState.initial(aug, temperature=0.2)
    exp_state = DualState.initial(aug, temperature=0.2)
    for _ in range(30):
        alg3_sweep(log_state, aug)
        alg4_sweep(exp_state, aug, tau_stab)
    np.testing.assert_allclose(
        exp_state.effective_lambda(), log_state.lam, atol=1e-8
    )
    assert dual_value(aug, exp_state.effective_lambda()) == pytest.approx(
        dual_value(aug, log_state.lam), rel=1e-8, abs=1e-10
    )


def test_stabilization_count():
    aug = scaled_random(1)
    state = DualState.initial(aug, temperature=0.2)
    stats = alg4_sweep(state, aug, 2.0)
    assert stats.stabilizations > 0
    assert np.all(state.alpha == 1.0)
    for _ in range(2000):
        alg4_sweep(state, aug, 1e30)
    state.fold(aug)
    state.refresh(aug)
    stats = alg4_sweep(state, aug, 10.0)
    assert stats.stabilizations == 0
    assert stats.max_residual < 1e-2


def test_exp_domain_stays_consistent():
    aug = scaled_random(2)
    state = DualState.initial(aug, temperature=0.1)
    for _ in range(10):
        alg4_sweep(state, aug, 1e30)
    np.testing.assert_allclose(state.x, state.materialize(aug), rtol=1e-9)


def test_smoothed_dual_value(triangle):
    aug = augment(triangle)
    zeros = augment(ProblemInstance.from_cliques([0.0, 0.0], [[0, 1]]))
    assert smoothed_dual_value(zeros, [0.0], 1.0) == pytest.approx(3.0)
    expected = 2.0 + 1.0 + 2.0 * np.exp(-1.0) + np.exp(-2.0)
    assert smoothed_dual_value(aug, [2.0], 1.0) == pytest.approx(expected)
    with pytest.raises(ValueError):
        smoothed_dual_value(aug, [2.0], 0.0)


@pytest.mark.parametrize("seed", range(3))
def test_coordinate_update_minimizes_smoothed_dual(seed):
    aug = scaled_random(seed, n=10)
    temperature = 0.5
    state = DualState.initial(aug, temperature=temperature)
    rng = np.random.RandomState(seed)
    for j in rng.permutation(aug.m)[:3]:
        alg3_update(state, aug, j)
        gradient = finite_diff_grad(
            lambda lam: smoothed_dual_value(aug, lam, temperature),
            state.lam,
        )
        assert abs(gradient[j]) <= 1e-4


def test_smoothed_dual_bounds_dual(triangle):
    aug = augment(triangle)
    for lam in ([0.0], [1.0], [2.0], [5.0]):
        assert smoothed_dual_value(aug, lam, 0.1) >= dual_value(aug, lam)


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 2**16),
    scale=st.floats(0.0, 3.0),
)
def test_dual_value_bounds_integer_optimum(seed, scale):
    instance = random_instance(12, 0.3, random_state=seed)
    aug = augment(instance)
    lam = scale * np.random.RandomState(seed).normal(size=aug.m)
    optimum = brute_force_mwis(instance).objective
    assert optimum <= dual_value(aug, lam) + 1e-9
