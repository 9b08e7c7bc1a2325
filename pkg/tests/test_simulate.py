import numpy as np
import pytest

from wfexcursions import simulate as sm
from wfexcursions.hitting import exit_prob, hitting_laplace
from wfexcursions.wfmodel import DomainError, make_theta


def test_paths_shape_and_start(rng):
    th = make_theta(0.3, 0.7)
    out = sm.simulate_paths(th, 0.4, [0.0, 0.1, 0.5], rng, 5)
    assert out.shape == (5, 3)
    assert np.all(out[:, 0] == 0.4)
    assert np.all((out[:, 1:] > 0) & (out[:, 1:] < 1))


def test_same_seed_same_paths():
    th = make_theta(0.3, 0.7)
    a = sm.simulate_paths(th, 0.4, [0.1, 0.2], sm.make_rng(7), 4)
    b = sm.simulate_paths(th, 0.4, [0.1, 0.2], sm.make_rng(7), 4)
    assert np.array_equal(a, b)


def test_path_mean_matches_exact_moment(rng):
    th = make_theta(0.3, 0.7)
    out = sm.simulate_paths(th, 0.9, [0.2, 0.6], rng, 20_000)
    mean = 0.3 + 0.6 * np.exp(-0.5 * np.array([0.2, 0.6]))
    se = out.std(axis=0) / np.sqrt(out.shape[0])
    assert np.all(np.abs(out.mean(axis=0) - mean) < 4 * se)


@pytest.mark.parametrize("grid", [[], [0.2, 0.1], [-0.1, 0.2]])
def test_bad_grid(rng, grid):
    with pytest.raises(DomainError):
        sm.simulate_paths(make_theta(0.3, 0.7), 0.4, grid, rng)


def test_exit_estimate_within_three_se(rng):
    th = make_theta(0.5, 0.5)
    est = sm.estimate_exit_prob(th, 0.25, n_paths=10_000, rng=rng)
    assert abs(est.value - 1 / 3) < 3 * est.std_error


def test_exit_estimate_asymmetric(rng):
    th = make_theta(0.3, 0.7)
    est = sm.estimate_exit_prob(th, 0.6, eps=0.03, n_paths=5000, rng=rng)
    assert abs(est.value - exit_prob(th, 0.6)) < 3 * est.std_error


def test_hitting_estimate(rng):
    th = make_theta(0.3, 0.7)
    est = sm.estimate_hitting_laplace(th, 0.2, 0.8, 1.0, n_paths=5000, rng=rng)
    ref = hitting_laplace(th, 1.0, 0.2, 0.8)
    assert abs(est.value - ref) < 3 * est.std_error + 0.02 * np.sqrt(est.dt)


def test_hitting_estimate_downward(rng):
    th = make_theta(0.5, 0.5)
    est = sm.estimate_hitting_laplace(th, 0.7, 0.4, 2.0, n_paths=5000, rng=rng)
    ref = hitting_laplace(th, 2.0, 0.7, 0.4)
    assert abs(est.value - ref) < 3 * est.std_error + 0.02 * np.sqrt(est.dt)


def test_hitting_trivial_cases(rng):
    th = make_theta(0.5, 0.5)
    assert sm.estimate_hitting_laplace(th, 0.3, 0.6, 0.0, rng=rng).value == 1.0
    assert sm.estimate_hitting_laplace(th, 0.3, 0.3, 1.0, rng=rng).value == 1.0


def test_step_cap(rng):
    with pytest.raises(sm.BudgetExceeded):
        sm.estimate_exit_prob(make_theta(0.5, 0.5), 0.5, n_paths=1000, rng=rng, step_cap=500)


def test_bridge_probability_limits():
    assert sm._bridge_cross_prob(np.array([0.5]), np.array([0.5]), 0.5, 1e-2)[0] == pytest.approx(1.0)
    assert sm._bridge_cross_prob(np.array([0.2]), np.array([0.2]), 0.8, 1e-3)[0] < 1e-100


def test_occupation(rng):
    th = make_theta(0.3, 0.7)
    path = sm.simulate_path(th, 0.01, np.linspace(0.01, 1, 100), rng, seed=None)
    frac = sm.occupation_near_boundary(path, 0.1)
    assert 0.0 <= frac <= 1.0
    assert sm.occupation_near_boundary(path, 0.1, 1) + frac <= 1.0
