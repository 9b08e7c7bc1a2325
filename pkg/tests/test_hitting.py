import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from wfexcursions import hitting as ht
from wfexcursions.wfmodel import DomainError, make_theta, spectral_index

from conftest import THETA_GRID

# mpmath.hyp2f1 ratio at 40 digits, theta = (0.3, 0.7), 0.2 -> 0.8, lambda = 1
HIT_REF = 0.12272171467456227


def test_hitting_laplace_matches_high_precision(theta_ref):
    assert ht.hitting_laplace(theta_ref, 1.0, 0.2, 0.8) == pytest.approx(HIT_REF, rel=1e-11)


@pytest.mark.parametrize("t1,t2", THETA_GRID)
@pytest.mark.parametrize("x", [0.01, 0.25, 0.5, 0.9])
def test_exit_prob_is_regularised_beta(t1, t2, x):
    th = make_theta(t1, t2)
    assert ht.exit_prob(th, x) == pytest.approx(special.betainc(1 - t1, 1 - t2, x), rel=1e-11)


def test_exit_prob_symmetric_case():
    assert ht.exit_prob(make_theta(0.5, 0.5), 0.25) == pytest.approx(1 / 3, rel=1e-12)


@pytest.mark.parametrize("kind", ["unkilled", "killed_at_0", "killed_at_1"])
@pytest.mark.parametrize("sign", ["minus", "plus"])
def test_eigenfunctions_solve_generator_equation(kind, sign):
    th = make_theta(0.3, 0.6)
    lam = 2.0
    e = ht.eigen_pair(th, lam, kind)
    fn = lambda z: ht.phi(e, sign, z)  # noqa: E731
    for x in (0.2, 0.45, 0.7):
        assert ht.generator_apply(th, fn, x, h=1e-3) == pytest.approx(lam * fn(x), rel=2e-5)


@pytest.mark.parametrize("lam", [0.1, 1.0, 20.0])
def test_monotonicity(lam):
    th = make_theta(0.3, 0.7)
    e = ht.eigen_pair(th, lam)
    x = np.linspace(0, 1, 41)
    assert np.all(np.diff(ht.phi(e, "minus", x)) > 0)
    assert np.all(np.diff(ht.phi(e, "plus", x)) < 0)


def test_killed_eigenfunctions_vanish_at_killing_point():
    th = make_theta(0.3, 0.7)
    assert ht.phi(ht.eigen_pair(th, 1.0, "killed_at_0"), "minus", 0.0) == 0.0
    assert ht.phi(ht.eigen_pair(th, 1.0, "killed_at_1"), "plus", 1.0) == 0.0


def test_boundary_values_match_evaluation():
    th = make_theta(0.4, 0.6)
    lam = 1.3
    vals = ht.phi_boundary_values(th, lam)
    idx = spectral_index(th, lam)
    # the killed increasing solution at 1 is a Gauss sum
    assert ht.killed_increasing(th, idx, 1.0) == pytest.approx(vals[1], rel=1e-9)
    assert ht.killed_decreasing(th, idx, 0.0) == pytest.approx(vals[2], rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(x=st.floats(0.02, 0.98), lam=st.floats(0.01, 30.0))
def test_strong_markov_factorisation(x, lam):
    # E_x e^{-lam H_z} = E_x e^{-lam H_y} E_y e^{-lam H_z} for x < y < z
    th = make_theta(0.3, 0.7)
    y, z = x + 0.5 * (1 - x) * 0.5, x + 0.9 * (1 - x)
    lhs = ht.hitting_laplace(th, lam, x, z)
    rhs = ht.hitting_laplace(th, lam, x, y) * ht.hitting_laplace(th, lam, y, z)
    assert lhs == pytest.approx(rhs, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(x=st.floats(0.0, 1.0))
def test_restricted_laplace_at_zero_lambda_is_exit_law(x):
    th = make_theta(0.3, 0.7)
    p = ht.exit_prob(th, x)
    assert ht.restricted_laplace(th, 0.0, x, 1) == pytest.approx(p, abs=1e-10)
    assert ht.restricted_laplace(th, 0.0, x, 0) == pytest.approx(1 - p, abs=1e-10)


def test_restricted_laplace_sums_below_hitting_of_either():
    th = make_theta(0.5, 0.5)
    x, lam = 0.3, 2.0
    both = ht.restricted_laplace(th, lam, x, 0) + ht.restricted_laplace(th, lam, x, 1)
    assert 0 < both < min(ht.hitting_laplace(th, lam, x, 0.0) + ht.hitting_laplace(th, lam, x, 1.0), 1.0)


def test_boundary_ratios_converge_to_limits():
    th = make_theta(0.3, 0.7)
    lam = 1.0
    limits = np.array(ht.boundary_ratio_limits(th, lam))
    err = [np.abs(np.array(ht.boundary_ratios_at(th, lam, x)) - limits) for x in (1e-4, 1e-6)]
    # the first two converge like x^theta_near, the crossing term faster
    assert np.all(err[1] < err[0])
    assert err[1][0] / err[0][0] == pytest.approx(100 ** -0.3, rel=0.1)
    assert err[1][2] < 1e-4


def test_domain_checked():
    with pytest.raises(DomainError):
        ht.exit_prob(make_theta(0.3, 0.3), 1.5)
