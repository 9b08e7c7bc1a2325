"""Excursions away from the endpoints: masses, switching rates, entrance laws.

Local time is normalised in the Ito-McKean convention, so every rate below
is measured per unit of that local time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from . import hyperfun, wfmodel
from .hitting import decreasing_solution, increasing_solution, killed_decreasing, killed_increasing
from .hyperfun import gamma_ratio
from .greens import eigen_integrals
from .laplinv import InversionConfig, invert
from .wfmodel import DomainError, ThetaParams, spectral_index


class GridTooNarrow(DomainError):
    """The lambda grid cannot support a power-law index estimate."""


@dataclass(frozen=True)
class ExcursionLaw:
    theta: ThetaParams
    from_boundary: int
    lam: float
    total_mass: float
    switch_rate: float
    entrance_kernel: Callable = field(repr=False, compare=False)


@dataclass(frozen=True)
class PhiFunctionals:
    lam: float
    phi00: float
    phi01: float
    phi10: float
    phi11: float


@dataclass(frozen=True)
class ExcursionSkeleton:
    """Switching structure of a path in local-time coordinates.

    Each segment is (start_boundary, local_time_coordinate, excursion_type).
    A "return" segment opens a stay at a boundary, at the local time the
    boundary has accumulated so far; the "switch" segment that closes it
    carries the local time at which the switching excursion leaves.
    switch_times holds the total local time (both boundaries) at each switch.
    """

    segments: list
    switch_times: list


def _check_boundary(b):
    if b not in (0, 1):
        raise ValueError("boundary must be 0 or 1")


def _oriented(theta: ThetaParams, from_boundary: int):
    """(near, far) mutation parameters: near belongs to the starting boundary."""
    _check_boundary(from_boundary)
    if from_boundary == 0:
        return theta.theta1, theta.theta2
    return theta.theta2, theta.theta1


def total_mass(theta: ThetaParams, lam: float, from_boundary: int = 0) -> float:
    """lambda n_lambda 1 for excursions from ``from_boundary`` killed at the other endpoint."""
    if lam < 0:
        raise DomainError("lambda must be non-negative")
    idx = spectral_index(theta, lam)
    near, far = _oriented(theta, from_boundary)
    a, b = idx.a, idx.b
    return 0.5 * gamma_ratio([theta.theta_total, 1 - a, 1 - b], [1 - near, far, near - a, near - b]).real


def switch_rate(theta: ThetaParams) -> float:
    """Rate, per unit local time, of excursions that reach the opposite endpoint."""
    th1, th2 = theta.theta1, theta.theta2
    return 1.0 / (2.0 * special.beta(th1, th2) * special.beta(1 - th1, 1 - th2))


def _switch_gamma_form(theta: ThetaParams) -> float:
    th1, th2, tt = theta.theta1, theta.theta2, theta.theta_total
    return gamma_ratio([tt, 2 - tt], [th1, th2, 1 - th1, 1 - th2]).real


def phi_functionals(theta: ThetaParams, lam: float) -> PhiFunctionals:
    """n((1 - e^{-lambda H}) 1{excursion from i ends at j}) for i, j in {0, 1}."""
    if lam < 0:
        raise DomainError("lambda must be non-negative")
    if lam == 0:
        return PhiFunctionals(0.0, 0.0, 0.0, 0.0, 0.0)
    idx = spectral_index(theta, lam)
    a, b = idx.a, idx.b
    th1, th2, tt = theta.theta1, theta.theta2, theta.theta_total
    both = _switch_gamma_form(theta)
    phi00 = 0.5 * (gamma_ratio([tt, 1 - a, 1 - b], [1 - th1, th2, th1 - a, th1 - b]).real - both)
    phi11 = 0.5 * (gamma_ratio([tt, 1 - a, 1 - b], [1 - th2, th1, th2 - a, th2 - b]).real - both)
    cross = 0.5 * gamma_ratio([tt], [th1, th2, 1 - th1, 1 - th2]).real * (
        math.gamma(2 - tt) - gamma_ratio([1 - a, 1 - b], []).real
    )
    return PhiFunctionals(float(lam), phi00, cross, cross, phi11)


def _entrance_prefactor(theta: ThetaParams, idx, from_boundary: int) -> float:
    near, far = _oriented(theta, from_boundary)
    a, b = idx.a, idx.b
    return 0.5 * gamma_ratio([a, b, 1 - a, 1 - b], [1 - near, far, near - a, near - b]).real


NORMALIZATIONS = ("construction", "stated")


def entrance_law_laplace(
    theta: ThetaParams, lam: float, from_boundary: int, x, normalization: str = "construction"
):
    """Lebesgue density of n_lambda(dx), the Laplace transform of the entrance law.

    The density is a prefactor times m(x) times the solution that is killed
    at the far endpoint, written as the regular solution at the far end minus
    a Gamma ratio times the regular solution at the near end.

    With ``normalization="construction"`` the prefactor is lambda n_lambda 1
    times the Green constant, which is what the killed-resolvent limit
    n_lambda(A) = lambda n_lambda 1 R_lambda 1_A(0+) produces. ``"stated"``
    uses half of that, the closed form as usually written. See the notes
    in the README on this factor.
    """
    if not lam > 0:
        raise DomainError("lambda must be positive")
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    xs = wfmodel._check_open(x)
    idx = spectral_index(theta, lam)
    a, b = idx.a, idx.b
    th1, th2 = theta.theta1, theta.theta2
    pref = _entrance_prefactor(theta, idx, from_boundary)
    if normalization == "construction":
        pref *= 2.0
    fm = increasing_solution(theta, idx, xs)
    fp = decreasing_solution(theta, idx, xs)
    if from_boundary == 0:
        bracket = fp - gamma_ratio([th1 - a, th1 - b], [th1, 1 - th2]).real * fm
    else:
        bracket = fm - gamma_ratio([th2 - a, th2 - b], [th2, 1 - th1]).real * fp
    out = pref * wfmodel.speed_density(theta, xs) * bracket
    return float(out) if np.ndim(x) == 0 else out


def entrance_law_killed_form(theta: ThetaParams, lam: float, from_boundary: int, x):
    """Same density as ``entrance_law_laplace`` (construction normalisation),
    written through the solution that vanishes at the far endpoint.

    For from_boundary 0 the bracket equals -c1 * delta * (1-x)^(1-theta2) G(1-x),
    where delta is the connection coefficient of that solution in the
    regular one at 0; no cancellation occurs near the far endpoint.
    """
    xs = wfmodel._check_open(x)
    idx = spectral_index(theta, lam)
    a, b = idx.a, idx.b
    th1, th2 = theta.theta1, theta.theta2
    pref = 2.0 * _entrance_prefactor(theta, idx, from_boundary)
    if from_boundary == 0:
        _, bh, _, _ = hyperfun.connection_coefficients(a, b, th1)
        delta = -bh / hyperfun.connection_determinant(a, b, th1)
        c1 = gamma_ratio([th1 - a, th1 - b], [th1, 1 - th2]).real
        out = -pref * c1 * delta * wfmodel.speed_density(theta, xs) * killed_decreasing(theta, idx, xs)
    else:
        # mirror image: swap the parameters and reflect x
        out = entrance_law_killed_form(theta.swapped(), lam, 0, 1 - xs)
    return float(out) if np.ndim(x) == 0 else out


def entrance_mass(theta: ThetaParams, lam: float, from_boundary: int = 0, nodes: int = 128) -> float:
    """int_0^1 n_lambda(dx) with the construction normalisation, by quadrature.

    The bracket of the density is integrated against m term by term, each
    eigenfunction with its endpoint singularity split off.
    """
    if from_boundary == 1:
        return entrance_mass(theta.swapped(), lam, 0, nodes)
    idx = spectral_index(theta, lam)
    a, b = idx.a, idx.b
    th1, th2 = theta.theta1, theta.theta2
    t_m, t_p = eigen_integrals(theta, lam, lambda y: np.ones_like(y), nodes)
    c1 = gamma_ratio([th1 - a, th1 - b], [th1, 1 - th2]).real
    return 2.0 * _entrance_prefactor(theta, idx, 0) * (t_p - c1 * t_m)


def absorbed_mass_rate(theta: ThetaParams, lam: float) -> float:
    """n(e^{-lambda H}; switching excursion): the part of lambda n_lambda 1 carried
    by switching excursions after they reach the far endpoint.

    Equals switch_rate times Gamma(1-a)Gamma(1-b)/Gamma(2-|theta|); the same
    value for both starting boundaries.
    """
    idx = spectral_index(theta, lam)
    return switch_rate(theta) * gamma_ratio([1 - idx.a, 1 - idx.b], [2 - theta.theta_total]).real


def excursion_law(theta: ThetaParams, lam: float, from_boundary: int = 0) -> ExcursionLaw:
    return ExcursionLaw(
        theta,
        from_boundary,
        float(lam),
        total_mass(theta, lam, from_boundary),
        switch_rate(theta),
        lambda x: entrance_law_laplace(theta, lam, from_boundary, x),
    )


def entrance_density_time(
    theta: ThetaParams, t: float, from_boundary: int, x: float, method_cfg: InversionConfig = InversionConfig()
) -> float:
    """Density of the entrance law n_t(dx) at time t, by Laplace inversion in lambda."""
    if not 0.0 < x < 1.0:
        raise DomainError("x must lie in (0, 1)")
    return invert(lambda lam: entrance_law_laplace(theta, lam, from_boundary, x), t, method_cfg)


def ito_mckean_total_mass(theta: ThetaParams, lam: float, from_boundary: int = 0, y: float = 1e-4) -> float:
    """lambda n^{y -> b}_lambda 1 from the two killed eigenfunctions at a point y near the start.

    Uses W(phi_minus, phi_plus) / (s'(y) phi_minus(y) phi_plus(y)) with
    analytic derivatives; it tends to total_mass as y approaches the start.
    """
    if from_boundary == 1:
        return ito_mckean_total_mass(theta.swapped(), lam, 0, y)
    idx = spectral_index(theta, lam)
    a, b = idx.a, idx.b
    th1, th2 = theta.theta1, theta.theta2
    minus = float(increasing_solution(theta, idx, y))
    minus_d = hyperfun.hyp2f1_deriv(a, b, th1, y)
    u = 1.0 - y
    core = hyperfun.hyp2f1(th1 - a, th1 - b, 2 - th2, u).value
    core_d = hyperfun.hyp2f1_deriv(th1 - a, th1 - b, 2 - th2, u)
    plus = float(killed_decreasing(theta, idx, y))
    plus_d = -((1 - th2) * u ** (-th2) * core + u ** (1 - th2) * core_d)
    wr = minus_d * plus - plus_d * minus
    return float(wr / (wfmodel.scale_deriv(theta, y) * minus * plus))


def default_hausdorff_grid() -> np.ndarray:
    return np.logspace(1.0, 5.0, 41)


def hausdorff_index(theta: ThetaParams, boundary: int = 0, lambda_grid=None) -> float:
    """Power-law index of phi_{b,b}(lambda) for large lambda.

    Ordinary least squares of log phi against log lambda, with the points
    of the top decade counted twice.
    """
    _check_boundary(boundary)
    grid = default_hausdorff_grid() if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    if grid.size < 3 or np.any(grid <= 0):
        raise GridTooNarrow("need at least three positive lambda values")
    if math.log10(grid.max() / grid.min()) < 4.0 - 1e-12:
        raise GridTooNarrow("lambda grid must span at least four decades")
    if np.any(grid <= wfmodel.singular_lambda(theta)):
        raise GridTooNarrow("lambda grid must lie above the double-root point")
    vals = []
    for lam in grid:
        phi = phi_functionals(theta, float(lam))
        vals.append(phi.phi00 if boundary == 0 else phi.phi11)
    vals = np.asarray(vals)
    if np.any(vals <= 0):
        raise GridTooNarrow("phi is not positive on the grid")
    weights = np.where(grid >= grid.max() / 10.0, 2.0, 1.0)
    slope, _ = np.polyfit(np.log(grid), np.log(vals), 1, w=np.sqrt(weights))
    return float(slope)


def sample_skeleton(
    theta: ThetaParams, rng: np.random.Generator, n_switches: int, start_boundary: int = 0
) -> ExcursionSkeleton:
    """Alternating boundary stays in local time.

    At each boundary the local time until the first switching excursion is
    exponential with rate ``switch_rate``; the path then sits at the other
    boundary and the same happens there.
    """
    if n_switches < 1:
        raise ValueError("n_switches must be at least 1")
    _check_boundary(start_boundary)
    rate = switch_rate(theta)
    clocks = [0.0, 0.0]
    total = 0.0
    segments, switch_times = [], []
    b = start_boundary
    for _ in range(n_switches):
        segments.append((b, clocks[b], "return"))
        stay = rng.exponential(1.0 / rate)
        clocks[b] += stay
        total += stay
        segments.append((b, clocks[b], "switch"))
        switch_times.append(total)
        b = 1 - b
    return ExcursionSkeleton(segments, switch_times)
