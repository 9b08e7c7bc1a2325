"""Eigenfunctions of the generator, hitting-time Laplace transforms and exit functionals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from . import hyperfun
from .hyperfun import gamma_ratio
from .wfmodel import DomainError, SpectralIndex, ThetaParams, spectral_index

KINDS = ("unkilled", "killed_at_0", "killed_at_1")


@dataclass(frozen=True)
class EigenPair:
    theta: ThetaParams
    idx: SpectralIndex
    kind: str = "unkilled"


def eigen_pair(theta: ThetaParams, lam: float, kind: str = "unkilled") -> EigenPair:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    return EigenPair(theta, spectral_index(theta, lam), kind)


def _as_grid(x):
    arr = np.asarray(x, dtype=float)
    if np.any((arr < 0.0) | (arr > 1.0)):
        raise DomainError("x must lie in [0, 1]")
    return arr


def _scalar_or_array(out, x):
    return float(out) if np.ndim(x) == 0 else out


def increasing_solution(theta: ThetaParams, idx: SpectralIndex, x):
    """2F1(a, b; theta1; x), the solution regular at 0."""
    return hyperfun.hyp2f1_array(idx.a, idx.b, theta.theta1, x)


def decreasing_solution(theta: ThetaParams, idx: SpectralIndex, x):
    """2F1(a, b; theta2; 1 - x), the solution regular at 1."""
    return hyperfun.hyp2f1_array(idx.a, idx.b, theta.theta2, 1.0 - np.asarray(x, dtype=float))


def killed_increasing(theta: ThetaParams, idx: SpectralIndex, x):
    """x^(1-theta1) 2F1(theta2-b, theta2-a; 2-theta1; x), vanishing at 0."""
    x = np.asarray(x, dtype=float)
    th1, th2 = theta.theta1, theta.theta2
    core = hyperfun.hyp2f1_array(th2 - idx.b, th2 - idx.a, 2 - th1, x)
    return x ** (1 - th1) * core


def killed_decreasing(theta: ThetaParams, idx: SpectralIndex, x):
    """(1-x)^(1-theta2) 2F1(theta1-a, theta1-b; 2-theta2; 1-x), vanishing at 1."""
    u = 1.0 - np.asarray(x, dtype=float)
    th1, th2 = theta.theta1, theta.theta2
    core = hyperfun.hyp2f1_array(th1 - idx.a, th1 - idx.b, 2 - th2, u)
    return u ** (1 - th2) * core


def phi(e: EigenPair, sign: str, x):
    """Monotone eigenfunction of the (possibly killed) generator.

    ``sign="minus"`` is the increasing solution and ``sign="plus"`` the
    decreasing one. Killing at 0 changes only the increasing solution and
    killing at 1 only the decreasing one.
    """
    xs = _as_grid(x)
    if sign == "minus":
        if e.kind == "killed_at_0":
            out = killed_increasing(e.theta, e.idx, xs)
        else:
            out = increasing_solution(e.theta, e.idx, xs)
    elif sign == "plus":
        if e.kind == "killed_at_1":
            out = killed_decreasing(e.theta, e.idx, xs)
        else:
            out = decreasing_solution(e.theta, e.idx, xs)
    else:
        raise ValueError("sign must be 'plus' or 'minus'")
    return _scalar_or_array(out, x)


def phi_boundary_values(theta: ThetaParams, lam: float):
    """Endpoint values of the killed eigenfunctions from the Gauss summation formula.

    Returns (plus killed at 0 evaluated at 0, minus killed at 0 at 1,
    plus killed at 1 at 0, minus killed at 1 at 1).
    """
    idx = spectral_index(theta, lam)
    a, b = idx.a, idx.b
    th1, th2 = theta.theta1, theta.theta2
    plus0_at0 = gamma_ratio([th2, 1 - th1], [th2 - a, th2 - b]).real
    minus0_at1 = gamma_ratio([2 - th1, 1 - th2], [1 - a, 1 - b]).real
    plus1_at0 = gamma_ratio([2 - th2, 1 - th1], [1 - a, 1 - b]).real
    minus1_at1 = gamma_ratio([th1, 1 - th2], [th1 - a, th1 - b]).real
    return plus0_at0, minus0_at1, plus1_at0, minus1_at1


def hitting_laplace(theta: ThetaParams, lam: float, x: float, y: float, kind: str = "unkilled") -> float:
    """E_x[exp(-lambda H_y)] as a ratio of monotone eigenfunctions.

    With ``kind`` set to a killed variant the expectation is over the
    process killed at that endpoint (zero contribution after killing).
    """
    _as_grid([x, y])
    if x == y or lam == 0.0 and kind == "unkilled":
        return 1.0
    e = eigen_pair(theta, lam, kind)
    sign = "minus" if x < y else "plus"
    vals = np.asarray(phi(e, sign, np.array([x, y])))
    return float(vals[0] / vals[1])


def exit_prob(theta: ThetaParams, x):
    """P_x(H_1 < H_0) = B(1-theta1, 1-theta2; x) / B(1-theta1, 1-theta2).

    The incomplete Beta is written as x^(1-theta1) 2F1(1-theta1, theta2; 2-theta1; x)/(1-theta1).
    """
    xs = _as_grid(x)
    th1, th2 = theta.theta1, theta.theta2
    p = 1 - th1
    core = hyperfun.hyp2f1_array(p, th2, 2 - th1, xs)
    out = xs**p * core / (p * special.beta(p, 1 - th2))
    out = np.clip(out, 0.0, 1.0)
    return _scalar_or_array(out, x)


def restricted_laplace(theta: ThetaParams, lam: float, x, target: int):
    """E_x[exp(-lambda H_b); H_b < H_{1-b}] for target endpoint b."""
    xs = _as_grid(x)
    idx = spectral_index(theta, lam)
    a, b = idx.a, idx.b
    th1, th2 = theta.theta1, theta.theta2
    if target == 1:
        const = gamma_ratio([1 - a, 1 - b], [2 - th1, 1 - th2]).real
        out = const * killed_increasing(theta, idx, xs)
    elif target == 0:
        const = gamma_ratio([1 - a, 1 - b], [2 - th2, 1 - th1]).real
        out = const * killed_decreasing(theta, idx, xs)
    else:
        raise ValueError("target must be 0 or 1")
    return _scalar_or_array(out, x)


def boundary_ratio_limits(theta: ThetaParams, lam: float):
    """Limits of the exit functionals near the endpoints, as Gamma ratios.

    Returns
      r0: lim_{x->0} E_x[(1 - e^{-lambda H_0}); H_0 < H_1] / P_x(H_1 < H_0),
      r1: lim_{x->1} E_x[(1 - e^{-lambda H_1}); H_1 < H_0] / P_x(H_0 < H_1),
      cross: lim_{x->0} E_x[e^{-lambda H_1}; H_1 < H_0] / P_x(H_1 < H_0),
             which equals the mirror-image limit at 1.
    """
    idx = spectral_index(theta, lam)
    a, b = idx.a, idx.b
    th1, th2, tt = theta.theta1, theta.theta2, theta.theta_total
    cross = gamma_ratio([1 - a, 1 - b], [2 - tt]).real
    r0 = gamma_ratio([1 - a, 1 - b, 1 - th2, th1], [2 - tt, th1 - a, th1 - b]).real - 1.0
    r1 = gamma_ratio([1 - a, 1 - b, 1 - th1, th2], [2 - tt, th2 - a, th2 - b]).real - 1.0
    return r0, r1, cross


def boundary_ratios_at(theta: ThetaParams, lam: float, x: float):
    """The three ratios of ``boundary_ratio_limits`` evaluated at a finite x.

    The first and third use x itself (meant to be near 0), the second uses
    1 - x (near 1).
    """
    p1 = exit_prob(theta, x)
    r0 = ((1.0 - p1) - restricted_laplace(theta, lam, x, 0)) / p1
    cross = restricted_laplace(theta, lam, x, 1) / p1
    xr = 1.0 - x
    p0 = 1.0 - exit_prob(theta, xr)
    r1 = ((1.0 - p0) - restricted_laplace(theta, lam, xr, 1)) / p0
    return r0, r1, cross


def generator_apply(theta: ThetaParams, fn, x: float, h: float = 1e-4) -> float:
    """Finite-difference action of the generator on a function at x."""
    f0, fp, fm = fn(x), fn(x + h), fn(x - h)
    d2 = (fp - 2 * f0 + fm) / (h * h)
    d1 = (fp - fm) / (2 * h)
    return 0.5 * x * (1 - x) * d2 + 0.5 * (theta.theta1 - theta.theta_total * x) * d1
