"""Monte Carlo paths from the exact transition sampler, and hitting estimators built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hitting import exit_prob
from .wfmodel import DomainError, ThetaParams, exact_transition_sample

DEFAULT_DT = 1e-2
DEFAULT_STEP_CAP = 10**7


class BudgetExceeded(RuntimeError):
    """A batch of paths used more transition draws than the step cap allows."""


@dataclass(frozen=True)
class PathSample:
    times: np.ndarray
    states: np.ndarray
    theta: ThetaParams
    seed: int | None = None


@dataclass(frozen=True)
class HitEstimate:
    value: float
    std_error: float
    n_paths: int
    eps_boundary: float
    dt: float = DEFAULT_DT


def make_rng(seed) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def _check_grid(t_grid):
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(np.diff(t) <= 0) or t[0] < 0:
        raise DomainError("t_grid must be a strictly increasing vector of non-negative times")
    return t


def simulate_paths(theta: ThetaParams, x0, t_grid, rng: np.random.Generator, n_paths: int = 1) -> np.ndarray:
    """States of ``n_paths`` independent paths at the grid times, shape (n_paths, len(t_grid)).

    Each step is an exact draw from the transition law over the gap, so the
    marginals at grid times carry no discretisation error. A grid starting
    at 0 records x0 itself in the first column.
    """
    if not 0.0 <= x0 <= 1.0:
        raise DomainError("x0 must lie in [0, 1]")
    t = _check_grid(t_grid)
    out = np.empty((n_paths, t.size))
    state = np.full(n_paths, float(x0))
    prev = 0.0
    for j, tj in enumerate(t):
        gap = tj - prev
        if gap > 0:
            state = exact_transition_sample(theta, round(gap, 15), state, rng)
        out[:, j] = state
        prev = tj
    return out


def simulate_path(theta: ThetaParams, x0: float, t_grid, rng: np.random.Generator, seed=None) -> PathSample:
    t = _check_grid(t_grid)
    states = simulate_paths(theta, x0, t, rng, 1)[0]
    return PathSample(t, states, theta, seed)


def _bridge_cross_prob(a, b, level, dt):
    """Chance that a diffusion bridge from a to b over dt touches ``level``, both ends on one side.

    Uses the Brownian-bridge formula with the local variance x(1-x) frozen
    at the level.
    """
    var = level * (1.0 - level) * dt
    return np.exp(-2.0 * np.abs(a - level) * np.abs(b - level) / var)


def estimate_exit_prob(
    theta: ThetaParams,
    x0: float,
    eps: float = 0.02,
    dt: float = DEFAULT_DT,
    n_paths: int = 10_000,
    rng: np.random.Generator | None = None,
    step_cap: int = DEFAULT_STEP_CAP,
) -> HitEstimate:
    """Monte Carlo estimate of P_{x0}(H_1 < H_0).

    Paths run until they enter the collar [0, eps] or [1-eps, 1], either at
    a grid time or, by the bridge correction, between two grid times (the
    entry point is then the collar edge). Each path is classified as a
    Bernoulli draw with the analytic exit probability from its entry point,
    so no eps-dependent bias remains; the estimate is a mean of indicators.
    """
    if not 0.0 < eps < 0.1:
        raise DomainError("eps must lie in (0, 0.1)")
    if not 0.0 <= x0 <= 1.0:
        raise DomainError("x0 must lie in [0, 1]")
    rng = make_rng(None) if rng is None else rng
    entry = np.full(n_paths, np.nan)
    state = np.full(n_paths, float(x0))
    inside = (state <= eps) | (state >= 1 - eps)
    entry[inside] = state[inside]
    active = np.flatnonzero(~inside)
    steps = 0
    while active.size:
        steps += active.size
        if steps > step_cap:
            raise BudgetExceeded(f"more than {step_cap} transition draws")
        a = state[active]
        b = exact_transition_sample(theta, dt, a, rng)
        state[active] = b
        u = rng.random(active.size)
        low = b <= eps
        high = b >= 1 - eps
        q0 = np.where(low | high, 0.0, _bridge_cross_prob(a, b, eps, dt))
        q1 = np.where(low | high, 0.0, _bridge_cross_prob(a, b, 1 - eps, dt))
        via0 = u < q0
        via1 = ~via0 & (u < q0 + q1)
        hit_pt = np.where(low | high, b, np.where(via0, eps, 1 - eps))
        done = low | high | via0 | via1
        entry[active[done]] = hit_pt[done]
        active = active[~done]
    p = np.asarray(exit_prob(theta, entry))
    outcome = rng.random(n_paths) < p
    v = float(outcome.mean())
    return HitEstimate(v, math.sqrt(v * (1 - v) / n_paths), n_paths, float(eps), float(dt))


def estimate_hitting_laplace(
    theta: ThetaParams,
    x0: float,
    y: float,
    lam: float,
    dt: float = DEFAULT_DT,
    n_paths: int = 10_000,
    rng: np.random.Generator | None = None,
    step_cap: int = DEFAULT_STEP_CAP,
    horizon: float | None = None,
) -> HitEstimate:
    """Monte Carlo estimate of E_{x0}[exp(-lambda H_y)].

    A crossing is detected when a grid step ends on the far side of y, or,
    between two grid points on the near side, with the bridge probability;
    the crossing time is interpolated linearly in the first case and taken
    at the step midpoint in the second. Paths still running at ``horizon``
    (default 40/lambda) contribute zero, an error below exp(-40).
    The remaining bias comes from the time resolution of the grid.
    """
    if not (0.0 < y < 1.0 and 0.0 <= x0 <= 1.0):
        raise DomainError("need y in (0, 1) and x0 in [0, 1]")
    if lam < 0:
        raise DomainError("lambda must be non-negative")
    if lam == 0 or x0 == y:
        return HitEstimate(1.0, 0.0, n_paths, 0.0, float(dt))
    rng = make_rng(None) if rng is None else rng
    horizon = 40.0 / lam if horizon is None else horizon
    sign = 1.0 if x0 < y else -1.0
    hit_time = np.full(n_paths, np.inf)
    state = np.full(n_paths, float(x0))
    active = np.arange(n_paths)
    now = 0.0
    steps = 0
    while active.size and now < horizon:
        steps += active.size
        if steps > step_cap:
            raise BudgetExceeded(f"more than {step_cap} transition draws")
        a = state[active]
        b = exact_transition_sample(theta, dt, a, rng)
        state[active] = b
        crossed = sign * (b - y) >= 0
        frac = np.where(crossed, (y - a) / np.where(b != a, b - a, 1.0), 0.5)
        bridged = ~crossed & (rng.random(active.size) < _bridge_cross_prob(a, b, y, dt))
        done = crossed | bridged
        hit_time[active[done]] = now + dt * np.clip(frac[done], 0.0, 1.0)
        active = active[~done]
        now += dt
    vals = np.exp(-lam * hit_time)
    v = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n_paths))
    return HitEstimate(v, se, n_paths, 0.0, float(dt))


def occupation_near_boundary(path: PathSample, eps: float, boundary: int = 0) -> float:
    """Fraction of grid times at which the path lies within eps of the boundary."""
    s = np.asarray(path.states)
    if boundary == 0:
        return float(np.mean(s < eps))
    return float(np.mean(s > 1 - eps))
