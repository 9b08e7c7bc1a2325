"""Numerical inverse Laplace transform on real nodes (Gaver-Stehfest)."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction


class InversionInstability(RuntimeError):
    """Two neighbouring Stehfest orders disagree beyond the configured tolerance."""


@dataclass(frozen=True)
class InversionConfig:
    method: str = "gaver_stehfest"
    order: int = 16
    t_min: float = 0.05
    consistency_tol: float = 1e-2

    def __post_init__(self):
        if self.method != "gaver_stehfest":
            raise ValueError("only the Gaver-Stehfest method is available")
        if self.order % 2 or not 8 <= self.order <= 24:
            raise ValueError("order must be even and between 8 and 24")


@dataclass(frozen=True)
class InversionResult:
    value: float
    lower_order_value: float
    discrepancy: float
    order: int


@functools.lru_cache(maxsize=None)
def stehfest_weights(order: int) -> tuple:
    """Exact Stehfest coefficients V_1..V_order, rounded to float at the end."""
    half = order // 2
    out = []
    for k in range(1, order + 1):
        acc = Fraction(0)
        for j in range((k + 1) // 2, min(k, half) + 1):
            acc += Fraction(
                j**half * math.factorial(2 * j),
                math.factorial(half - j) * math.factorial(j) * math.factorial(j - 1)
                * math.factorial(k - j) * math.factorial(2 * j - k),
            )
        sign = -1 if (k + half) % 2 else 1
        out.append(float(sign * acc))
    return tuple(out)


def _stehfest(values: dict, t: float, order: int) -> float:
    ln2t = math.log(2.0) / t
    weights = stehfest_weights(order)
    return ln2t * math.fsum(w * values[k] for k, w in zip(range(1, order + 1), weights))


def invert_detailed(F, t: float, cfg: InversionConfig = InversionConfig()) -> InversionResult:
    if not t > 0:
        raise ValueError("t must be positive")
    if t < cfg.t_min:
        raise InversionInstability(f"t = {t} is below t_min = {cfg.t_min}")
    ln2t = math.log(2.0) / t
    values = {k: float(F(k * ln2t)) for k in range(1, cfg.order + 1)}
    if not all(math.isfinite(v) for v in values.values()):
        raise InversionInstability("transform is not finite at a Stehfest node")
    hi = _stehfest(values, t, cfg.order)
    lo = _stehfest(values, t, cfg.order - 2)
    gap = abs(hi - lo)
    return InversionResult(hi, lo, gap, cfg.order)


def invert(F, t: float, cfg: InversionConfig = InversionConfig()) -> float:
    """Gaver-Stehfest approximation of the inverse Laplace transform of F at t.

    F is called at the real nodes k ln2 / t, k = 1..order. The result at
    order n is compared with order n - 2 on the same nodes; if they differ
    by more than ``consistency_tol`` times the value, ``InversionInstability``
    is raised.
    """
    res = invert_detailed(F, t, cfg)
    if not res.discrepancy <= cfg.consistency_tol * abs(res.value):
        raise InversionInstability(
            f"orders {cfg.order} and {cfg.order - 2} differ by {res.discrepancy:.3g} at t = {t}"
        )
    return res.value
