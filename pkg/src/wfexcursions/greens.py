"""Green's functions and resolvents, plain and killed at the endpoints."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import hyperfun, wfmodel
from .hitting import (
    decreasing_solution,
    exit_prob,
    increasing_solution,
    killed_decreasing,
    killed_increasing,
    restricted_laplace,
)
from .hyperfun import gamma_ratio
from .wfmodel import DomainError, ThetaParams, ToleranceUnreachable, spectral_index

REPRESENTATIONS = ("jacobi_series", "product_form", "wronskian_closed")
RESOLVENT_KINDS = ("unkilled", "killed0", "killed1", "killed01")

JACOBI_TERMS = 16384
PRODUCT_LEVELS = 4096


@dataclass(frozen=True)
class GreenEval:
    value: float
    representation: str
    terms_used: int
    error_estimate: float = 0.0


@dataclass(frozen=True)
class ResolventEval:
    value: float
    kind: str
    quadrature_nodes: int
    representation: str = "wronskian"


def _check_point(v, name):
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"{name} = {v} must lie in [0, 1]")


def green_constant(theta: ThetaParams, idx) -> float:
    """2 Gamma(a) Gamma(b) / Gamma(|theta|)."""
    return 2.0 * gamma_ratio([idx.a, idx.b], [theta.theta_total]).real


# ---------------------------------------------------------------------------
# Green's function, closed form


def _green_closed(theta: ThetaParams, lam: float, x: float, y: float) -> GreenEval:
    idx = spectral_index(theta, lam)
    lo, hi = min(x, y), max(x, y)
    left = hyperfun.hyp2f1(idx.a, idx.b, theta.theta1, lo)
    right = hyperfun.hyp2f1(idx.a, idx.b, theta.theta2, 1.0 - hi)
    value = green_constant(theta, idx) * left.value * right.value
    return GreenEval(value, "wronskian_closed", left.terms_used + right.terms_used)


# ---------------------------------------------------------------------------
# Green's function, Jacobi series


@functools.lru_cache(maxsize=64)
def _scaled_jacobi(theta1: float, theta2: float, x: float, n_terms: int) -> np.ndarray:
    """R_n(x) / sqrt(pi_n) for n = 0..n_terms."""
    theta = wfmodel.ThetaParams(theta1, theta2)
    table = wfmodel.jacobi_R_table(theta, n_terms, np.array([x]))[:, 0]
    n = np.arange(n_terms + 1)
    return table * np.exp(-0.5 * wfmodel.log_pi_n(theta, n))


def _window_richardson(partial: np.ndarray, base: int):
    """Accelerate oscillating partial sums with window means and Richardson steps.

    Window means over [M, 2M) remove the oscillation and leave a smooth
    error ~ c/M; two Richardson passes remove the first two orders.
    """
    def window(m):
        return partial[m:2 * m].mean()

    a1, a2, a3 = window(base), window(2 * base), window(4 * base)
    r1 = 2 * a2 - a1
    r2 = 2 * a3 - a2
    est = (4 * r2 - r1) / 3
    return est, abs(r2 - r1) / 3


def _green_jacobi(theta: ThetaParams, lam: float, x: float, y: float, n_terms: int = JACOBI_TERMS) -> GreenEval:
    base = n_terms // 8
    rx = _scaled_jacobi(theta.theta1, theta.theta2, float(x), n_terms)
    ry = _scaled_jacobi(theta.theta1, theta.theta2, float(y), n_terms)
    n = np.arange(n_terms + 1)
    terms = 2.0 / (2.0 * lam + n * (n + theta.theta_total - 1.0)) * rx * ry
    partial = np.cumsum(terms)
    value, err = _window_richardson(partial, base)
    return GreenEval(float(value), "jacobi_series", n_terms + 1, float(err))


def jacobi_identity_sum(theta: ThetaParams, lam: float, x: float, y: float, n_terms: int = JACOBI_TERMS) -> float:
    """The bilinear Jacobi sum on the right of the product-of-2F1 identity, accelerated."""
    return _green_jacobi(theta, lam, x, y, n_terms).value


# ---------------------------------------------------------------------------
# Green's function, product form


def _log_rising(c: float, n: np.ndarray) -> np.ndarray:
    return special.gammaln(c + n) - special.gammaln(c)


@functools.lru_cache(maxsize=256)
def _coalescent_kernel(theta1: float, theta2: float, x: float, y: float, levels: int) -> np.ndarray:
    """S_n = sum_k C(n,k) (xy)^k ((1-x)(1-y))^(n-k) (|theta|)_n / ((theta1)_k (theta2)_(n-k)).

    Evaluated in log space, a block of n at a time.
    """
    tt = theta1 + theta2
    with np.errstate(divide="ignore"):
        l_in = math.log(x * y) if x * y > 0 else -np.inf
        l_out = math.log((1 - x) * (1 - y)) if (1 - x) * (1 - y) > 0 else -np.inf
    k = np.arange(levels + 1)
    lg_k1 = special.gammaln(k + 1.0)
    r1 = _log_rising(theta1, k)
    r2 = _log_rising(theta2, k)
    rt = _log_rising(tt, k)
    pow_in = np.where(k > 0, k * l_in, 0.0) if np.isfinite(l_in) else np.where(k > 0, -np.inf, 0.0)
    pow_out = np.where(k > 0, k * l_out, 0.0) if np.isfinite(l_out) else np.where(k > 0, -np.inf, 0.0)
    a_k = -lg_k1 + pow_in - r1
    b_j = -lg_k1 + pow_out - r2
    out = np.empty(levels + 1)
    block = 256
    for start in range(0, levels + 1, block):
        n = np.arange(start, min(start + block, levels + 1))
        kk = k[: n[-1] + 1]
        j = n[:, None] - kk[None, :]
        valid = j >= 0
        jj = np.where(valid, j, 0)
        L = a_k[None, : n[-1] + 1] + b_j[jj]
        L = np.where(valid, L, -np.inf)
        out[n] = np.exp(special.logsumexp(L, axis=1) + lg_k1[n] + rt[n])
    return out


@functools.lru_cache(maxsize=128)
def _product_weights(theta1: float, theta2: float, lam: float, levels: int) -> np.ndarray:
    """w_n = prod_{j>n} lambda_j/(lambda+lambda_j) / (lambda + lambda_n) for n = 0..levels."""
    theta = wfmodel.ThetaParams(theta1, theta2)
    n = np.arange(levels + 1)
    logp = wfmodel.log_survival_product(theta, lam, n, J=levels + 1)
    return np.exp(logp) / (lam + wfmodel.eigenvalue(theta, n))


def _richardson(values, exponents):
    table = list(values)
    for p in exponents:
        f = 2.0**p
        table = [(f * table[i + 1] - table[i]) / (f - 1) for i in range(len(table) - 1)]
    return table[0]


def _green_product(theta: ThetaParams, lam: float, x: float, y: float, levels: int = PRODUCT_LEVELS) -> GreenEval:
    lo, hi = min(x, y), max(x, y)
    # off the diagonal the terms decay geometrically with ratio
    # (sqrt(xy) + sqrt((1-x)(1-y)))^2, so far fewer levels suffice
    ratio = (math.sqrt(lo * hi) + math.sqrt((1 - lo) * (1 - hi))) ** 2
    if levels * (1.0 - ratio) > 60.0:
        needed = min(levels, int(60.0 / (1.0 - ratio)) + 32)
        S = _coalescent_kernel(theta.theta1, theta.theta2, float(lo), float(hi), needed)
        w = _product_weights(theta.theta1, theta.theta2, float(lam), levels)[: needed + 1]
        terms = w * S
        tail = terms[-1] * ratio / (1.0 - ratio)
        return GreenEval(float(terms.sum()), "product_form", needed + 1, float(tail))
    S = _coalescent_kernel(theta.theta1, theta.theta2, float(lo), float(hi), levels)
    w = _product_weights(theta.theta1, theta.theta2, float(lam), levels)
    partial = np.cumsum(w * S)
    # on the diagonal the terms fall off algebraically; the partial-sum error has
    # an expansion in powers n^-(p0 + i)
    if hi <= 0.0:
        p0 = 1.0 - theta.theta1
    elif lo >= 1.0:
        p0 = 1.0 - theta.theta2
    else:
        p0 = 0.5
    sizes = [levels // 16, levels // 8, levels // 4, levels // 2, levels]
    vals = [partial[s] for s in sizes]
    est = _richardson(vals, [p0 + i for i in range(4)])
    est_lower = _richardson(vals[1:], [p0 + i for i in range(3)])
    return GreenEval(float(est), "product_form", levels + 1, float(abs(est - est_lower)))


def green(theta: ThetaParams, lam: float, x: float, y: float, rep: str = "wronskian_closed", tol: float = 1e-8) -> GreenEval:
    """Green's function G_lambda(x, y) with respect to the speed measure.

    ``rep`` picks the Jacobi eigenfunction series, the coalescent product
    form or the closed form in terms of the two monotone eigenfunctions.
    The series forms raise ``ToleranceUnreachable`` when their error
    estimate exceeds ``tol`` relative to the value.
    """
    if not lam > 0:
        raise DomainError("lambda must be positive")
    _check_point(x, "x")
    _check_point(y, "y")
    if rep == "wronskian_closed":
        return _green_closed(theta, lam, x, y)
    if rep == "jacobi_series":
        out = _green_jacobi(theta, lam, x, y)
    elif rep == "product_form":
        out = _green_product(theta, lam, x, y)
    else:
        raise ValueError(f"rep must be one of {REPRESENTATIONS}")
    if out.error_estimate > tol * abs(out.value):
        raise ToleranceUnreachable(f"{rep} error estimate {out.error_estimate:.3g} exceeds tol")
    return out


def new_identity_check(theta: ThetaParams, lam: float, x: float, y: float) -> float:
    """Relative gap between the two sides of the product-of-2F1 / Jacobi-sum identity.

    Left: 2F1(a,b;theta1;x^y) 2F1(a,b;theta2;1-(x v y)).
    Right: Gamma(|theta|)/(2 Gamma(a) Gamma(b)) times the Jacobi bilinear sum.
    """
    idx = spectral_index(theta, lam)
    lo, hi = min(x, y), max(x, y)
    lhs = hyperfun.hyp2f1(idx.a, idx.b, theta.theta1, lo).value * hyperfun.hyp2f1(idx.a, idx.b, theta.theta2, 1 - hi).value
    scale = gamma_ratio([theta.theta_total], [idx.a, idx.b]).real / 2.0
    rhs = scale * jacobi_identity_sum(theta, lam, x, y)
    return abs(lhs - rhs) / abs(lhs)


# ---------------------------------------------------------------------------
# Resolvents


class _Basis:
    """Integrals of f against m times each monotone eigenfunction over [0, x] and [x, 1].

    Near 0 the decreasing solution has a component x^(1-theta1) that the
    Beta weight does not absorb; on a boundary layer [0, s0] it is split off
    by the connection formula and integrated with its own Gauss rule.
    Likewise near 1. The layer shrinks like 1/lambda because for large
    lambda the two parts of the split grow exponentially and cancel.
    Between the layers the panels are graded geometrically towards the ends
    and both solutions are evaluated directly.
    """

    def __init__(self, theta: ThetaParams, idx, f, nodes: int, panel_nodes: int = 40):
        self.theta, self.idx, self.f, self.nodes = theta, idx, f, int(nodes)
        self.panel_nodes = int(panel_nodes)
        th1, th2 = theta.theta1, theta.theta2
        self.logB = special.betaln(th1, th2)
        alpha_h, beta_h, alpha_k, beta_k = hyperfun.connection_coefficients(idx.a, idx.b, th1)
        self.alpha_h, self.beta_h = alpha_h, beta_h
        det = hyperfun.connection_determinant(idx.a, idx.b, th1)
        self.gamma, self.delta = beta_k / det, -beta_h / det
        self.layer = min(0.5, 1.0 / (1.0 + 4.0 * abs(idx.lam)))
        self._cache = {}

    def _f(self, z):
        return np.asarray(self.f(z), dtype=float) * np.ones_like(z)

    def left(self, s: float):
        """(int_0^s Fm f m, int_0^s Fp f m) for s inside the layer at 0."""
        key = ("L", s)
        if key in self._cache:
            return self._cache[key]
        if s <= 0.0:
            return (0.0, 0.0)
        th1, th2 = self.theta.theta1, self.theta.theta2
        a, b = self.idx.a, self.idx.b
        z, w = wfmodel._gauss_jacobi_interval(0.0, s, th1 - 1.0, 0.0, self.nodes)
        base = w * np.exp((th2 - 1) * np.log1p(-z) - self.logB) * self._f(z)
        i_m = float(np.dot(base, increasing_solution(self.theta, self.idx, z)))
        u, v = wfmodel._gauss_jacobi_interval(0.0, s, 0.0, 0.0, self.nodes)
        g0 = hyperfun.hyp2f1_array(th2 - b, th2 - a, 2 - th1, u)
        sing = float(np.dot(v * np.exp((th2 - 1) * np.log1p(-u) - self.logB) * self._f(u), g0))
        out = (i_m, self.alpha_h * i_m + self.beta_h * sing)
        self._cache[key] = out
        return out

    def right(self, s: float):
        """(int_s^1 Fm f m, int_s^1 Fp f m) for s inside the layer at 1."""
        key = ("R", s)
        if key in self._cache:
            return self._cache[key]
        if s >= 1.0:
            return (0.0, 0.0)
        th1, th2 = self.theta.theta1, self.theta.theta2
        a, b = self.idx.a, self.idx.b
        z, w = wfmodel._gauss_jacobi_interval(s, 1.0, 0.0, th2 - 1.0, self.nodes)
        base = w * np.exp((th1 - 1) * np.log(z) - self.logB) * self._f(z)
        i_p = float(np.dot(base, decreasing_solution(self.theta, self.idx, z)))
        u, v = wfmodel._gauss_jacobi_interval(s, 1.0, 0.0, 0.0, self.nodes)
        g1 = hyperfun.hyp2f1_array(th1 - a, th1 - b, 2 - th2, 1.0 - u)
        sing = float(np.dot(v * np.exp((th1 - 1) * np.log(u) - self.logB) * self._f(u), g1))
        out = (self.gamma * i_p + self.delta * sing, i_p)
        self._cache[key] = out
        return out

    def _inner_left(self, u: float, v: float):
        """Like ``left`` but over [u, v] with 0 < u, so f may jump at u.

        The factor x^(theta1-1) is absorbed by the substitution t = x^theta1.
        """
        th1, th2 = self.theta.theta1, self.theta.theta2
        a, b = self.idx.a, self.idx.b
        t, wt = wfmodel._gauss_jacobi_interval(u**th1, v**th1, 0.0, 0.0, self.nodes)
        z = t ** (1.0 / th1)
        base = wt / th1 * np.exp((th2 - 1) * np.log1p(-z) - self.logB) * self._f(z)
        i_m = float(np.dot(base, increasing_solution(self.theta, self.idx, z)))
        y, wy = wfmodel._gauss_jacobi_interval(u, v, 0.0, 0.0, self.nodes)
        g0 = hyperfun.hyp2f1_array(th2 - b, th2 - a, 2 - th1, y)
        sing = float(np.dot(wy * np.exp((th2 - 1) * np.log1p(-y) - self.logB) * self._f(y), g0))
        return (i_m, self.alpha_h * i_m + self.beta_h * sing)

    def _inner_right(self, u: float, v: float):
        """Mirror image of ``_inner_left`` for [u, v] inside the layer at 1, v < 1."""
        th1, th2 = self.theta.theta1, self.theta.theta2
        a, b = self.idx.a, self.idx.b
        t, wt = wfmodel._gauss_jacobi_interval((1 - v) ** th2, (1 - u) ** th2, 0.0, 0.0, self.nodes)
        z = 1.0 - t ** (1.0 / th2)
        base = wt / th2 * np.exp((th1 - 1) * np.log(z) - self.logB) * self._f(z)
        i_p = float(np.dot(base, decreasing_solution(self.theta, self.idx, z)))
        y, wy = wfmodel._gauss_jacobi_interval(u, v, 0.0, 0.0, self.nodes)
        g1 = hyperfun.hyp2f1_array(th1 - a, th1 - b, 2 - th2, 1.0 - y)
        sing = float(np.dot(wy * np.exp((th1 - 1) * np.log(y) - self.logB) * self._f(y), g1))
        return (self.gamma * i_p + self.delta * sing, i_p)

    def middle(self, u: float, v: float):
        th1, th2 = self.theta.theta1, self.theta.theta2
        z, w = wfmodel._gauss_jacobi_interval(u, v, 0.0, 0.0, self.panel_nodes)
        base = w * np.exp((th1 - 1) * np.log(z) + (th2 - 1) * np.log1p(-z) - self.logB) * self._f(z)
        return (
            float(np.dot(base, increasing_solution(self.theta, self.idx, z))),
            float(np.dot(base, decreasing_solution(self.theta, self.idx, z))),
        )

    def piece(self, u: float, v: float):
        s0 = self.layer
        if u == 0.0:
            return self.left(v)
        if v == 1.0:
            return self.right(u)
        if v <= s0:
            return self._inner_left(u, v)
        if u >= 1.0 - s0:
            return self._inner_right(u, v)
        return self.middle(u, v)

    def grid(self):
        s0 = self.layer
        pts = {0.0, s0, 0.5, 1.0 - s0, 1.0}
        p = s0
        while p < 0.25:
            p *= 2.0
            pts.update((p, 1.0 - p))
        return pts

    def split(self, x: float, breaks=()):
        """Return ((Lm, Lp), (Um, Up)): integrals over [0, x] and [x, 1]."""
        pts = self.grid() | {float(x)} | {float(p) for p in breaks if 0.0 < p < 1.0}
        pts = sorted(pts)
        lower = [0.0, 0.0]
        upper = [0.0, 0.0]
        for u, v in zip(pts[:-1], pts[1:]):
            im, ip = self.piece(u, v)
            acc = lower if v <= x else upper
            acc[0] += im
            acc[1] += ip
        return tuple(lower), tuple(upper)


def killing_coefficients(theta: ThetaParams, idx):
    """(1/Fp(0), 1/Fm(1)) from the Gauss summation formula."""
    a, b = idx.a, idx.b
    th1, th2 = theta.theta1, theta.theta2
    coef0 = gamma_ratio([th2 - a, th2 - b], [th2, 1 - th1]).real
    coef1 = gamma_ratio([th1 - a, th1 - b], [th1, 1 - th2]).real
    return coef0, coef1


def eigen_integrals(theta: ThetaParams, lam: float, f, nodes: int = 128):
    """(int_0^1 f Fm m, int_0^1 f Fp m) for the increasing solution Fm and
    the decreasing solution Fp, with the endpoint singularities split off."""
    basis = _Basis(theta, spectral_index(theta, lam), f, nodes)
    (l_m, l_p), (u_m, u_p) = basis.split(0.5)
    return l_m + u_m, l_p + u_p


def _wronskian_resolvent(theta, lam, f, x, kind, order, nodes, breaks):
    idx = spectral_index(theta, lam)
    basis = _Basis(theta, idx, f, nodes)
    (l_m, l_p), (u_m, u_p) = basis.split(x, breaks)
    t_m, t_p = l_m + u_m, l_p + u_p
    C = green_constant(theta, idx)
    fm_x = float(increasing_solution(theta, idx, x))
    fp_x = float(decreasing_solution(theta, idx, x))
    coef0, coef1 = killing_coefficients(theta, idx)
    plain = C * (fp_x * l_m + fm_x * u_p)
    if kind == "unkilled":
        return plain
    killed0 = plain - C * coef0 * fp_x * t_p
    killed1 = plain - C * coef1 * fm_x * t_m
    if kind == "killed0":
        return killed0
    if kind == "killed1":
        return killed1
    th1, th2 = theta.theta1, theta.theta2
    a, b = idx.a, idx.b
    if order == "0_then_1":
        # R0 f(x) - E_x[exp(-lambda H_1) under killing at 0] R0 f(1)
        hit_const = gamma_ratio([1 - a, 1 - b], [2 - th1, 1 - th2]).real
        r0_at_1 = C * (t_m - coef0 * t_p)
        return killed0 - hit_const * float(killed_increasing(theta, idx, x)) * r0_at_1
    if order == "1_then_0":
        hit_const = gamma_ratio([1 - a, 1 - b], [2 - th2, 1 - th1]).real
        r1_at_0 = C * (t_p - coef1 * t_m)
        return killed1 - hit_const * float(killed_decreasing(theta, idx, x)) * r1_at_0
    if order == "exit_decomposition":
        # R f - E[e^{-lambda H_1}; H_1 < H_0] R f(1) - E[e^{-lambda H_0}; H_0 < H_1] R f(0)
        rf_0 = C * t_p
        rf_1 = C * t_m
        return (
            plain
            - float(restricted_laplace(theta, lam, x, 1)) * rf_1
            - float(restricted_laplace(theta, lam, x, 0)) * rf_0
        )
    raise ValueError("order must be '0_then_1', '1_then_0' or 'exit_decomposition'")


def _binomial_resolvent(theta, lam, f, x, nodes):
    """Jacobi-series route; exact for polynomial f of degree < nodes."""
    y, w = wfmodel.beta_nodes(theta, 2 * nodes)
    n_max = nodes
    Ry = wfmodel.jacobi_R_table(theta, n_max, y)
    coef = Ry @ (w * np.asarray(f(y), dtype=float))
    n = np.arange(n_max + 1)
    Rx = wfmodel.jacobi_R_table(theta, n_max, np.array([x]))[:, 0]
    terms = 2.0 / (2 * lam + n * (n + theta.theta_total - 1)) * Rx * coef * np.exp(-wfmodel.log_pi_n(theta, n))
    return float(terms.sum())


def _coalescent_kernel_nodes(theta, x, y, levels):
    """S_n(x, y_i) for n = 0..levels and every node y_i; rows are n."""
    th1, th2, tt = theta.theta1, theta.theta2, theta.theta_total
    k = np.arange(levels + 1)
    lg = special.gammaln
    lg_k1 = lg(k + 1.0)
    r1, r2, rt = _log_rising(th1, k), _log_rising(th2, k), _log_rising(tt, k)
    with np.errstate(divide="ignore"):
        l_in = np.log(x * y)
        l_out = np.log((1 - x) * (1 - y))
    out = np.empty((levels + 1, len(y)))
    for n in range(levels + 1):
        kk = np.arange(n + 1)
        with np.errstate(invalid="ignore"):
            L = (
                (-lg_k1[kk] - r1[kk] - lg_k1[n - kk] - r2[n - kk])[:, None]
                + np.where(kk[:, None] > 0, kk[:, None] * l_in[None, :], 0.0)
                + np.where((n - kk)[:, None] > 0, (n - kk)[:, None] * l_out[None, :], 0.0)
            )
        out[n] = np.exp(special.logsumexp(L, axis=0) + lg_k1[n] + rt[n])
    return out


def _beta_resolvent(theta, lam, f, x, levels=512):
    """Coalescent route: sum_n w_n E[m_{K, n-K}(f)], K ~ Binomial(n, x).

    E_K[m_{K,n-K}(f)] = E[f(Y) S_n(x, Y)] with S_n a degree-n polynomial in
    Y, so a Gauss-Jacobi rule with levels/2 + 64 nodes is exact for
    polynomial f of low degree. The algebraic tail in n is removed by
    Richardson extrapolation with integer exponents.
    """
    y, w = wfmodel.beta_nodes(theta, levels // 2 + 64)
    fy = np.asarray(f(y), dtype=float) * np.ones_like(y)
    S = _coalescent_kernel_nodes(theta, x, y, levels)
    g = S @ (w * fy)
    n = np.arange(levels + 1)
    wts = np.exp(wfmodel.log_survival_product(theta, lam, n, J=levels + 1)) / (lam + wfmodel.eigenvalue(theta, n))
    partial = np.cumsum(wts * g)
    sizes = [levels // 16, levels // 8, levels // 4, levels // 2, levels]
    return float(_richardson([partial[s] for s in sizes], [1.0, 2.0, 3.0, 4.0]))


def resolvent(
    theta: ThetaParams,
    lam: float,
    f,
    x: float,
    kind: str = "unkilled",
    order: str = "0_then_1",
    rep: str = "wronskian",
    nodes: int = 128,
    breakpoints=(),
) -> ResolventEval:
    """Resolvent R_lambda f(x) of the diffusion, optionally killed at 0, 1 or both.

    ``f`` is a vectorised callable on [0, 1]. The default route integrates
    the Green kernel against Beta(theta1, theta2) by Gauss-Jacobi rules; for
    the unkilled resolvent ``rep`` may also be "binomial" (Jacobi series) or
    "beta" (coalescent mixture). ``breakpoints`` lists points where f is not
    smooth, so quadrature panels can be split there. ``order`` chooses which
    formula is used for the doubly killed resolvent.
    """
    if not lam > 0:
        raise DomainError("lambda must be positive")
    _check_point(x, "x")
    if kind not in RESOLVENT_KINDS:
        raise ValueError(f"kind must be one of {RESOLVENT_KINDS}")
    if rep != "wronskian":
        if kind != "unkilled":
            raise ValueError("series representations are only implemented for the unkilled resolvent")
        if rep == "binomial":
            return ResolventEval(_binomial_resolvent(theta, lam, f, x, nodes), kind, 2 * nodes, rep)
        if rep == "beta":
            return ResolventEval(_beta_resolvent(theta, lam, f, x), kind, 320, rep)
        raise ValueError("rep must be 'wronskian', 'binomial' or 'beta'")
    value = _wronskian_resolvent(theta, lam, f, x, kind, order, nodes, tuple(breakpoints))
    return ResolventEval(float(value), kind, nodes, rep)


def killed_ratio_limits(theta: ThetaParams, lam: float, f, nodes: int = 128):
    """Limits of R^{0,1} f(x)/P_x(H_1 < H_0) as x -> 0 and of R^{0,1} f(x)/P_x(H_0 < H_1) as x -> 1.

    Both are assembled from the unkilled resolvent at the endpoints.
    """
    idx = spectral_index(theta, lam)
    a, b = idx.a, idx.b
    th1, th2, tt = theta.theta1, theta.theta2, theta.theta_total
    rf0 = resolvent(theta, lam, f, 0.0, nodes=nodes).value
    rf1 = resolvent(theta, lam, f, 1.0, nodes=nodes).value
    lead = gamma_ratio([1 - a, 1 - b], [2 - tt]).real
    at0 = lead * (gamma_ratio([th1, 1 - th2], [th1 - a, th1 - b]).real * rf0 - rf1)
    at1 = lead * (gamma_ratio([th2, 1 - th1], [th2 - a, th2 - b]).real * rf1 - rf0)
    return at0, at1


def killed_ratio_at(theta: ThetaParams, lam: float, f, x: float, nodes: int = 128):
    """R^{0,1} f(x)/P_x(H_1 < H_0) at x and R^{0,1} f(1-x)/P_{1-x}(H_0 < H_1)."""
    near0 = resolvent(theta, lam, f, x, kind="killed01", nodes=nodes).value / exit_prob(theta, x)
    near1 = resolvent(theta, lam, f, 1 - x, kind="killed01", nodes=nodes).value / (1 - exit_prob(theta, 1 - x))
    return near0, near1
