"""Wright-Fisher model primitives.

Generator ``(1/2) x(1-x) d^2/dx^2 + (1/2)(theta1 - |theta| x) d/dx`` on [0, 1]
with both mutation parameters in (0, 1), so that both endpoints are regular.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import hyperfun

SINGULAR_EPS = 1e-9


class DomainError(ValueError):
    """Raised when model parameters or arguments are outside their domain."""


class ToleranceUnreachable(ArithmeticError):
    """Raised when a truncation cannot meet the requested tolerance."""


@dataclass(frozen=True)
class ThetaParams:
    theta1: float
    theta2: float
    theta_total: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "theta_total", self.theta1 + self.theta2)

    def swapped(self) -> "ThetaParams":
        return ThetaParams(self.theta2, self.theta1)


def make_theta(theta1: float, theta2: float) -> ThetaParams:
    """Validated mutation parameters; both must lie strictly inside (0, 1)."""
    theta1, theta2 = float(theta1), float(theta2)
    for name, v in (("theta1", theta1), ("theta2", theta2)):
        if not (0.0 < v < 1.0) or math.isnan(v):
            raise DomainError(f"{name} = {v} must lie in (0, 1)")
    return ThetaParams(theta1, theta2)


@dataclass(frozen=True)
class SpectralIndex:
    lam: float
    a: complex
    b: complex
    discriminant: float
    shifted: bool = False

    @property
    def is_complex(self) -> bool:
        return self.discriminant < 0


def singular_lambda(theta: ThetaParams) -> float:
    return (theta.theta_total - 1.0) ** 2 / 8.0


def spectral_index(theta: ThetaParams, lam: float) -> SpectralIndex:
    """Roots a >= b of z^2 - (|theta|-1) z + 2 lambda = 0.

    These are the upper 2F1 parameters of the eigenfunctions of the
    generator with eigenvalue lambda. At the single lambda where a = b the
    value is nudged by a relative 1e-9 and ``shifted`` is set.
    """
    if lam < 0:
        raise DomainError("lambda must be non-negative")
    lam = float(lam)
    alpha = theta.theta_total - 1.0
    shifted = False
    if lam > 0 and lam == singular_lambda(theta):
        lam += SINGULAR_EPS * max(1.0, lam)
        shifted = True
    disc = alpha * alpha - 8.0 * lam
    if disc >= 0:
        root = math.sqrt(disc)
        a, b = complex(0.5 * (alpha + root)), complex(0.5 * (alpha - root))
    else:
        root = math.sqrt(-disc)
        a, b = complex(0.5 * alpha, 0.5 * root), complex(0.5 * alpha, -0.5 * root)
    return SpectralIndex(lam, a, b, disc, shifted)


def _check_open(x):
    x = np.asarray(x, dtype=float)
    if np.any((x <= 0.0) | (x >= 1.0)):
        raise DomainError("x must lie in (0, 1)")
    return x


def _check_closed(x):
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x > 1.0)):
        raise DomainError("x must lie in [0, 1]")
    return x


def speed_density(theta: ThetaParams, x):
    """Speed density m(x), the Beta(theta1, theta2) density."""
    x = _check_open(x)
    return np.exp(
        (theta.theta1 - 1) * np.log(x)
        + (theta.theta2 - 1) * np.log1p(-x)
        - special.betaln(theta.theta1, theta.theta2)
    )


def scale_deriv(theta: ThetaParams, x):
    """Derivative of the scale function, 2 B(theta1, theta2) x^-theta1 (1-x)^-theta2."""
    x = _check_open(x)
    return 2.0 * special.beta(theta.theta1, theta.theta2) * x ** (-theta.theta1) * (1 - x) ** (-theta.theta2)


def scale(theta: ThetaParams, x):
    """Scale function s(x) = 2 B(theta1, theta2) B(1-theta1, 1-theta2; x), s(0) = 0."""
    x = _check_closed(x)
    p, q = 1 - theta.theta1, 1 - theta.theta2
    return 2.0 * special.beta(theta.theta1, theta.theta2) * special.beta(p, q) * special.betainc(p, q, x)


def eigenvalue(theta: ThetaParams, n):
    """lambda_n = n (n + |theta| - 1) / 2."""
    n = np.asarray(n, dtype=float)
    return 0.5 * n * (n + theta.theta_total - 1.0)


def jacobi_R(theta: ThetaParams, n: int, x):
    """R_n(x) = 2F1(-n, n+|theta|-1; theta2; 1-x) by its finite polynomial sum.

    Exact but prone to cancellation for large n; the series code uses the
    three-term recurrence in ``jacobi_R_table`` instead.
    """
    if n < 0:
        raise DomainError("n must be non-negative")
    x = _check_closed(x)
    u = 1.0 - x
    bpar = n + theta.theta_total - 1.0
    term = np.ones_like(u)
    total = term.copy()
    for k in range(n):
        term = term * ((-n + k) * (bpar + k) / ((theta.theta2 + k) * (k + 1.0))) * u
        total = total + term
    return total


def jacobi_R_table(theta: ThetaParams, nmax: int, x) -> np.ndarray:
    """R_0..R_nmax at every x via the Jacobi three-term recurrence.

    Returns an array of shape (nmax + 1,) + x.shape.
    """
    x = _check_closed(x)
    th1, th2, tt = theta.theta1, theta.theta2, theta.theta_total
    # R_n = n!/(theta2)_n P_n^(alpha, beta)(2x - 1), alpha = theta2 - 1, beta = theta1 - 1
    alpha, beta = th2 - 1.0, th1 - 1.0
    z = 2.0 * x - 1.0
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax == 0:
        return out
    out[1] = 1.0 - tt * (1.0 - x) / th2
    for n in range(2, nmax + 1):
        s = 2 * n + alpha + beta
        A = 2.0 * n * (n + alpha + beta) * (s - 2.0)
        B = (s - 1.0) * s * (s - 2.0)
        C = (s - 1.0) * (alpha * alpha - beta * beta)
        D = 2.0 * (n + alpha - 1.0) * (n + beta - 1.0) * s
        r1 = n / (th2 + n - 1.0)
        r2 = r1 * (n - 1.0) / (th2 + n - 2.0)
        out[n] = ((B * z + C) * r1 * out[n - 1] - D * r2 * out[n - 2]) / A
    return out


def log_pi_n(theta: ThetaParams, n):
    """log of pi_n = E[R_n(Y)^2], Y ~ Beta(theta1, theta2)."""
    n = np.asarray(n, dtype=float)
    th1, th2, tt = theta.theta1, theta.theta2, theta.theta_total
    gl = special.gammaln
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (
            gl(n + 1)
            + gl(th1 + n) - gl(th1)
            - np.log(tt + 2 * n - 1)
            - (gl(tt + n - 1) - gl(tt))
            - (gl(th2 + n) - gl(th2))
        )
    return np.where(n == 0, 0.0, val)


def pi_n(theta: ThetaParams, n):
    """n! (theta1)_n / [(|theta| + 2n - 1) (|theta|)_{n-1} (theta2)_n], pi_0 = 1."""
    return np.exp(log_pi_n(theta, n))


def _roots_jacobi(nodes, alpha, beta):
    # scipy evaluates a masked-out 0/0 branch when alpha + beta = -1
    with np.errstate(invalid="ignore", divide="ignore"):
        return special.roots_jacobi(nodes, alpha, beta)


@functools.lru_cache(maxsize=64)
def _jacobi_nodes(theta1: float, theta2: float, nodes: int):
    z, w = _roots_jacobi(nodes, theta2 - 1.0, theta1 - 1.0)
    x = 0.5 * (1.0 + z)
    w = w / w.sum()
    return x, w


def beta_nodes(theta: ThetaParams, nodes: int = 128):
    """Gauss-Jacobi nodes and weights for expectations under Beta(theta1, theta2)."""
    x, w = _jacobi_nodes(theta.theta1, theta.theta2, int(nodes))
    return x.copy(), w.copy()


def beta_expectation(theta: ThetaParams, f, nodes: int = 128) -> float:
    """E[f(Y)] for Y ~ Beta(theta1, theta2) by Gauss-Jacobi quadrature."""
    x, w = beta_nodes(theta, nodes)
    return float(np.dot(w, np.asarray(f(x), dtype=float)))


@functools.lru_cache(maxsize=256)
def _gauss_jacobi_interval(lo: float, hi: float, left_exp: float, right_exp: float, nodes: int):
    z, w = _roots_jacobi(nodes, right_exp, left_exp)
    half = 0.5 * (hi - lo)
    x = lo + half * (1.0 + z)
    # weight (x-lo)^left (hi-x)^right dx
    w = w * half ** (1.0 + left_exp + right_exp)
    return x, w


def speed_integral_split(theta: ThetaParams, g, split: float, nodes: int = 128) -> float:
    """Integral of g(y) m(y) dy over (0, 1), with a break point at ``split``.

    Each side is a Gauss-Jacobi rule carrying the endpoint singularity of m
    at its outer end, so kernels with a kink at ``split`` stay accurate.
    """
    th1, th2 = theta.theta1, theta.theta2
    logB = special.betaln(th1, th2)
    total = 0.0
    if split > 0.0:
        x, w = _gauss_jacobi_interval(0.0, float(split), th1 - 1.0, 0.0, int(nodes))
        total += np.dot(w, np.exp((th2 - 1) * np.log1p(-x) - logB) * g(x))
    if split < 1.0:
        x, w = _gauss_jacobi_interval(float(split), 1.0, 0.0, th2 - 1.0, int(nodes))
        total += np.dot(w, np.exp((th1 - 1) * np.log(x) - logB) * g(x))
    return float(total)


# ---------------------------------------------------------------------------
# Death process entering from infinity


@dataclass(frozen=True)
class DeathProcessDist:
    t: float
    probabilities: np.ndarray
    truncation_level: int
    tail_bound: float


def _log_abs_coef(n: int, m: int, alpha: float) -> float:
    """log |a_nm| for the coefficient of exp(-lambda_m t) in q_n(t)."""
    if n == 0 and m == 0:
        return 0.0
    lg = math.lgamma
    return (
        math.log(2 * m + alpha)
        + lg(n + m + alpha)
        - lg(n + 1)
        - lg(m - n + 1)
        - lg(n + 1 + alpha)
    )


def _death_marginal(n: int, t: float, alpha: float, abs_tol: float) -> float:
    """q_n(t) as an alternating sum of exponentials, in extended precision."""
    import mpmath

    def log_term(m):
        return _log_abs_coef(n, m, alpha) - 0.5 * m * (m + alpha) * t

    # locate the peak magnitude to size the working precision
    m = n
    peak = log_term(m)
    while True:
        nxt = log_term(m + 1)
        if nxt < peak and m > n + 2:
            break
        peak = max(peak, nxt)
        m += 1
    stop = math.log(abs_tol) - 10.0
    dps = int(25 + max(0.0, peak) / math.log(10))
    with mpmath.workdps(dps):
        if n == 0:
            total = mpmath.mpf(1)
            term = mpmath.mpf(1)
            mm = 0
            # a_01 / a_00 = -(2 + alpha), handled apart because of the 0/0 at alpha = 0
            term = -(2 + mpmath.mpf(alpha)) * mpmath.exp(-mpmath.mpf(t) * (1 + alpha) / 2)
            mm = 1
            total += term
        else:
            mm = n
            term = mpmath.exp(
                mpmath.log(2 * n + alpha)
                + mpmath.loggamma(2 * n + alpha)
                - mpmath.loggamma(n + 1)
                - mpmath.loggamma(n + 1 + alpha)
                - mpmath.mpf(t) * n * (n + alpha) / 2
            )
            total = term
        while True:
            ratio = (
                -(2 * mm + 2 + mpmath.mpf(alpha)) / (2 * mm + alpha)
                * (n + mm + alpha) / (mm + 1 - n)
                * mpmath.exp(-mpmath.mpf(t) * (2 * mm + 1 + alpha) / 2)
            )
            term *= ratio
            mm += 1
            total += term
            if mm > n + 2 and log_term(mm) < stop and log_term(mm) < peak:
                break
        return float(total)


@functools.lru_cache(maxsize=128)
def _death_process_cached(theta_total: float, t: float, tol: float, cap: int):
    alpha = theta_total - 1.0
    probs = []
    cum = 0.0
    mode_passed = False
    n = 0
    while True:
        if n > cap:
            raise ToleranceUnreachable(
                f"death process at t={t} needs more than {cap} levels for tol={tol}"
            )
        q = max(_death_marginal(n, t, alpha, tol * 1e-3), 0.0)
        probs.append(q)
        cum += q
        if n > 0 and q < probs[-2]:
            mode_passed = True
        if mode_passed and q < tol * 1e-3 and 1.0 - cum < tol:
            break
        n += 1
    p = np.array(probs)
    return p, n, max(0.0, 1.0 - float(p.sum()))


def death_process(theta: ThetaParams, t: float, tol: float = 1e-10, cap: int = 500) -> DeathProcessDist:
    """Law of the number of surviving lineages at time t.

    The chain has death rates lambda_n = n(n + |theta| - 1)/2 and enters from
    infinity. Each q_n(t) is the residue expansion of its Laplace transform
    prod_{j>n} lambda_j/(lambda + lambda_j) / (lambda + lambda_n), summed in
    extended precision because the terms alternate and cancel heavily.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    p, level, tail = _death_process_cached(float(theta.theta_total), float(t), float(tol), int(cap))
    return DeathProcessDist(float(t), p.copy(), level, tail)


def death_process_laplace(theta: ThetaParams, lam: float, n: int, J: int = 400) -> float:
    """Laplace transform of q_n: prod_{j>n} lambda_j/(lambda+lambda_j) / (lambda + lambda_n).

    The infinite product is summed exactly up to J and the remaining log tail
    by Euler-Maclaurin.
    """
    return float(np.exp(log_survival_product(theta, lam, n, J)) / (lam + eigenvalue(theta, n)))


def _product_tail(theta: ThetaParams, lam: float, J: int) -> float:
    """sum_{j>J} log1p(lambda/lambda_j) by Euler-Maclaurin."""
    alpha = theta.theta_total - 1.0
    idx = spectral_index(theta, lam)
    a, b = idx.a, idx.b
    u = float(J)

    def xlog1p(c):
        return (u + c) * cmath.log(1 + c / u)

    integral = -(xlog1p(a) + xlog1p(b) - xlog1p(complex(alpha))).real
    f = math.log1p(2 * lam / (u * (u + alpha)))
    fp = (2 * u + alpha) * (1.0 / (u * u + alpha * u + 2 * lam) - 1.0 / (u * u + alpha * u))
    return integral - 0.5 * f - fp / 12.0


def log_survival_product(theta: ThetaParams, lam: float, n, J: int = 400):
    """log prod_{j>n} lambda_j/(lambda + lambda_j) for each n (array or scalar).

    Requires n < J; the part beyond J comes from ``_product_tail``.
    """
    n_arr = np.atleast_1d(np.asarray(n, dtype=int))
    J = max(int(J), int(n_arr.max()) + 1, 200)
    j = np.arange(1, J + 1, dtype=float)
    terms = np.log1p(lam / eigenvalue(theta, j))
    # suffix sums: S[k] = sum_{j=k+1}^{J} terms
    suffix = np.concatenate([np.cumsum(terms[::-1])[::-1], [0.0]])
    out = -(suffix[n_arr] + _product_tail(theta, lam, J))
    return out if np.ndim(n) else float(out[0])


# ---------------------------------------------------------------------------
# Transition density


@dataclass(frozen=True)
class DensityEval:
    value: float
    terms_used: int
    representation: str
    tail_bound: float
    clamped: float = 0.0


SPECTRAL_MIN_T = 0.02


def _spectral_terms(theta: ThetaParams, t: float, tol: float, nmax: int = 2000) -> int:
    """Number of spectral terms so that the crude bound on the rest is < tol."""
    th1, th2 = theta.theta1, theta.theta2
    for n in range(1, nmax):
        # |R_n| <= (n+1) max(1, (theta1)_n/(theta2)_n) is a generous bound on [0, 1]
        log_r = math.log(n + 1) + max(0.0, math.lgamma(th1 + n) - math.lgamma(th1) - math.lgamma(th2 + n) + math.lgamma(th2))
        log_bound = 2 * log_r - float(log_pi_n(theta, n)) - float(eigenvalue(theta, n)) * t
        decay = math.exp(-t * (2 * n + theta.theta_total) / 2)
        if n > 2 and log_bound - math.log1p(-decay) < math.log(tol):
            return n
    raise ToleranceUnreachable(f"spectral series needs more than {nmax} terms at t={t}")


def _inner_coalescent(theta: ThetaParams, n_max: int, x: float, y: float) -> np.ndarray:
    """sum_k Bin(n, x)(k) Beta(theta1+k, theta2+n-k)(y) for n = 0..n_max."""
    th1, th2 = theta.theta1, theta.theta2
    out = np.empty(n_max + 1)
    gl = special.gammaln
    with np.errstate(divide="ignore", invalid="ignore"):
        lx, l1x = np.log(x), np.log1p(-x)
        ly, l1y = np.log(y), np.log1p(-y)
    for n in range(n_max + 1):
        k = np.arange(n + 1)
        with np.errstate(invalid="ignore"):
            lbin = gl(n + 1) - gl(k + 1) - gl(n - k + 1) + np.where(k > 0, k * lx, 0.0) + np.where(n - k > 0, (n - k) * l1x, 0.0)
        lbeta = (th1 + k - 1) * ly + (th2 + n - k - 1) * l1y - special.betaln(th1 + k, th2 + n - k)
        out[n] = np.exp(special.logsumexp(lbin + lbeta))
    return out


def transition_density(
    theta: ThetaParams,
    t: float,
    x: float,
    y: float,
    rep: str = "auto",
    tol: float = 1e-10,
    wrt: str = "lebesgue",
) -> DensityEval:
    """Transition density p(t, x, y) in the spectral or coalescent representation.

    ``wrt="speed"`` returns p_m = p / m(y) instead. ``rep="auto"`` picks the
    spectral series unless t < SPECTRAL_MIN_T.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    _check_closed(x)
    _check_open(y)
    if rep == "auto":
        rep = "spectral" if t >= SPECTRAL_MIN_T else "coalescent"
    my = float(speed_density(theta, y))
    if rep == "spectral":
        n = _spectral_terms(theta, t, tol)
        table = jacobi_R_table(theta, n, np.array([x, y]))
        k = np.arange(n + 1)
        terms = np.exp(-eigenvalue(theta, k) * t - log_pi_n(theta, k)) * table[:, 0] * table[:, 1]
        pm = float(terms.sum())
        clamped = 0.0
        if pm < 0:
            clamped, pm = -pm, 0.0
        value = pm if wrt == "speed" else pm * my
        return DensityEval(value, n + 1, "spectral", tol, clamped)
    if rep == "coalescent":
        dist = death_process(theta, t, tol)
        q = dist.probabilities
        inner = _inner_coalescent(theta, len(q) - 1, x, y)
        p = float(np.dot(q, inner))
        value = p / my if wrt == "speed" else p
        return DensityEval(value, len(q), "coalescent", dist.tail_bound)
    raise ValueError(f"unknown representation {rep!r}")


def transition_cdf(theta: ThetaParams, t: float, x: float, y, tol: float = 1e-10, nodes: int = 64) -> np.ndarray:
    """P_x(X_t <= y) from the spectral series, integrating m R_n by Gauss-Jacobi.

    Each m(z) R_n(z) is integrated over [0, y] (or [y, 1] for y > 1/2) with
    the endpoint weight exact, so the polynomial part is integrated exactly.
    """
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    n = _spectral_terms(theta, t, tol)
    k = np.arange(n + 1)
    coef = np.exp(-eigenvalue(theta, k) * t - log_pi_n(theta, k)) * jacobi_R_table(theta, n, np.array([x]))[:, 0]
    nodes = max(nodes, n // 2 + 8)
    th1, th2 = theta.theta1, theta.theta2
    logB = special.betaln(th1, th2)
    out = np.empty_like(ys)
    for i, yv in enumerate(ys):
        if yv <= 0.0:
            out[i] = 0.0
            continue
        if yv >= 1.0:
            out[i] = 1.0
            continue
        if yv <= 0.5:
            z, w = _gauss_jacobi_interval(0.0, float(yv), th1 - 1.0, 0.0, nodes)
            wz = w * np.exp((th2 - 1) * np.log1p(-z) - logB)
            moments = jacobi_R_table(theta, n, z) @ wz
            out[i] = float(coef @ moments)
        else:
            z, w = _gauss_jacobi_interval(float(yv), 1.0, 0.0, th2 - 1.0, nodes)
            wz = w * np.exp((th1 - 1) * np.log(z) - logB)
            moments = jacobi_R_table(theta, n, z) @ wz
            out[i] = 1.0 - float(coef @ moments)
    return np.clip(out, 0.0, 1.0)


def _draw_lineages(dist: DeathProcessDist, rng: np.random.Generator, size) -> np.ndarray:
    cdf = np.cumsum(dist.probabilities)
    cdf /= cdf[-1]
    return np.searchsorted(cdf, rng.random(size), side="right")


def exact_transition_sample(theta: ThetaParams, t: float, x, rng: np.random.Generator, size=None, tol: float = 1e-10):
    """Draw X_t given X_0 = x from the coalescent mixture.

    n ~ q(t), k ~ Binomial(n, x), y ~ Beta(theta1 + k, theta2 + n - k).
    ``x`` may be an array, in which case one draw is made per entry.
    """
    dist = death_process(theta, t, tol)
    x_arr = np.asarray(x, dtype=float)
    shape = x_arr.shape if size is None else size
    n = _draw_lineages(dist, rng, shape)
    k = rng.binomial(n, np.broadcast_to(x_arr, shape))
    y = rng.beta(theta.theta1 + k, theta.theta2 + n - k)
    # beta draws can round to the endpoints for tiny shape parameters
    y = np.clip(y, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
    return float(y) if np.ndim(y) == 0 else y
