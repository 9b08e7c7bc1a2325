"""Complex Gamma function and the Gauss hypergeometric function 2F1.

Parameters ``a`` and ``b`` may be complex (in practice a conjugate pair),
while ``c`` and the argument ``x`` are real with ``x`` in [0, 1].
"""

from __future__ import annotations

import cmath
import contextlib
import contextvars
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-12
DEFAULT_MAX_TERMS = 10_000
_CANCELLATION_LIMIT = 1e3

# Lanczos approximation with Godfrey's coefficients, g = 607/128.
_LANCZOS_G = 607.0 / 128.0
_LANCZOS_COEF = (
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_PI = math.log(math.pi)

# Fault-injection hook: relative perturbation applied to every Gamma value.
_gamma_perturbation: contextvars.ContextVar[float] = contextvars.ContextVar(
    "gamma_perturbation", default=0.0
)


class ParameterError(ValueError):
    """Raised for arguments outside the domain of a special function."""


class ConvergenceError(ArithmeticError):
    """Raised when a series fails to reach the requested tolerance."""


@dataclass(frozen=True)
class HypParams:
    a: complex
    b: complex
    c: float
    x: float


@dataclass(frozen=True)
class Hyp2F1Result:
    value: float
    imag_residual: float
    terms_used: int
    transformed: bool


@contextlib.contextmanager
def perturbed_gamma(relative: float):
    """Multiply every Gamma value by ``1 + relative`` inside the block.

    Only meant for fault-injection tests of the verification harness.
    """
    token = _gamma_perturbation.set(relative)
    try:
        yield
    finally:
        _gamma_perturbation.reset(token)


def _is_nonpositive_integer(z: complex, atol: float = 0.0) -> bool:
    z = complex(z)
    if z.imag != 0.0 or z.real > 0.5:
        return False
    return abs(z.real - round(z.real)) <= atol


def _log_sin_pi(z: complex) -> complex:
    # log(sin(pi z)) up to a multiple of 2 pi i, safe for large |Im z|.
    if abs(z.imag) < 15.0:
        return cmath.log(cmath.sin(math.pi * z))
    if z.imag > 0:
        w = cmath.exp(2j * math.pi * z)
        return -1j * math.pi * z + cmath.log(w - 1.0) - cmath.log(2j)
    return _log_sin_pi(z.conjugate()).conjugate()


def loggamma_c(z: complex) -> complex:
    """Logarithm of the complex Gamma function (branch is irrelevant under exp)."""
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise ParameterError(f"Gamma has a pole at {z}")
    if z.real < 0.5:
        return _LOG_PI - _log_sin_pi(z) - loggamma_c(1.0 - z)
    z -= 1.0
    acc = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    out = _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(acc)
    eps = _gamma_perturbation.get()
    if eps:
        out += math.log1p(eps)
    return out


def gamma_c(z: complex) -> complex:
    """Complex Gamma function via Lanczos with reflection for Re z < 1/2."""
    return cmath.exp(loggamma_c(z))


def rgamma_c(z: complex) -> complex:
    """Reciprocal Gamma, equal to zero at the poles."""
    if _is_nonpositive_integer(z):
        return 0j
    return cmath.exp(-loggamma_c(z))


def gamma_ratio(num, den) -> complex:
    """prod Gamma(num) / prod Gamma(den), evaluated in log space.

    A pole in the denominator makes the ratio zero; a pole in the numerator
    raises ``ParameterError``.
    """
    if any(_is_nonpositive_integer(z) for z in den):
        return 0j
    log_val = sum(loggamma_c(z) for z in num) - sum(loggamma_c(z) for z in den)
    return cmath.exp(log_val)


def rising_factorial(a: complex, n: int) -> complex:
    """Pochhammer symbol (a)_n = a (a+1) ... (a+n-1)."""
    if n < 0:
        raise ParameterError("n must be non-negative")
    out = 1.0 + 0j if isinstance(a, complex) else 1.0
    for k in range(n):
        out *= a + k
    return out


def _polynomial_degree(a: complex, b: complex):
    degs = [int(round(-complex(p).real)) for p in (a, b) if _is_nonpositive_integer(p)]
    return min(degs) if degs else None


def _series(a, b, c, x, tol, max_terms, degree=None):
    """Direct Gauss series, vectorised over ``x``; returns (sum, terms)."""
    x = np.asarray(x, dtype=float)
    term = np.ones(x.shape, dtype=complex)
    total = term.copy()
    if degree is not None:
        for n in range(degree):
            term = term * ((a + n) * (b + n) / ((c + n) * (n + 1.0))) * x
            total += term
        return total, degree + 1
    xmax = float(np.max(x)) if x.size else 0.0
    if xmax == 0.0:
        return total, 1
    for n in range(max_terms):
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1.0))) * x
        total += term
        nxt = abs((a + n + 1) * (b + n + 1) / ((c + n + 1) * (n + 2.0)))
        rho = xmax * max(nxt, 1.0)
        if rho < 1.0:
            tail = np.abs(term) * rho / (1.0 - rho)
            if np.all(tail <= tol * np.abs(total)):
                return total, n + 2
    raise ConvergenceError(
        f"2F1({a}, {b}; {c}; x<={xmax}) did not converge in {max_terms} terms"
    )


_MAX_DIRECT_TERMS = 1_000_000


def _hyp2f1_complex(a, b, c, x, tol=DEFAULT_TOL, max_terms=DEFAULT_MAX_TERMS):
    """Complex-valued 2F1 on an array of x in [0, 1]; returns (values, terms, transformed)."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x > 1.0)):
        raise ParameterError("x must lie in [0, 1]")
    degree = _polynomial_degree(a, b)
    if degree is None and _is_nonpositive_integer(c):
        raise ParameterError(f"c = {c} is a non-positive integer")
    if degree is not None:
        if _is_nonpositive_integer(c) and -round(float(complex(c).real)) < degree:
            raise ParameterError(f"c = {c} is a forbidden non-positive integer")
        vals, terms = _series(a, b, c, x, tol, max_terms, degree=degree)
        return vals, terms, False

    s = complex(c - a - b)
    out = np.empty(x.shape, dtype=complex)
    terms = 0
    low = x <= 0.5
    if np.any(low):
        out[low], terms = _series(a, b, c, x[low], tol, max_terms)
    high = ~low
    if not np.any(high):
        return out, terms, False

    degenerate = abs(s.imag) < 1e-12 and abs(s.real - round(s.real)) < 1e-8
    if degenerate:
        # integer c - a - b: no connection formula, sum directly if convergent
        if s.real <= 0 and np.any(x[high] == 1.0):
            raise ParameterError("2F1 diverges at x = 1 when Re(c-a-b) <= 0")
        if np.any(x[high] == 1.0):
            rest = x[high] < 1.0
            vals = np.empty(int(np.sum(high)), dtype=complex)
            vals[~rest] = gamma_ratio([c, s], [c - a, c - b])
            if np.any(rest):
                vals[rest], t2 = _series(a, b, c, x[high][rest], tol, max_terms)
                terms = max(terms, t2)
            out[high] = vals
        else:
            out[high], t2 = _series(a, b, c, x[high], tol, max_terms)
            terms = max(terms, t2)
        return out, terms, False

    y = 1.0 - x[high]
    if s.real <= 0 and np.any(y == 0.0):
        raise ParameterError("2F1 diverges at x = 1 when Re(c-a-b) <= 0")
    coef_h = gamma_ratio([c, s], [c - a, c - b])
    coef_k = gamma_ratio([c, -s], [a, b])
    # sub-series get a tighter tolerance since the two terms may partly cancel
    inner_tol = max(tol * 1e-4, 1e-17)
    vals = np.zeros(y.shape, dtype=complex)
    scale = np.zeros(y.shape)
    t_h = t_k = 0
    if coef_h != 0:
        h, t_h = _hyp2f1_complex(a, b, 1.0 - s, y, inner_tol, max_terms)[:2]
        vals += coef_h * h
        scale += np.abs(coef_h * h)
    if coef_k != 0:
        k, t_k = _hyp2f1_complex(c - a, c - b, 1.0 + s, y, inner_tol, max_terms)[:2]
        with np.errstate(divide="ignore", invalid="ignore"):
            power = np.where(y > 0.0, np.power(y.astype(complex), s), 0.0)
        vals += coef_k * power * k
        scale += np.abs(coef_k * power * k)
    # The two connection terms can cancel badly (large |a|, |b|); the direct
    # series is then the better route as long as x < 1.
    with np.errstate(divide="ignore", invalid="ignore"):
        cancel = scale > _CANCELLATION_LIMIT * np.abs(vals)
    redo = cancel & (y > 0.0)
    transformed = not np.all(redo)
    if np.any(redo):
        # close to 1 the direct series needs about -log(tol)/(1-x) terms
        budget = min(_MAX_DIRECT_TERMS, max(max_terms, int(-2.0 * math.log(tol) / float(np.min(y[redo])))))
        direct, t_d = _series(a, b, c, 1.0 - y[redo], tol, budget)
        vals[redo] = direct
        terms = max(terms, t_d)
    out[high] = vals
    return out, max(terms, t_h + t_k), transformed


def hyp2f1(a, b, c, x, tol: float = DEFAULT_TOL, max_terms: int = DEFAULT_MAX_TERMS) -> Hyp2F1Result:
    """Gauss hypergeometric function 2F1(a, b; c; x) for real x in [0, 1].

    Sums the series directly for x <= 1/2 and otherwise maps to argument
    1 - x with the connection formula (``transformed`` is then True).
    The real part is returned; the imaginary part is kept as a diagnostic.

    Args:
        a, b: Upper parameters, real or a complex-conjugate pair.
        c: Lower parameter, not a non-positive integer.
        x: Argument in [0, 1].
        tol: Relative truncation tolerance of the series.
        max_terms: Maximum number of series terms.

    Returns:
        Hyp2F1Result with value, imaginary residual, terms used and whether
        a connection formula was applied.
    """
    if isinstance(a, HypParams):
        a, b, c, x = a.a, a.b, a.c, a.x
    vals, terms, transformed = _hyp2f1_complex(a, b, c, np.array([float(x)]), tol, max_terms)
    v = complex(vals[0])
    return Hyp2F1Result(v.real, abs(v.imag), int(terms), bool(transformed))


def hyp2f1_array(a, b, c, x, tol: float = DEFAULT_TOL, max_terms: int = DEFAULT_MAX_TERMS) -> np.ndarray:
    """Vectorised real part of 2F1 over an array of arguments."""
    x = np.asarray(x, dtype=float)
    vals, _, _ = _hyp2f1_complex(a, b, c, x.ravel(), tol, max_terms)
    return vals.real.reshape(x.shape)


def hyp2f1_deriv(a, b, c, x, tol: float = DEFAULT_TOL) -> float:
    """d/dx 2F1(a, b; c; x) = (ab/c) 2F1(a+1, b+1; c+1; x)."""
    if isinstance(a, HypParams):
        a, b, c, x = a.a, a.b, a.c, a.x
    vals, _, _ = _hyp2f1_complex(a + 1, b + 1, c + 1, np.array([float(x)]), tol)
    return (a * b / c * complex(vals[0])).real


def limit_ratio_at_one(a, b, c) -> float:
    """lim_{z -> 1-} (1-z)^(a+b-c) 2F1(a, b; c; z) for Re(c-a-b) < 0."""
    if complex(c - a - b).real >= 0:
        raise ParameterError("requires Re(c - a - b) < 0")
    return gamma_ratio([c, a + b - c], [a, b]).real


def _check_nondegenerate(a, b, c):
    for name, v in (("c", c), ("c-a-b", c - a - b), ("a-b", a - b)):
        v = complex(v)
        if abs(v.imag) < 1e-14 and abs(v.real - round(v.real)) < 1e-10:
            raise ParameterError(f"{name} = {v} is an integer; solutions are degenerate")


def ode_solutions(a, b, c, x, tol: float = DEFAULT_TOL):
    """The four hypergeometric ODE solutions (f, g, h, kappa) at x.

    f and g are the solutions around 0, h and kappa those around 1.
    """
    _check_nondegenerate(a, b, c)
    xs = np.array([float(x)])
    ys = 1.0 - xs
    f = _hyp2f1_complex(a, b, c, xs, tol)[0][0]
    g = x ** (1 - c) * _hyp2f1_complex(a - c + 1, b - c + 1, 2 - c, xs, tol)[0][0] if x > 0 else (
        0.0 if c < 1 else math.inf
    )
    h = _hyp2f1_complex(a, b, a + b + 1 - c, ys, tol)[0][0]
    s = complex(c - a - b)
    if x < 1:
        kappa = (1 - x) ** s * _hyp2f1_complex(c - a, c - b, s + 1, ys, tol)[0][0]
    else:
        kappa = 0.0 if s.real > 0 else math.inf
    return tuple(complex(v).real for v in (f, g, h, kappa))


def connection_coefficients(a, b, c):
    """Coefficients (alpha_h, beta_h, alpha_k, beta_k) with h = alpha_h f + beta_h g
    and kappa = alpha_k f + beta_k g."""
    alpha_h = gamma_ratio([1 - c, a + b - c + 1], [a - c + 1, b - c + 1]).real
    beta_h = gamma_ratio([c - 1, a + b - c + 1], [a, b]).real
    alpha_k = gamma_ratio([1 - c, c - a - b + 1], [1 - a, 1 - b]).real
    beta_k = gamma_ratio([c - 1, c - a - b + 1], [c - a, c - b]).real
    return alpha_h, beta_h, alpha_k, beta_k


def connection_determinant(a, b, c) -> float:
    """alpha_h beta_k - beta_h alpha_k, which equals W(h, kappa)/W(f, g) = (a+b-c)/(1-c).

    The entries grow like exp(pi |Im a|) for complex a, b, so the product
    form cancels badly; this closed form does not.
    """
    return complex((a + b - c) / (1 - c)).real


def wronskians(a, b, c, x):
    """Closed-form Wronskians W(f,g), W(f,h), W(f,kappa), W(g,h) at x in (0, 1).

    W(f1, f2) = f1 f2' - f1' f2. Since h = alpha_h f + beta_h g, bilinearity
    gives W(f,h) = beta_h W(f,g) and W(g,h) = -alpha_h W(f,g).
    """
    _check_nondegenerate(a, b, c)
    if not 0.0 < x < 1.0:
        raise ParameterError("x must lie in (0, 1)")
    w_fg = ((1 - c) * x ** (-c) * (1 - x) ** complex(c - a - b - 1)).real
    alpha_h, beta_h, alpha_k, beta_k = connection_coefficients(a, b, c)
    return w_fg, beta_h * w_fg, beta_k * w_fg, -alpha_h * w_fg
