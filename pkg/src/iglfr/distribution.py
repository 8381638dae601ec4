"""Analytic functions of the inverse generalized linear failure rate law.

``X ~ IGLFR(alpha, beta, theta)`` has survival function

    S(x) = [1 - exp(-z(x))] ** theta,    z(x) = alpha / x + beta / (2 x**2),

for ``x > 0``.  All functions accept scalars or arrays for ``x`` and return
numpy scalars or arrays of the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize
from scipy.special import binom

from .errors import DomainError, NumericalError

LN2 = math.log(2.0)


@dataclass(frozen=True)
class Params:
    """Parameter triple of the IGLFR law.

    ``alpha`` has units of x, ``beta`` units of x**2 and ``theta`` is a
    dimensionless shape.  Either of ``alpha`` or ``beta`` may be zero (the
    generalized inverted exponential and inverse Rayleigh sub-families), but
    not both.
    """

    alpha: float
    beta: float
    theta: float

    def __post_init__(self):
        a, b, t = float(self.alpha), float(self.beta), float(self.theta)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "theta", t)
        if not all(map(math.isfinite, (a, b, t))):
            raise DomainError(f"parameters must be finite, got {self}")
        if t <= 0:
            raise DomainError(f"theta must be > 0, got {t}")
        if a < 0 or b < 0:
            raise DomainError(f"alpha and beta must be >= 0, got alpha={a}, beta={b}")
        if a + b <= 0:
            raise DomainError("alpha and beta cannot both be zero")

    @classmethod
    def from_sequence(cls, values) -> "Params":
        a, b, t = (float(v) for v in values)
        return cls(a, b, t)

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.theta])

    def replace(self, **changes) -> "Params":
        d = {"alpha": self.alpha, "beta": self.beta, "theta": self.theta}
        d.update(changes)
        return Params(**d)

    def __iter__(self):
        return iter((self.alpha, self.beta, self.theta))


def _support(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)) or np.any(x <= 0):
        raise DomainError("x must be > 0")
    return x


def _out(arr):
    return arr[()] if isinstance(arr, np.ndarray) else arr


def inner_exponent(p: Params, x) -> np.ndarray:
    """z(x) = alpha/x + beta/(2 x^2); strictly decreasing in x."""
    x = _support(x)
    return p.alpha / x + p.beta / (2.0 * x * x)


def log1mexp(z) -> np.ndarray:
    """log(1 - exp(-z)) for z >= 0, accurate at both ends."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < LN2
    with np.errstate(divide="ignore"):
        out[small] = np.log(-np.expm1(-z[small]))
        out[~small] = np.log1p(-np.exp(-z[~small]))
    return out


def _log_inner(p: Params, x: np.ndarray) -> np.ndarray:
    # log z computed without forming z; survives x -> inf.
    with np.errstate(divide="ignore"):
        return np.log(2.0 * p.alpha * x + p.beta) - LN2 - 2.0 * np.log(x)


def log_gamma_term(p: Params, x) -> np.ndarray:
    """log(1 - exp(-z(x))), the log of the baseline survival factor."""
    x = _support(x)
    with np.errstate(over="ignore", divide="ignore"):
        z = p.alpha / x + p.beta / (2.0 * x * x)
    out = log1mexp(z)
    tiny = z < 1e-8
    if np.any(tiny):
        out[tiny] = _log_inner(p, x[tiny]) - 0.5 * z[tiny]
    return out


def log_survival(p: Params, x) -> np.ndarray:
    return p.theta * log_gamma_term(p, x)


def survival(p: Params, x):
    """P(X > x) = [1 - exp(-z)]^theta."""
    return _out(np.exp(log_survival(p, x)))


def cdf(p: Params, x):
    """P(X <= x) = 1 - [1 - exp(-z)]^theta."""
    return _out(-np.expm1(log_survival(p, x)))


def log_cdf(p: Params, x):
    ls = log_survival(p, x)
    with np.errstate(divide="ignore"):
        return _out(log1mexp(-ls))


def log_pdf(p: Params, x):
    """Log density; ``-inf`` where the density underflows to zero."""
    x = _support(x)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        z = p.alpha / x + p.beta / (2.0 * x * x)
        log_a = np.log(p.alpha * x + p.beta) - 3.0 * np.log(x)
        lg = log_gamma_term(p, x)
        out = math.log(p.theta) + log_a - z + (p.theta - 1.0) * lg
    out = np.where(np.isnan(out), -np.inf, out)
    return _out(out)


def pdf(p: Params, x):
    return _out(np.exp(log_pdf(p, x)))


def hazard(p: Params, x):
    """pdf / survival = theta * (alpha/x^2 + beta/x^3) / (exp(z) - 1)."""
    x = _support(x)
    z = p.alpha / x + p.beta / (2.0 * x * x)
    a = p.alpha / x**2 + p.beta / x**3
    with np.errstate(over="ignore"):
        return _out(p.theta * a / np.expm1(z))


def reversed_hazard(p: Params, x):
    """pdf / cdf; raises where the cdf underflows to zero."""
    lc = np.asarray(log_cdf(p, x))
    if np.any(np.isneginf(lc)):
        raise DomainError("cdf underflows to 0; reversed hazard undefined")
    return _out(np.exp(np.asarray(log_pdf(p, x)) - lc))


def odd_function(p: Params, x):
    """cdf / survival = [1 - exp(-z)]^(-theta) - 1."""
    ls = log_survival(p, x)
    if np.any(-ls > 709.0):
        raise OverflowError("survival underflows; odds overflow")
    return _out(np.expm1(-ls))


def quantile(p: Params, q):
    """Inverse cdf by the closed-form root of the quadratic in 1/x."""
    q = np.asarray(q, dtype=float)
    if np.any(np.isnan(q)) or np.any((q <= 0) | (q >= 1)):
        raise DomainError("q must lie in the open interval (0, 1)")
    # L = log(1 - (1 - q)^(1/theta)) < 0
    s = np.log1p(-q) / p.theta
    L = log1mexp(-s)
    a, b = p.alpha, p.beta
    if b == 0.0:
        x = -a / L
    elif a == 0.0:
        x = np.sqrt(-b / (2.0 * L))
    else:
        x = (a + np.sqrt(a * a - 2.0 * b * L)) / (-2.0 * L)
    return _out(x)


def median(p: Params):
    return quantile(p, 0.5)


def skewness_bowley(p: Params) -> float:
    q1, q2, q3 = quantile(p, np.array([0.25, 0.5, 0.75]))
    return float(((q3 - q2) - (q2 - q1)) / ((q3 - q2) + (q2 - q1)))


def kurtosis_moors(p: Params) -> float:
    """Octile kurtosis ``[(E7-E5) + (E3-E1)] / (E6-E2)``."""
    e = quantile(p, np.arange(1, 8) / 8.0)
    e1, e2, e3, _, e5, e6, e7 = e
    return float(((e7 - e5) + (e3 - e1)) / (e6 - e2))


def moment_exists(p: Params, r: float) -> bool:
    """E[X^r] is finite iff r < theta (alpha > 0) or r < 2 theta (alpha = 0)."""
    bound = p.theta if p.alpha > 0 else 2.0 * p.theta
    return r < bound


def _moment_integrand_u(p: Params, r: float):
    # x^r f(x) dx with u = 1/x
    def g(u):
        if u <= 0.0:
            return 0.0
        x = 1.0 / u
        lf = float(log_pdf(p, x))
        if lf == -np.inf:
            return 0.0
        return math.exp(lf + (r + 2.0) * math.log(x))

    return g


def _quad_check(val, err, epsabs, epsrel, what):
    if not math.isfinite(val) or err > max(epsabs, epsrel * abs(val)) * 100:
        raise NumericalError(f"{what}: quadrature did not converge (estimate {val}, error {err})")


def _moment_quadrature(p: Params, r: float, lo_x: float = 0.0, hi_x: float = math.inf,
                       epsabs: float = 1e-10, epsrel: float = 1e-8) -> float:
    """Integral of x^r f(x) over (lo_x, hi_x) in the u = 1/x variable."""
    g = _moment_integrand_u(p, r)
    u_lo = 0.0 if hi_x == math.inf else 1.0 / hi_x
    u_hi = math.inf if lo_x == 0.0 else 1.0 / lo_x
    # split at the quartiles so both the body and the algebraic tail are resolved
    cuts = sorted(1.0 / float(quantile(p, q)) for q in (0.99, 0.5, 0.01))
    edges = [u_lo] + [c for c in cuts if u_lo < c < u_hi] + [u_hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, err = integrate.quad(g, a, b, epsabs=epsabs, epsrel=epsrel, limit=500)
        _quad_check(val, err, epsabs, epsrel, "moment")
        total += val
    return total


def moment(p: Params, r: float, method: str = "quadrature", terms: int = 200) -> float:
    """Raw moment E[X^r].

    Parameters
    ----------
    p : Params
    r : float
        Order, ``r > 0``.
    method : {"quadrature", "series"}
        ``quadrature`` integrates x^r f(x) directly.  ``series`` expands
        ``[1 - e^{-z}]^{theta-1}`` as a binomial series and integrates term by
        term on the region ``x <= x_c`` where the series converges uniformly;
        the remaining tail ``x > x_c`` is integrated directly.
    terms : int
        Maximum number of series terms.

    Returns
    -------
    float
        ``math.inf`` when the moment does not exist.
    """
    if not r > 0:
        raise DomainError(f"moment order must be > 0, got {r}")
    if not moment_exists(p, r):
        return math.inf
    if method == "quadrature":
        return _moment_quadrature(p, r)
    if method != "series":
        raise ValueError(f"unknown method {method!r}")

    # cutoff where exp(-(terms+1) z) is below double precision
    z_c = 37.0 / terms
    if p.beta == 0.0:
        x_c = p.alpha / z_c
    elif p.alpha == 0.0:
        x_c = math.sqrt(p.beta / (2.0 * z_c))
    else:
        x_c = (p.alpha + math.sqrt(p.alpha**2 + 2.0 * p.beta * z_c)) / (2.0 * z_c)

    def inner(i):
        c = i + 1.0

        def h(u):
            return (p.alpha * u ** (-r) + p.beta * u ** (1.0 - r)) * math.exp(
                -c * (p.alpha * u + 0.5 * p.beta * u * u))

        val, err = integrate.quad(h, 1.0 / x_c, math.inf, epsabs=1e-13, epsrel=1e-11, limit=500)
        return val

    total = 0.0
    for i in range(terms):
        coef = binom(p.theta - 1.0, i)
        if coef == 0.0:
            break
        term = (-1.0) ** i * coef * inner(i)
        total += term
        if i > 0 and abs(term) < 1e-14 * abs(total):
            break
    body = p.theta * total
    tail = _moment_quadrature(p, r, lo_x=x_c)
    return body + tail


def _dlogpdf_dx(p: Params, x: float) -> float:
    a = p.alpha / x**2 + p.beta / x**3
    da = -2.0 * p.alpha / x**3 - 3.0 * p.beta / x**4
    z = p.alpha / x + p.beta / (2.0 * x * x)
    if z > 700.0:
        return da / a + a
    return da / a + a - (p.theta - 1.0) * a / math.expm1(z)


def mode(p: Params) -> float:
    """Interior maximizer of the density.

    Brackets the sign change of d log f / dx starting from the
    [0.001, 0.999] quantile range and refines it with Brent's method.
    """
    lo, hi = float(quantile(p, 0.001)), float(quantile(p, 0.999))
    for _ in range(60):
        if _dlogpdf_dx(p, lo) > 0 > _dlogpdf_dx(p, hi):
            break
        lo, hi = lo / 4.0, hi * 4.0
    else:
        raise NumericalError("mode: no sign change of d log f/dx found")
    m = optimize.brentq(lambda t: _dlogpdf_dx(p, t), lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    eps = 1e-4 * m
    if not (pdf(p, m) >= pdf(p, m - eps) and pdf(p, m) >= pdf(p, m + eps)):
        raise NumericalError("mode: second-order condition failed")
    return m


def mode_equation(p: Params, x):
    """Bracketed factor of f'(x) in polynomial form; vanishes at the mode."""
    x = _support(x)
    a, b, t = p.alpha, p.beta, p.theta
    e = np.exp(-inner_exponent(p, x))
    first = (-2 * a * x**3 - 3 * b * x**2 + a**2 * x**2 + b**2 + 2 * a * b * x) / x**6
    second = e * (2 * a * x**3 + 3 * b * x**2 - t * (b**2 + 2 * a * b * x + a**2 * x**2)) / x**6
    return _out(first + second)


def sample(p: Params, n: int, seed=None) -> np.ndarray:
    """Draw ``n`` variates by inversion.

    ``seed`` may be an int, a ``numpy.random.SeedSequence`` or a
    ``numpy.random.Generator``.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    u = rng.random(n)
    u[u == 0.0] = np.nextafter(0.0, 1.0)
    return np.asarray(quantile(p, u), dtype=float).reshape(n)
