"""Maximum likelihood and maximum product spacings estimation.

Both estimators maximize over ``u = log(params)`` with a safeguarded
(modified) Newton iteration from several starts.  A strict local maximum
inside the parameter space (a root of the estimating equations) is preferred.
When no start reaches one, the objective keeps improving as ``alpha`` or
``beta`` shrinks toward zero; the nested two-parameter model on that boundary
is then fitted and kept if it satisfies the one-sided first-order condition.
The pinned coordinate is reported in ``FitResult.fixed`` and carries zero
variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import distribution as dist
from .distribution import Params
from .errors import DataError, DomainError, SingularInformationError

NAMES = ("alpha", "beta", "theta")


class ObservedSample:
    """Validated vector of positive observations."""

    def __init__(self, values):
        v = np.asarray(values, dtype=float).ravel()
        if v.size == 0:
            raise DataError("sample is empty")
        bad = np.flatnonzero(~np.isfinite(v) | (v <= 0))
        if bad.size:
            raise DataError(f"observations must be positive and finite; offending positions {bad.tolist()[:10]}")
        self.values = v
        self.values.setflags(write=False)
        self.sorted_view = np.sort(v)
        self.sorted_view.setflags(write=False)

    def __len__(self):
        return self.values.size

    def __repr__(self):
        return f"ObservedSample(n={len(self)})"

    def __eq__(self, other):
        return isinstance(other, ObservedSample) and np.array_equal(self.values, other.values)


def as_sample(s) -> ObservedSample:
    return s if isinstance(s, ObservedSample) else ObservedSample(s)


@dataclass(frozen=True)
class ConfidenceInterval:
    parameter: str
    lower: float
    upper: float
    level: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower > upper")

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


@dataclass
class FitConfig:
    gtol: float = 1e-8
    xtol: float = 1e-10
    max_iter: int = 500
    boundary_tol: float = 1e-6


@dataclass
class FitResult:
    params: Params
    objective: float
    method: str
    converged: bool
    iterations: int
    gradient_norm: float
    observed_info: np.ndarray
    covariance: np.ndarray
    std_errors: np.ndarray
    n: int
    fixed: tuple = ()
    message: str = ""
    extra: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# log-likelihood and derivatives

def _pieces(p, x):
    a, b, t = p
    z = a / x + b / (2.0 * x * x)
    with np.errstate(over="ignore", divide="ignore"):
        w = 1.0 / np.expm1(z)          # e^{-z} / (1 - e^{-z})
    return z, w


def log_likelihood(p: Params, s) -> float:
    """Sum of log densities; ``-inf`` if any observation has zero density."""
    x = as_sample(s).sorted_view
    return float(np.sum(dist.log_pdf(p, x)))


def score(p: Params, s) -> np.ndarray:
    """Gradient of the log-likelihood in (alpha, beta, theta)."""
    x = as_sample(s).sorted_view
    a, b, t = p
    n = x.size
    _, w = _pieces(p, x)
    inv = 1.0 / (a * x + b)
    lg = dist.log_gamma_term(p, x)
    return np.array([
        np.sum(x * inv) - np.sum(1.0 / x) + (t - 1.0) * np.sum(w / x),
        np.sum(inv) - np.sum(0.5 / x**2) + (t - 1.0) * np.sum(0.5 * w / x**2),
        n / t + np.sum(lg),
    ])


def hessian(p: Params, s) -> np.ndarray:
    """Analytic Hessian of the log-likelihood."""
    x = as_sample(s).sorted_view
    a, b, t = p
    n = x.size
    _, w = _pieces(p, x)
    inv2 = 1.0 / (a * x + b) ** 2
    ww = w * (1.0 + w)                 # e^{-z} / (1 - e^{-z})^2
    h = np.empty((3, 3))
    h[0, 0] = -np.sum(x * x * inv2) - (t - 1.0) * np.sum(ww / x**2)
    h[0, 1] = -np.sum(x * inv2) - (t - 1.0) * np.sum(ww / (2.0 * x**3))
    h[1, 1] = -np.sum(inv2) - (t - 1.0) * np.sum(ww / (4.0 * x**4))
    h[0, 2] = np.sum(w / x)
    h[1, 2] = np.sum(w / (2.0 * x * x))
    h[2, 2] = -n / t**2
    h[1, 0], h[2, 0], h[2, 1] = h[0, 1], h[0, 2], h[1, 2]
    return h


def observed_information(p: Params, s) -> np.ndarray:
    """Negative Hessian of the log-likelihood."""
    return -hessian(p, s)


# --------------------------------------------------------------------------
# product spacings

def _dlog_survival(p, x):
    """Gradient of theta*log(gamma(x)) in (alpha, beta, theta), shape (3, n)."""
    a, b, t = p
    _, w = _pieces(p, x)
    return np.vstack([t * w / x, t * w / (2.0 * x * x), dist.log_gamma_term(p, x)])


def _obs_score(p, x):
    a, b, t = p
    _, w = _pieces(p, x)
    inv = 1.0 / (a * x + b)
    return np.vstack([
        x * inv - 1.0 / x + (t - 1.0) * w / x,
        inv - 0.5 / x**2 + (t - 1.0) * 0.5 * w / x**2,
        np.full_like(x, 1.0 / t) + dist.log_gamma_term(p, x),
    ])


def log_spacings(p: Params, s) -> np.ndarray:
    """log D_1..log D_{n+1}; a tied pair's zero spacing is replaced by log f."""
    x = as_sample(s).sorted_view
    ls = dist.log_survival(p, x)            # decreasing in x
    out = np.empty(x.size + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[0] = np.log(-np.expm1(ls[0]))
        gap = ls[:-1] - ls[1:]
        out[1:-1] = ls[:-1] + dist.log1mexp(np.maximum(gap, 0.0))
        out[-1] = ls[-1]
    ties = np.flatnonzero(x[1:] == x[:-1])
    if ties.size:
        out[1 + ties] = np.asarray(dist.log_pdf(p, x[1 + ties]))
    return np.where(np.isnan(out), -np.inf, out)


def mps_objective(p: Params, s) -> float:
    """g* = mean of log spacings over the n+1 gaps."""
    ld = log_spacings(p, s)
    return float(np.mean(ld))


def mps_gradient(p: Params, s) -> np.ndarray:
    x = as_sample(s).sorted_view
    n = x.size
    ls = dist.log_survival(p, x)
    dls = _dlog_survival(p, x)
    g = np.zeros(3)
    # first gap: log(1 - S_1)
    g += -dls[:, 0] / np.expm1(-ls[0])
    # middle gaps: log(S_{i-1} - S_i)
    if n > 1:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            r = np.exp(ls[1:] - ls[:-1])
            mid = (dls[:, :-1] - r * dls[:, 1:]) / (-np.expm1(ls[1:] - ls[:-1]))
        tie = x[1:] == x[:-1]
        if np.any(tie):
            mid[:, tie] = _obs_score(p, x[1:][tie])
        g += mid.sum(axis=1)
    # last gap: log S_n
    g += dls[:, -1]
    return g / (n + 1)


def _numeric_hessian(grad, p, rel=1e-5):
    p = np.asarray(p, dtype=float)
    h = np.zeros((3, 3))
    for j in range(3):
        step = rel * max(abs(p[j]), 1e-8)
        lo, hi = p.copy(), p.copy()
        lo[j] = max(p[j] - step, 0.0)
        hi[j] = p[j] + step
        h[:, j] = (grad(hi) - grad(lo)) / (hi[j] - lo[j])
    return 0.5 * (h + h.T)


# --------------------------------------------------------------------------
# optimizer

def _safe_params(v):
    try:
        return Params(*v)
    except DomainError:
        return None


class _Objective:
    """Objective, gradient and Hessian in raw coordinates for one method."""

    def __init__(self, method, sample):
        self.method = method
        self.sample = sample

    def value(self, v):
        p = _safe_params(v)
        if p is None:
            return -math.inf
        with np.errstate(all="ignore"):
            f = log_likelihood(p, self.sample) if self.method == "MLE" else mps_objective(p, self.sample)
        return f if math.isfinite(f) else -math.inf

    def grad(self, v):
        p = Params(*v)
        with np.errstate(all="ignore"):
            return score(p, self.sample) if self.method == "MLE" else mps_gradient(p, self.sample)

    def hess(self, v):
        if self.method == "MLE":
            with np.errstate(all="ignore"):
                return hessian(Params(*v), self.sample)
        return _numeric_hessian(self.grad, v)


def _newton(obj, v0, free, cfg: FitConfig):
    """Maximize obj over log of the free coordinates of v0; fixed ones stay put."""
    free = np.asarray(free, dtype=bool)
    v = np.asarray(v0, dtype=float).copy()
    u = np.log(v[free])

    def raw(uu):
        out = v.copy()
        out[free] = np.exp(uu)
        return out

    f = obj.value(raw(u))
    if not math.isfinite(f):
        return raw(u), f, False, 0, math.inf
    it, gnorm = 0, math.inf
    for it in range(1, cfg.max_iter + 1):
        vv = raw(u)
        g_raw = obj.grad(vv)
        gu = (vv * g_raw)[free]
        gnorm = float(np.linalg.norm(gu))
        if not np.all(np.isfinite(gu)):
            break
        if gnorm < cfg.gtol:
            return vv, f, True, it, gnorm
        h_raw = obj.hess(vv)
        hu = (np.outer(vv, vv) * h_raw + np.diag(vv * g_raw))[np.ix_(free, free)]
        # ascent direction from the negated Hessian with eigenvalues forced positive
        try:
            lam, vec = np.linalg.eigh(-hu)
        except np.linalg.LinAlgError:
            lam, vec = np.ones(free.sum()), np.eye(free.sum())
        if not np.all(np.isfinite(lam)):
            lam, vec = np.ones(free.sum()), np.eye(free.sum())
        floor = 1e-10 * max(1.0, float(np.max(np.abs(lam))))
        lam = np.maximum(np.abs(lam), floor)
        step = vec @ ((vec.T @ gu) / lam)
        norm = float(np.linalg.norm(step))
        if norm > 3.0:
            step *= 3.0 / norm
        t = 1.0
        improved = False
        flat = float(gu @ step) < 1e-10 * (1.0 + abs(f))
        for _ in range(0 if flat else 60):
            u_new = u + t * step
            f_new = obj.value(raw(u_new))
            if math.isfinite(f_new) and f_new >= f + 1e-4 * t * float(gu @ step):
                improved = True
                break
            t *= 0.5
        if not improved:
            # f is flat to rounding here; judge the full step by the gradient
            u_full = u + step
            f_full = obj.value(raw(u_full))
            if math.isfinite(f_full) and f_full >= f - 1e-12 * (1.0 + abs(f)):
                v_full = raw(u_full)
                g_full = float(np.linalg.norm((v_full * obj.grad(v_full))[free]))
                if g_full < 0.5 * gnorm:
                    u, f = u_full, f_full
                    continue
            break
        u, f = u_new, f_new
        if float(np.max(np.abs(step))) < cfg.xtol:
            vv = raw(u)
            gnorm = float(np.linalg.norm((vv * obj.grad(vv))[free]))
            break
    vv = raw(u)
    return vv, f, gnorm < cfg.gtol, it, gnorm


def initial_guess(s) -> Params:
    """Quartile-matching start with theta = 1.

    With theta = 1 the cdf is exp(-z), so z(x_q) = -log q at the empirical
    quartiles gives two linear equations in (alpha, beta).
    """
    x = as_sample(s).sorted_view
    q1, q3 = np.quantile(x, [0.25, 0.75])
    if q3 > q1:
        m = np.array([[1.0 / q1, 0.5 / q1**2], [1.0 / q3, 0.5 / q3**2]])
        rhs = -np.log([0.25, 0.75])
        try:
            a, b = np.linalg.solve(m, rhs)
            if a > 0 and b > 0:
                return Params(a, b, 1.0)
        except np.linalg.LinAlgError:
            pass
    med = float(np.median(x))
    return Params(med * math.log(2.0), med * med, 1.0)


def _starts(s, init):
    if init is not None:
        return [Params(*init)]
    p0 = initial_guess(s)
    out = [p0]
    # theta far from one is common; re-seed alpha, beta for a few theta values
    x = as_sample(s).sorted_view
    med = float(np.median(x))
    for t in (0.3, 5.0, 30.0):
        # pick alpha so that the median of the GIE(alpha, t) law matches
        L = math.log(-math.expm1(math.log(0.5) / t))
        out.append(Params(-med * L, 1e-3 * med * med * (-L), t))
    return out


def _finalize(obj, method, s, v, f, conv, it, gnorm, fixed, message=""):
    p = Params(*v)
    if method == "MLE":
        info = observed_information(p, s)
    else:
        # sum of log spacings plays the role of the log-likelihood
        with np.errstate(all="ignore"):
            info = -(len(s) + 1) * obj.hess(v)
    free = [i for i, name in enumerate(NAMES) if name not in fixed]
    cov = np.zeros((3, 3))
    sub = info[np.ix_(free, free)]
    sym = 0.5 * (sub + sub.T)
    fit = FitResult(params=p, objective=f, method=method, converged=conv, iterations=it,
                    gradient_norm=gnorm, observed_info=info, covariance=cov,
                    std_errors=np.zeros(3), n=len(s), fixed=tuple(fixed), message=message)
    try:
        lam = np.linalg.eigvalsh(sym)
        if not np.all(np.isfinite(lam)) or lam.min() <= 0:
            raise np.linalg.LinAlgError
        cov[np.ix_(free, free)] = np.linalg.inv(sym)
    except np.linalg.LinAlgError:
        fit.covariance = np.full((3, 3), np.nan)
        fit.std_errors = np.full(3, np.nan)
        raise SingularInformationError("observed information is not positive definite", fit=fit)
    cov = 0.5 * (cov + cov.T)
    fit.covariance = cov
    fit.std_errors = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return fit


def _is_interior_root(obj, v) -> bool:
    """True if v is a strict local maximum of obj strictly inside the orthant.

    Iterates that drift toward alpha = 0 or beta = 0 also end with a small
    log-scale gradient; they are told apart by the raw-coordinate Newton step,
    which for them is large relative to the vanishing coordinate.
    """
    with np.errstate(all="ignore"):
        g = obj.grad(v)
        h = obj.hess(v)
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(h))):
        return False
    h = 0.5 * (h + h.T)
    try:
        if np.linalg.eigvalsh(h).max() >= 0:
            return False
        step = np.linalg.solve(h, -g)
    except np.linalg.LinAlgError:
        return False
    return bool(np.all(np.abs(step) <= 0.1 * v))


def _fit(method, s, init, config):
    s = as_sample(s)
    if len(s) < 4:
        raise DataError("at least 4 observations are needed to fit three parameters")
    cfg = config or FitConfig()
    obj = _Objective(method, s)
    best, best_root = None, None
    for p0 in _starts(s, init):
        cand = _newton(obj, p0.as_array(), [True, True, True], cfg)
        v, f, conv = cand[:3]
        if best is None or (math.isfinite(f) and (f > best[1] or (conv and not best[2] and f >= best[1] - 1e-9))):
            best = cand
        if conv and _is_interior_root(obj, v) and (best_root is None or f > best_root[1]):
            best_root = cand
    fixed = ()
    if best_root is not None:
        # a root of the estimating equations inside the parameter space
        v, f, conv, it, g = best_root
        return _finalize(obj, method, s, v, f, conv, it, g, fixed, "converged")
    v, f, conv, it, g = best
    # no interior root: the supremum is approached on alpha = 0 or beta = 0
    for j, name in ((1, "beta"), (0, "alpha")):
        start = v.copy()
        start[j] = 0.0
        if _safe_params(start) is None:
            continue
        free = [k != j for k in range(3)]
        vb, fb, cb, itb, gb = _newton(obj, start, free, cfg)
        if not math.isfinite(fb):
            continue
        kkt = obj.grad(vb)[j] <= 0.0
        tol = cfg.boundary_tol * (1.0 if method == "MLE" else 1.0 / (len(s) + 1))
        if kkt and fb >= f - tol:
            v, f, conv, it, g, fixed = vb, fb, cb, it + itb, gb, (name,)
            break
    message = "converged" if conv else "gradient tolerance not reached"
    return _finalize(obj, method, s, v, f, conv, it, g, fixed, message)


def fit_mle(s, init=None, config: FitConfig | None = None) -> FitResult:
    """Maximum likelihood fit.

    Raises
    ------
    SingularInformationError
        If the observed information at the optimum is not positive
        definite; the fit is attached to the exception.
    """
    return _fit("MLE", s, init, config)


def fit_mps(s, init=None, config: FitConfig | None = None) -> FitResult:
    """Maximum product spacings fit.

    ``observed_info`` is the negative Hessian of the summed log spacings
    (n + 1) g* at the estimate, the analogue of the likelihood information.
    """
    return _fit("MPS", s, init, config)


def asymptotic_cis(fit: FitResult, level: float = 0.95) -> tuple:
    """Wald intervals estimate +/- z * se; lower bounds are not truncated."""
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    if not fit.converged:
        raise ValueError("fit did not converge")
    z = stats.norm.ppf(0.5 + level / 2.0)
    est = fit.params.as_array()
    return tuple(
        ConfidenceInterval(name, float(est[i] - z * fit.std_errors[i]), float(est[i] + z * fit.std_errors[i]), level)
        for i, name in enumerate(NAMES)
    )
