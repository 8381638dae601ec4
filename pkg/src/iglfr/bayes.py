"""Bayesian estimation under independent gamma priors.

The sampler is a component-wise random-walk Metropolis-Hastings chain that
updates alpha, beta and theta in turn, each conditional using the most
recently accepted values of the other two.  Several chains on separate
samples can be advanced together (``run_mcmc_batch``); every chain draws its
proposals and uniforms from its own generator, so results do not depend on
how chains are grouped.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import distribution as dist
from .distribution import Params
from .errors import DomainError
from .frequentist import NAMES, ConfidenceInterval, FitResult


@dataclass(frozen=True)
class PriorSpec:
    """Gamma(shape, scale) priors: alpha ~ G(a, b), beta ~ G(c, d), theta ~ G(p, q)."""

    a: float
    b: float
    c: float
    d: float
    p: float
    q: float

    def __post_init__(self):
        vals = self.as_array()
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise DomainError(f"all prior hyperparameters must be positive, got {tuple(vals)}")

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d, self.p, self.q], dtype=float)

    @property
    def shapes(self) -> np.ndarray:
        return np.array([self.a, self.c, self.p])

    @property
    def scales(self) -> np.ndarray:
        return np.array([self.b, self.d, self.q])

    def mean(self) -> np.ndarray:
        return self.shapes * self.scales

    def variance(self) -> np.ndarray:
        return self.shapes * self.scales**2

    @classmethod
    def from_mean_shape(cls, mean, shape) -> "PriorSpec":
        """Priors with the given means and a common (or per-parameter) shape."""
        m = np.asarray(mean, dtype=float)
        k = np.broadcast_to(np.asarray(shape, dtype=float), (3,))
        sc = m / k
        return cls(*(float(v) for v in (k[0], sc[0], k[1], sc[1], k[2], sc[2])))


@dataclass(frozen=True)
class McmcConfig:
    """Chain length, burn-in, seed and random-walk scales.

    ``burn_in=None`` means 20% of ``iterations``.  A zero proposal scale
    freezes that coordinate at its initial value.
    """

    iterations: int = 50_000
    burn_in: int | None = None
    seed: int = 0
    proposal_sds: tuple = (1.0, 1.0, 1.0)
    adapt: bool = False

    def __post_init__(self):
        if int(self.iterations) < 1:
            raise DomainError("iterations must be positive")
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", int(0.2 * self.iterations))
        if not 0 <= self.burn_in < self.iterations:
            raise DomainError("need 0 <= burn_in < iterations")
        sds = tuple(float(v) for v in self.proposal_sds)
        if len(sds) != 3 or not all(math.isfinite(v) and v >= 0 for v in sds):
            raise DomainError("proposal_sds must be three nonnegative finite numbers")
        object.__setattr__(self, "proposal_sds", sds)

    def replace(self, **kw) -> "McmcConfig":
        d = dict(iterations=self.iterations, burn_in=self.burn_in, seed=self.seed,
                 proposal_sds=self.proposal_sds, adapt=self.adapt)
        if "iterations" in kw and "burn_in" not in kw:
            d["burn_in"] = None
        d.update(kw)
        return McmcConfig(**d)


@dataclass
class PosteriorChain:
    """Draws after each of the K sweeps (the initial point is not stored)."""

    draws: np.ndarray
    accepted: np.ndarray
    config: McmcConfig
    prior: PriorSpec
    init: Params
    final_sds: tuple = ()
    extra: dict = field(default_factory=dict)

    @property
    def acceptance_rates(self) -> np.ndarray:
        return self.accepted.mean(axis=0)

    @property
    def kept(self) -> np.ndarray:
        return self.draws[self.config.burn_in:]


# --------------------------------------------------------------------------
# conditionals

def _data(s) -> np.ndarray:
    if s is None:
        return np.empty(0)
    if hasattr(s, "sorted_view"):
        return np.asarray(s.sorted_view)
    x = np.asarray(s, dtype=float).ravel()
    if np.any(~np.isfinite(x) | (x <= 0)):
        raise DomainError("observations must be positive and finite")
    return np.sort(x)


def _terms(alpha, beta, x):
    # sum log(alpha/x^2 + beta/x^3) and sum log(1 - exp(-z))
    A = alpha / x**2 + beta / x**3
    z = alpha / x + beta / (2.0 * x * x)
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(A))), float(np.sum(dist.log1mexp(z)))


def log_conditional_alpha(alpha, beta, theta, s, prior: PriorSpec) -> float:
    """log pi_1(alpha | beta, theta, x) up to an additive constant."""
    if not alpha > 0:
        return -math.inf
    x = _data(s)
    sa, sg = _terms(alpha, beta, x)
    return ((prior.a - 1.0) * math.log(alpha) - alpha / prior.b
            + sa - alpha * float(np.sum(1.0 / x)) + (theta - 1.0) * sg)


def log_conditional_beta(alpha, beta, theta, s, prior: PriorSpec) -> float:
    """log pi_2(beta | alpha, theta, x) up to an additive constant."""
    if not beta > 0:
        return -math.inf
    x = _data(s)
    sa, sg = _terms(alpha, beta, x)
    return ((prior.c - 1.0) * math.log(beta) - beta / prior.d
            + sa - beta * float(np.sum(0.5 / x**2)) + (theta - 1.0) * sg)


def log_conditional_theta(alpha, beta, theta, s, prior: PriorSpec) -> float:
    """log pi_3(theta | alpha, beta, x) up to an additive constant."""
    if not theta > 0:
        return -math.inf
    x = _data(s)
    _, sg = _terms(alpha, beta, x) if x.size else (0.0, 0.0)
    return (prior.p - 1.0 + x.size) * math.log(theta) - theta / prior.q + (theta - 1.0) * sg


def log_posterior(p: Params, s, prior: PriorSpec) -> float:
    """Joint log prior + log likelihood, up to a constant."""
    v = p.as_array()
    if np.any(v <= 0):
        return -math.inf
    x = _data(s)
    lp = float(np.sum((prior.shapes - 1.0) * np.log(v) - v / prior.scales))
    return lp + (float(np.sum(dist.log_pdf(p, x))) if x.size else 0.0)


# --------------------------------------------------------------------------
# sampler

def _batch_terms(alpha, beta, x, mask):
    """Row sums of log A and log gamma over the valid entries of x (B, n)."""
    A = alpha[:, None] / x**2 + beta[:, None] / x**3
    z = alpha[:, None] / x + beta[:, None] / (2.0 * x * x)
    with np.errstate(divide="ignore", invalid="ignore"):
        la = np.where(mask, np.log(A), 0.0)
        lg = np.where(mask, dist.log1mexp(np.where(mask, z, 1.0)), 0.0)
    return la.sum(axis=1), lg.sum(axis=1)


def run_mcmc_batch(samples, priors, inits, configs) -> list[PosteriorChain]:
    """Run one chain per sample, advancing all chains together.

    ``samples`` is a sequence of 1-d arrays (possibly empty); the other
    arguments are equal-length sequences.  Every config must share
    ``iterations``; seeds and proposal scales may differ.
    """
    B = len(samples)
    if not (len(priors) == len(inits) == len(configs) == B) or B == 0:
        raise DomainError("samples, priors, inits and configs must have equal nonzero length")
    K = configs[0].iterations
    if any(c.iterations != K for c in configs):
        raise DomainError("all configs in a batch must share the iteration count")
    xs = [_data(s) for s in samples]
    nmax = max((x.size for x in xs), default=0)
    X = np.ones((B, max(nmax, 1)))
    mask = np.zeros_like(X, dtype=bool)
    for i, x in enumerate(xs):
        X[i, :x.size] = x
        mask[i, :x.size] = True
    n = mask.sum(axis=1).astype(float)
    s_inv = np.where(mask, 1.0 / X, 0.0).sum(axis=1)
    s_half_inv2 = np.where(mask, 0.5 / X**2, 0.0).sum(axis=1)

    shapes = np.array([pr.shapes for pr in priors])
    scales = np.array([pr.scales for pr in priors])
    state = np.array([Params(*p).as_array() if not isinstance(p, Params) else p.as_array() for p in inits])
    if np.any(state <= 0):
        raise DomainError("initial values must be strictly positive for gamma priors")
    sds = np.array([c.proposal_sds for c in configs], dtype=float)

    # each chain owns its random stream: K x 3 normals, then K x 3 uniforms
    Z = np.empty((B, K, 3))
    LU = np.empty((B, K, 3))
    for i, c in enumerate(configs):
        rng = np.random.default_rng(c.seed)
        Z[i] = rng.standard_normal((K, 3))
        LU[i] = np.log(rng.random((K, 3)))

    draws = np.empty((B, K, 3))
    acc = np.zeros((B, K, 3), dtype=bool)
    sa, sg = _batch_terms(state[:, 0], state[:, 1], X, mask)
    adapt = np.array([c.adapt for c in configs])
    burn = np.array([c.burn_in for c in configs])
    window = 100

    for k in range(K):
        # alpha
        a, b, t = state[:, 0], state[:, 1], state[:, 2]
        prop = a + sds[:, 0] * Z[:, k, 0]
        ok = prop > 0
        pp = np.where(ok, prop, 1.0)
        sa_n, sg_n = _batch_terms(pp, b, X, mask)
        with np.errstate(invalid="ignore", divide="ignore"):
            d = ((shapes[:, 0] - 1.0) * (np.log(pp) - np.log(a)) - (pp - a) / scales[:, 0]
                 + sa_n - sa - (pp - a) * s_inv + (t - 1.0) * (sg_n - sg))
        take = ok & (LU[:, k, 0] < np.where(np.isnan(d), -np.inf, d))
        state[:, 0] = np.where(take, pp, a)
        sa, sg = np.where(take, sa_n, sa), np.where(take, sg_n, sg)
        acc[:, k, 0] = take
        # beta
        a, b = state[:, 0], state[:, 1]
        prop = b + sds[:, 1] * Z[:, k, 1]
        ok = prop > 0
        pp = np.where(ok, prop, 1.0)
        sa_n, sg_n = _batch_terms(a, pp, X, mask)
        with np.errstate(invalid="ignore", divide="ignore"):
            d = ((shapes[:, 1] - 1.0) * (np.log(pp) - np.log(b)) - (pp - b) / scales[:, 1]
                 + sa_n - sa - (pp - b) * s_half_inv2 + (t - 1.0) * (sg_n - sg))
        take = ok & (LU[:, k, 1] < np.where(np.isnan(d), -np.inf, d))
        state[:, 1] = np.where(take, pp, b)
        sa, sg = np.where(take, sa_n, sa), np.where(take, sg_n, sg)
        acc[:, k, 1] = take
        # theta: depends on the data only through sum log gamma
        prop = t + sds[:, 2] * Z[:, k, 2]
        ok = prop > 0
        pp = np.where(ok, prop, 1.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            d = ((shapes[:, 2] - 1.0 + n) * (np.log(pp) - np.log(t)) - (pp - t) / scales[:, 2]
                 + (pp - t) * sg)
        take = ok & (LU[:, k, 2] < np.where(np.isnan(d), -np.inf, d))
        state[:, 2] = np.where(take, pp, t)
        acc[:, k, 2] = take
        draws[:, k] = state

        if adapt.any() and (k + 1) % window == 0:
            # scale toward 0.25-0.45 acceptance, only during burn-in
            on = adapt & (k + 1 <= burn)
            if on.any():
                rate = acc[:, k + 1 - window:k + 1].mean(axis=1)
                f = np.where(rate < 0.25, 0.8, np.where(rate > 0.45, 1.25, 1.0))
                sds = np.where(on[:, None], sds * f, sds)

    return [
        PosteriorChain(draws=draws[i], accepted=acc[i], config=configs[i], prior=priors[i],
                       init=Params(*inits[i]) if not isinstance(inits[i], Params) else inits[i],
                       final_sds=tuple(float(v) for v in sds[i]))
        for i in range(B)
    ]


def run_mcmc(s, prior: PriorSpec, config: McmcConfig, init: Params) -> PosteriorChain:
    """Metropolis-within-Gibbs chain for one sample (``s`` may be empty)."""
    return run_mcmc_batch([_data(s)], [prior], [init], [config])[0]


# --------------------------------------------------------------------------
# summaries

def bayes_estimates_self(chain: PosteriorChain) -> Params:
    """Posterior means of the post-burn-in draws (Bayes rule under squared error loss)."""
    kept = chain.kept
    if kept.shape[0] < 100:
        raise DomainError("at least 100 post-burn-in draws are required")
    return Params(*kept.mean(axis=0))


def credible_intervals(chain: PosteriorChain, level: float = 0.95, kind: str = "shortest") -> tuple:
    """Per-parameter credible intervals from the sorted post-burn-in draws.

    ``kind="shortest"`` picks the window of ``floor(level * K')`` consecutive
    order statistics with the smallest width; ``kind="equal"`` uses the
    (1 - level)/2 and (1 + level)/2 sample quantiles.
    """
    if not 0 < level < 1:
        raise DomainError("level must lie in (0, 1)")
    kept = chain.kept
    m = kept.shape[0]
    if m < 100:
        raise DomainError("at least 100 post-burn-in draws are required")
    out = []
    for j, name in enumerate(NAMES):
        v = np.sort(kept[:, j])
        if kind == "shortest":
            w = int(math.floor(level * m))
            widths = v[w:] - v[:m - w]
            i = int(np.argmin(widths))
            lo, hi = v[i], v[i + w]
        elif kind == "equal":
            lo, hi = np.quantile(v, [(1 - level) / 2, (1 + level) / 2])
        else:
            raise ValueError(f"unknown interval kind {kind!r}")
        out.append(ConfidenceInterval(name, float(lo), float(hi), level))
    return tuple(out)


# --------------------------------------------------------------------------
# defaults for data analysis

def default_prior(fit: FitResult, s=None, shape: float = 0.1) -> PriorSpec:
    """Weak gamma priors centred at the fitted values (variance mean^2 / shape).

    A coordinate estimated on the boundary (zero) is centred instead at the
    theta = 1 seed value: median * ln 2 for alpha, median^2 for beta.
    """
    mean = fit.params.as_array().copy()
    if np.any(mean <= 0):
        med = float(np.median(_data(s))) if s is not None else 1.0
        seed = np.array([med * math.log(2.0), med * med, 1.0])
        mean = np.where(mean > 0, mean, seed)
    return PriorSpec.from_mean_shape(mean, shape)


def default_proposal_sds(fit: FitResult, init: Params) -> tuple:
    """Asymptotic standard errors; 10% of the starting value where unavailable."""
    se = np.asarray(fit.std_errors, dtype=float)
    v = init.as_array()
    return tuple(float(s) if math.isfinite(s) and s > 0 else 0.1 * float(x) for s, x in zip(se, v))


def default_init(fit: FitResult, prior: PriorSpec) -> Params:
    """The fitted values, with boundary zeros replaced by the prior mean."""
    v = fit.params.as_array()
    return Params(*np.where(v > 0, v, prior.mean()))


# --------------------------------------------------------------------------
# export

CHAIN_COLUMNS = ("iteration", "alpha", "beta", "theta", "accepted_alpha", "accepted_beta", "accepted_theta")


def write_chain_csv(chain: PosteriorChain, fh) -> None:
    """Write every sweep (burn-in included) as CSV rows to an open text handle."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CHAIN_COLUMNS)
    for i, (row, a) in enumerate(zip(chain.draws, chain.accepted), start=1):
        w.writerow([i] + [f"{v:.17g}" for v in row] + [int(x) for x in a])
