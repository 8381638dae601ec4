"""Monte Carlo study of the MLE, MPS and Bayes estimators.

Each replication draws its own random streams from
``SeedSequence(seed, spawn_key=(n, rep))``, so a report does not depend on
the order in which replications run or on how they are split across
worker processes.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import bayes
from . import distribution as dist
from .distribution import Params
from .errors import DomainError, NumericalError
from .frequentist import NAMES, asymptotic_cis, fit_mle, fit_mps

METHODS = ("MLE", "MPS", "Bayes")


@dataclass
class SimulationScenario:
    truth: Params = Params(0.5, 0.5, 1.0)
    sample_sizes: tuple = (20, 50, 100)
    replications: int = 1000
    seed: int = 20240101
    methods: tuple = METHODS
    prior: bayes.PriorSpec | None = None
    mcmc: bayes.McmcConfig = bayes.McmcConfig(iterations=5000, burn_in=1000)
    level: float = 0.95
    workers: int = 1
    chunk: int = 250

    def __post_init__(self):
        self.sample_sizes = tuple(int(n) for n in self.sample_sizes)
        self.methods = tuple(self.methods)
        if self.replications < 1:
            raise DomainError("replications must be >= 1")
        if not self.sample_sizes or min(self.sample_sizes) < 5:
            raise DomainError("sample sizes must be >= 5")
        bad = set(self.methods) - set(METHODS)
        if bad or not self.methods:
            raise DomainError(f"methods must be a nonempty subset of {METHODS}, got {self.methods}")
        if not 0 < self.level < 1:
            raise DomainError("level must lie in (0, 1)")
        if self.prior is None:
            # truth-anchored weak priors: mean = truth, shape 2
            self.prior = bayes.PriorSpec.from_mean_shape(self.truth.as_array(), 2.0)

    def describe(self) -> dict:
        return {
            "truth": list(self.truth.as_array()),
            "sample_sizes": list(self.sample_sizes),
            "replications": self.replications,
            "seed": self.seed,
            "methods": list(self.methods),
            "prior": dict(zip("abcdpq", self.prior.as_array().tolist())),
            "mcmc_iterations": self.mcmc.iterations,
            "mcmc_burn_in": self.mcmc.burn_in,
            "level": self.level,
        }


@dataclass(frozen=True)
class CellStats:
    bias: float
    mse: float
    avg_length: float
    coverage: float
    failures: int
    count: int


@dataclass
class SimulationReport:
    scenario: SimulationScenario
    cells: dict                     # (n, method, parameter) -> CellStats
    runtime: float = 0.0
    raw: dict = field(default_factory=dict, repr=False)

    def cell(self, n, method, parameter) -> CellStats:
        return self.cells[(n, method, parameter)]

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.describe(),
            "runtime_seconds": self.runtime,
            "cells": [
                {"n": n, "method": m, "parameter": q, **vars(c)}
                for (n, m, q), c in sorted(self.cells.items(), key=lambda kv: _cell_order(kv[0]))
            ],
        }


def _cell_order(key):
    n, m, q = key
    return (n, METHODS.index(m), NAMES.index(q))


def replication_streams(seed: int, n: int, rep: int) -> tuple[np.random.Generator, int]:
    """Data generator and MCMC seed for one replication."""
    data_ss, mcmc_ss = np.random.SeedSequence(seed, spawn_key=(n, rep)).spawn(2)
    return np.random.default_rng(data_ss), int(mcmc_ss.generate_state(1, dtype=np.uint64)[0])


def _empty(r):
    return {"est": np.full((r, 3), np.nan), "lo": np.full((r, 3), np.nan),
            "hi": np.full((r, 3), np.nan), "ok": np.zeros(r, dtype=bool)}


def _freq(fitter, x, level):
    try:
        fit = fitter(x)
    except (NumericalError, DomainError, ValueError, FloatingPointError):
        return None
    if not fit.converged:
        return None
    cis = asymptotic_cis(fit, level)
    return fit, np.array([[c.lower, c.upper] for c in cis])


def run_chunk(sc: SimulationScenario, n: int, reps) -> dict:
    """All methods for the given replication indices at one sample size."""
    reps = list(reps)
    r = len(reps)
    out = {m: _empty(r) for m in sc.methods}
    need_mle = "MLE" in sc.methods or "Bayes" in sc.methods
    samples, inits, cfgs = [], [], []
    for i, rep in enumerate(reps):
        rng, mseed = replication_streams(sc.seed, n, rep)
        x = dist.sample(sc.truth, n, rng)
        mle = _freq(fit_mle, x, sc.level) if need_mle else None
        for m, res in (("MLE", mle), ("MPS", _freq(fit_mps, x, sc.level) if "MPS" in sc.methods else None)):
            if m in sc.methods and res is not None:
                fit, ci = res
                out[m]["est"][i] = fit.params.as_array()
                out[m]["lo"][i], out[m]["hi"][i] = ci[:, 0], ci[:, 1]
                out[m]["ok"][i] = True
        if "Bayes" in sc.methods:
            # chain starts at the MLE with its standard errors as proposal scales
            if mle is not None:
                init = bayes.default_init(mle[0], sc.prior)
                sds = bayes.default_proposal_sds(mle[0], init)
            else:
                init = Params(*sc.prior.mean())
                sds = tuple(0.1 * init.as_array())
            samples.append(x)
            inits.append(init)
            cfgs.append(sc.mcmc.replace(seed=mseed, proposal_sds=sds))
    if "Bayes" in sc.methods:
        chains = bayes.run_mcmc_batch(samples, [sc.prior] * r, inits, cfgs)
        for i, ch in enumerate(chains):
            if not np.all(np.isfinite(ch.draws)):
                continue
            out["Bayes"]["est"][i] = bayes.bayes_estimates_self(ch).as_array()
            cis = bayes.credible_intervals(ch, sc.level)
            out["Bayes"]["lo"][i] = [c.lower for c in cis]
            out["Bayes"]["hi"][i] = [c.upper for c in cis]
            out["Bayes"]["ok"][i] = True
    return out


def aggregate(est, truth, lower=None, upper=None, ok=None) -> list[CellStats]:
    """Bias, MSE, mean interval length and coverage per column of ``est``.

    Rows with ``ok`` False are excluded and counted as failures.
    """
    est = np.atleast_2d(np.asarray(est, dtype=float))
    if est.shape[0] == 1 and np.ndim(truth) == 0:
        est = est.T
    truth = np.broadcast_to(np.asarray(truth, dtype=float), (est.shape[1],))
    ok = np.ones(est.shape[0], dtype=bool) if ok is None else np.asarray(ok, dtype=bool)
    e = est[ok]
    out = []
    for j in range(est.shape[1]):
        err = e[:, j] - truth[j]
        if lower is not None and e.shape[0]:
            lo, hi = np.asarray(lower)[ok][:, j], np.asarray(upper)[ok][:, j]
            length, cover = float(np.mean(hi - lo)), float(np.mean((lo <= truth[j]) & (truth[j] <= hi)))
        else:
            length = cover = math.nan
        out.append(CellStats(
            bias=float(np.mean(err)) if err.size else math.nan,
            mse=float(np.mean(err**2)) if err.size else math.nan,
            avg_length=length, coverage=cover,
            failures=int((~ok).sum()), count=int(ok.sum()),
        ))
    return out


def _chunk_job(args):
    sc, n, reps = args
    return n, reps[0], run_chunk(sc, n, reps)


def run_scenario(sc: SimulationScenario) -> SimulationReport:
    """Run every (n, replication) pair and aggregate per (n, method, parameter)."""
    t0 = time.perf_counter()
    jobs = []
    for n in sc.sample_sizes:
        for start in range(0, sc.replications, sc.chunk):
            jobs.append((sc, n, list(range(start, min(start + sc.chunk, sc.replications)))))
    if sc.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=sc.workers) as ex:
            results = list(ex.map(_chunk_job, jobs))
    else:
        results = [_chunk_job(j) for j in jobs]

    raw = {}
    for n in sc.sample_sizes:
        parts = sorted((r for r in results if r[0] == n), key=lambda r: r[1])
        raw[n] = {m: {k: np.concatenate([p[2][m][k] for p in parts]) for k in ("est", "lo", "hi", "ok")}
                  for m in sc.methods}
    cells = {}
    truth = sc.truth.as_array()
    for n, by_method in raw.items():
        for m, d in by_method.items():
            for q, c in zip(NAMES, aggregate(d["est"], truth, d["lo"], d["hi"], d["ok"])):
                cells[(n, m, q)] = c
    return SimulationReport(scenario=sc, cells=cells, runtime=time.perf_counter() - t0, raw=raw)


def compare_methods(report: SimulationReport) -> dict:
    """Rank methods by MSE and by |bias| in every (n, parameter) cell.

    Ties share the lowest rank.  Returns ``{"rows": [...], "wins": {...}}``
    where ``wins[method]`` counts cells in which the method ranks first.
    """
    methods = [m for m in METHODS if m in report.scenario.methods]
    if len(methods) < 2:
        raise DomainError("need at least two methods to compare")
    rows = []
    wins = {m: {"mse": 0, "abs_bias": 0} for m in methods}
    for n in report.scenario.sample_sizes:
        for q in NAMES:
            mse = np.array([report.cell(n, m, q).mse for m in methods])
            ab = np.array([abs(report.cell(n, m, q).bias) for m in methods])
            r_mse = stats.rankdata(np.where(np.isnan(mse), np.inf, mse), method="min").astype(int)
            r_bias = stats.rankdata(np.where(np.isnan(ab), np.inf, ab), method="min").astype(int)
            rows.append({"n": n, "parameter": q,
                         "mse_rank": dict(zip(methods, r_mse.tolist())),
                         "bias_rank": dict(zip(methods, r_bias.tolist()))})
            for m, a, b in zip(methods, r_mse, r_bias):
                wins[m]["mse"] += int(a == 1)
                wins[m]["abs_bias"] += int(b == 1)
    return {"rows": rows, "wins": wins}


def self_test(replications: int = 2000, n: int = 25, seed: int = 1, mean: float = 2.0) -> tuple[float, float]:
    """Bias of the sample mean of exponential data and its Monte Carlo SE.

    Exercises the per-replication streams and :func:`aggregate` on an
    estimator whose expectation is known exactly.
    """
    est = np.empty((replications, 1))
    for rep in range(replications):
        rng, _ = replication_streams(seed, n, rep)
        est[rep, 0] = rng.exponential(mean, n).mean()
    cell = aggregate(est, [mean])[0]
    mcse = float(np.std(est[:, 0], ddof=1) / math.sqrt(replications))
    return cell.bias, mcse


def write_csv(report: SimulationReport, fh) -> None:
    """One row per n; for each method and parameter the bias, MSE, length and coverage."""
    methods = [m for m in METHODS if m in report.scenario.methods]
    header = ["n"]
    for m in methods:
        for q in NAMES:
            header += [f"{m}_{q}_{k}" for k in ("bias", "mse", "avg_length", "coverage", "failures")]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for n in report.scenario.sample_sizes:
        row = [n]
        for m in methods:
            for q in NAMES:
                c = report.cell(n, m, q)
                row += [f"{c.bias:.17g}", f"{c.mse:.17g}", f"{c.avg_length:.17g}", f"{c.coverage:.17g}", c.failures]
        w.writerow(row)


def write_json(report: SimulationReport, fh) -> None:
    json.dump(report.to_dict(), fh, indent=2, allow_nan=True)
