"""Empirical CDF, Kolmogorov-Smirnov test and plot coordinates."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import distribution as dist
from .distribution import Params
from .frequentist import as_sample

PLOT_KINDS = ("ecdf", "pp", "qq", "density", "ttt")


@dataclass(frozen=True)
class GofReport:
    ks_statistic: float
    p_value: float
    n: int
    fitted: Params
    method: str = "exact"

    def __post_init__(self):
        if not (0.0 <= self.ks_statistic <= 1.0 and 0.0 <= self.p_value <= 1.0):
            raise ValueError("statistic and p-value must lie in [0, 1]")


def ks_statistic(s, p: Params) -> float:
    """D_n = max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n) over the sorted sample."""
    x = as_sample(s).sorted_view
    n = x.size
    F = np.asarray(dist.cdf(p, x), dtype=float)
    i = np.arange(1, n + 1)
    return float(min(1.0, max(np.max(i / n - F), np.max(F - (i - 1) / n), 0.0)))


def kolmogorov_sf(t: float, terms: int = 100) -> float:
    """P(K > t) for the limiting Kolmogorov law, truncated at ``terms`` terms.

    Uses the alternating series 2 sum (-1)^(k-1) exp(-2 k^2 t^2) for t >= 1
    and the Jacobi theta form sqrt(2 pi)/t sum exp(-(2k-1)^2 pi^2 / (8 t^2))
    below it, where the alternating series converges slowly.
    """
    if t <= 0:
        return 1.0
    k = np.arange(1, terms + 1, dtype=float)
    if t >= 1.0:
        sf = 2.0 * np.sum((-1.0) ** (k - 1) * np.exp(-2.0 * k * k * t * t))
    else:
        cdf = math.sqrt(2.0 * math.pi) / t * np.sum(np.exp(-((2.0 * k - 1.0) ** 2) * math.pi**2 / (8.0 * t * t)))
        sf = 1.0 - cdf
    return float(min(1.0, max(0.0, sf)))


def ks_test(s, p: Params, method: str = "exact") -> GofReport:
    """One-sample K-S test of ``s`` against the IGLFR law ``p``.

    Parameters
    ----------
    method : {"exact", "asymptotic"}
        ``"exact"`` uses the finite-n null distribution of D_n; ``"asymptotic"``
        uses the limiting Kolmogorov series for sqrt(n) D_n.  Neither
        accounts for estimated parameters.
    """
    s = as_sample(s)
    n = len(s)
    d = ks_statistic(s, p)
    if method == "exact":
        pv = float(stats.kstwo.sf(d, n))
    elif method == "asymptotic":
        pv = kolmogorov_sf(math.sqrt(n) * d)
    else:
        raise ValueError(f"unknown method {method!r}")
    return GofReport(ks_statistic=d, p_value=min(1.0, max(0.0, pv)), n=n, fitted=p, method=method)


class ECDF:
    """Right-continuous empirical CDF; ties give jumps of size k/n."""

    def __init__(self, s):
        self.x = as_sample(s).sorted_view
        self.n = self.x.size

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        return dist._out(np.searchsorted(self.x, q, side="right") / self.n)


def ecdf(s) -> ECDF:
    return ECDF(s)


def ttt_transform(x) -> tuple[np.ndarray, np.ndarray]:
    """Scaled total time on test: (i/n, T_i/T_n) with T_i = sum_{j<=i} x_(j) + (n-i) x_(i)."""
    x = np.sort(np.asarray(x, dtype=float))
    n = x.size
    i = np.arange(1, n + 1)
    T = np.cumsum(x) + (n - i) * x
    return i / n, T / T[-1]


def plot_data(p: Params, s, kind: str) -> np.ndarray:
    """Plot coordinates as an (m, k) array.

    ``ecdf``: (x_(i), ecdf, model cdf); ``pp``: (F(x_(i)), i/n);
    ``qq``: (Q((i-0.5)/n), x_(i)); ``density``: (bin centre, histogram
    density, pdf) with Freedman-Diaconis bins; ``ttt``: (i/n, T_i/T_n).
    """
    x = as_sample(s).sorted_view
    n = x.size
    i = np.arange(1, n + 1)
    if kind == "ecdf":
        return np.column_stack([x, ECDF(x)(x), dist.cdf(p, x)])
    if kind == "pp":
        return np.column_stack([np.atleast_1d(dist.cdf(p, x)), i / n])
    if kind == "qq":
        return np.column_stack([np.atleast_1d(dist.quantile(p, (i - 0.5) / n)), x])
    if kind == "density":
        dens, edges = np.histogram(x, bins="fd", density=True)
        mid = 0.5 * (edges[:-1] + edges[1:])
        return np.column_stack([mid, dens, np.atleast_1d(dist.pdf(p, mid))])
    if kind == "ttt":
        u, v = ttt_transform(x)
        return np.column_stack([u, v])
    raise ValueError(f"unknown plot kind {kind!r}; choose from {PLOT_KINDS}")


PLOT_COLUMNS = {
    "ecdf": ("x", "ecdf", "model_cdf"),
    "pp": ("model_cdf", "empirical"),
    "qq": ("model_quantile", "sample"),
    "density": ("bin_center", "histogram_density", "pdf"),
    "ttt": ("i_over_n", "scaled_ttt"),
}


def plot_data_csv(p: Params, s, kind: str) -> str:
    """CSV text; the first column repeats ``kind`` so concatenated files stay self-describing."""
    rows = plot_data(p, s, kind)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("kind",) + PLOT_COLUMNS[kind])
    for r in rows:
        w.writerow([kind] + [f"{float(v):.17g}" for v in r])
    return buf.getvalue()
