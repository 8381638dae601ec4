"""Inverse generalized linear failure rate (IGLFR) distribution toolkit."""

from .distribution import (
    Params, cdf, hazard, kurtosis_moors, log_pdf, median, mode, moment, odd_function, pdf,
    quantile, reversed_hazard, sample, skewness_bowley, survival,
)
from .errors import DataError, DomainError, NumericalError, SingularInformationError
from .frequentist import (
    ConfidenceInterval, FitConfig, FitResult, ObservedSample, asymptotic_cis, fit_mle, fit_mps,
    log_likelihood, mps_objective, observed_information, score,
)
from .order_stats import OrderStatSpec, check_lr_order, order_stat_cdf, order_stat_pdf
from .bayes import (
    McmcConfig, PosteriorChain, PriorSpec, bayes_estimates_self, credible_intervals, run_mcmc,
)
from .gof import GofReport, ecdf, ks_test, plot_data
from .datasets import Dataset, builtin, load
from .simulation import SimulationReport, SimulationScenario, compare_methods, run_scenario

__version__ = "0.1.0"
