"""Univariate ARMA-APARCH volatility models with skewed Student-t innovations."""

from .aparch import (
    ArmaAparchParams,
    ArmaAparchSpec,
    FilteredPath,
    SimulatedPath,
    aparch_filter,
    arch,
    filter_path,
    garch,
    gjr_garch,
    loglik,
    loglik_gradient,
    simulate,
    simulate_path,
    special_case,
    stationarity_margin,
    tgarch,
)
from .fitting import (
    ArmaAparchFit,
    FitOptions,
    evaluate_fit,
    fit,
    fit_many,
    forecast_one_step,
    select_spec,
)
from .sstd import power_moment, sstd_cdf, sstd_density, sstd_logpdf, sstd_quantile, sstd_random

__all__ = [
    "ArmaAparchFit",
    "ArmaAparchParams",
    "ArmaAparchSpec",
    "FilteredPath",
    "FitOptions",
    "SimulatedPath",
    "aparch_filter",
    "arch",
    "evaluate_fit",
    "filter_path",
    "fit",
    "fit_many",
    "forecast_one_step",
    "garch",
    "gjr_garch",
    "loglik",
    "loglik_gradient",
    "power_moment",
    "select_spec",
    "simulate",
    "simulate_path",
    "special_case",
    "sstd_cdf",
    "sstd_density",
    "sstd_logpdf",
    "sstd_quantile",
    "sstd_random",
    "stationarity_margin",
    "tgarch",
]
