"""Semi-parametric residual margins with generalized Pareto tails."""

from .gpd import GpdTail, fit_gpd, gpd_isf, gpd_loglik, gpd_pwm, gpd_score, gpd_sf
from .semiparametric import (
    SemiParametricMargin,
    fit_margin,
    margin_cdf,
    margin_from_payload,
    margin_quantile,
    margin_to_payload,
)

__all__ = [
    "GpdTail",
    "SemiParametricMargin",
    "fit_gpd",
    "fit_margin",
    "gpd_isf",
    "gpd_loglik",
    "gpd_pwm",
    "gpd_score",
    "gpd_sf",
    "margin_cdf",
    "margin_from_payload",
    "margin_quantile",
    "margin_to_payload",
]
