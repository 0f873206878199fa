"""Scenario risk measures, min-CVaR weights, the forecast pipeline and back-testing."""

from .backtest import (
    BacktestResult,
    CoverageTests,
    chi_square_sf,
    christoffersen_tests,
    coverage_tests,
    kupiec_uc,
    rolling_backtest,
    transition_counts,
)
from .measures import TailRisk, cvar_empirical, mean_excess, ru_cvar, tail_risk, var_empirical
from .pipeline import (
    STAGES,
    AssetModel,
    ComparisonRow,
    RiskModel,
    RiskReport,
    ScenarioMatrix,
    assess,
    build_risk_model,
    compare_copulas,
    fit_summary_payload,
    pipeline_forecast,
    refresh_risk_model,
    risk_model_from_payload,
    risk_model_to_payload,
    simulate_scenarios,
)
from .portfolio import MinCvarSolution, min_cvar_weights, portfolio_returns, solve_min_cvar

__all__ = [
    "STAGES",
    "AssetModel",
    "BacktestResult",
    "ComparisonRow",
    "CoverageTests",
    "MinCvarSolution",
    "RiskModel",
    "RiskReport",
    "ScenarioMatrix",
    "TailRisk",
    "assess",
    "build_risk_model",
    "chi_square_sf",
    "christoffersen_tests",
    "compare_copulas",
    "coverage_tests",
    "cvar_empirical",
    "fit_summary_payload",
    "kupiec_uc",
    "mean_excess",
    "min_cvar_weights",
    "pipeline_forecast",
    "portfolio_returns",
    "refresh_risk_model",
    "risk_model_from_payload",
    "risk_model_to_payload",
    "rolling_backtest",
    "ru_cvar",
    "simulate_scenarios",
    "solve_min_cvar",
    "tail_risk",
    "transition_counts",
    "var_empirical",
]
