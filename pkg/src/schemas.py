"""Pydantic payload models for every JSON artifact the engine writes.

These models are the published contract: ``run_risk_engine.py schema`` writes
their JSON schemas, and reports are produced with ``model_dump_json``.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class DescriptiveStatsRow(BaseModel):
    ticker: str
    n: int
    maximum: float
    mean: float
    minimum: float
    std: float
    skewness: float | None
    kurtosis: float | None  # raw, not excess
    jarque_bera: float | None
    jb_pvalue: float | None
    degenerate: bool = False


class DescriptiveStatsPayload(BaseModel):
    start_date: str | None = None
    end_date: str | None = None
    dropped_rows: int = 0
    rows: list[DescriptiveStatsRow]


class FitSummaryPayload(BaseModel):
    """One fitted ARMA-APARCH model; ``params`` keys are the ARMA-APARCH parameter names."""
    ticker: str
    spec: tuple[int, int, int, int]
    params: dict[str, float]
    loglik: float
    aic_total: float
    aic_per_obs: float
    n_obs: int
    converged: bool
    status: str


class FitReportPayload(BaseModel):
    fits: list[FitSummaryPayload]


class HacNodePayload(BaseModel):
    """Either a leaf (1-based ``leaf``) or an internal node with ``theta`` and ``children``."""
    leaf: int | None = Field(default=None, ge=1)
    theta: float | None = None
    tau: float | None = None
    children: list["HacNodePayload"] | None = None


HacNodePayload.model_rebuild()


class HacModelPayload(BaseModel):
    family: Literal["gumbel", "clayton", "frank", "joe"]
    structure: str
    root: HacNodePayload


class StructureReportPayload(BaseModel):
    tickers: list[str]
    kendall_matrix: list[list[float]]
    model: HacModelPayload
    theta_vector: list[float]
    tau_vector: list[float | None]


class MarginPayload(BaseModel):
    xi_l: float
    beta_l: float = Field(gt=0)
    u_l: float
    n_l: int
    method_l: str = "mle"
    xi_r: float
    beta_r: float = Field(gt=0)
    u_r: float
    n_r: int
    method_r: str = "mle"
    n_total: int
    tail_fraction: float
    interior_grid: list[tuple[float, float]]


class AssetModelPayload(BaseModel):
    ticker: str
    fit: FitSummaryPayload
    mu_next: float
    sigma_next: float = Field(gt=0)
    margin: MarginPayload


class RiskModelPayload(BaseModel):
    """Fitted stages 1-3 of the forecast: per-asset models and the copula."""
    family: Literal["gumbel", "clayton", "frank", "joe"]
    mode: Literal["hac", "ac"]
    assets: list[AssetModelPayload]
    copula: HacModelPayload | None = None


class RiskReportPayload(BaseModel):
    alpha: float
    var: float
    cvar: float
    cvar_mean_excess: float
    no_exceedance: bool
    weights: dict[str, float]
    family: str
    mode: str
    structure: str | None
    n_scenarios: int
    seed: int


class BacktestDay(BaseModel):
    date: str
    forecast_var: float | None
    realized_return: float | None
    hit: int | None


class BacktestPayload(BaseModel):
    alpha: float
    n: int
    x: int
    exceedance_rate: float
    uc_stat: float
    uc_pvalue: float
    ind_stat: float
    ind_pvalue: float
    cc_stat: float
    cc_pvalue: float
    skipped_days: int
    days: list[BacktestDay]


class ComparisonRowPayload(BaseModel):
    family: str
    mode: str
    var: float
    cvar: float
    seconds: float


class ComparisonPayload(BaseModel):
    alpha: float
    seed: int
    rows: list[ComparisonRowPayload]


PUBLISHED_SCHEMAS: dict[str, type[BaseModel]] = {
    "descriptive_stats": DescriptiveStatsPayload,
    "fit_report": FitReportPayload,
    "hac_model": HacModelPayload,
    "structure_report": StructureReportPayload,
    "risk_model": RiskModelPayload,
    "risk_report": RiskReportPayload,
    "backtest": BacktestPayload,
    "comparison": ComparisonPayload,
}
