"""Nine-stage portfolio tail-risk forecast.

Stages 1-3 (``build_risk_model``) fit per-asset ARMA-APARCH models, their
semi-parametric residual margins and the copula; stages 4-6
(``simulate_scenarios``) turn copula draws into one-step return scenarios;
stages 7-9 (``assess``) choose min-CVaR weights and measure the tail of the
portfolio loss. Every failure inside a stage surfaces as ``StageError``.
"""

from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from archimedean import (
    GeneratorFamily,
    HacModel,
    empirical_kendall_matrix,
    estimate_structure,
    exchangeable_model,
    model_from_payload,
    model_to_payload,
    sample_ac,
    sample_hac,
    streams,
)
from config import RunConfig
from errors import DataError, NumericalError, StageError
from margins import (
    SemiParametricMargin,
    fit_margin,
    margin_cdf,
    margin_from_payload,
    margin_quantile,
    margin_to_payload,
)
from prices import ReturnTable
from schemas import (
    AssetModelPayload,
    ComparisonRowPayload,
    FitSummaryPayload,
    RiskModelPayload,
    RiskReportPayload,
)
from volatility import ArmaAparchFit, ArmaAparchParams, ArmaAparchSpec, FitOptions, filter_path, fit_many

from .measures import tail_risk
from .portfolio import min_cvar_weights, portfolio_returns

logger = logging.getLogger(__name__)

MIN_FORECAST_OBS = 500
STAGES = (
    "fit_volatility",
    "fit_margins",
    "estimate_copula",
    "sample_copula",
    "invert_margins",
    "forecast_scenarios",
    "optimize_weights",
    "portfolio_returns",
    "risk_measures",
)
_LOWEST = np.finfo(float).tiny
_HIGHEST = np.nextafter(1.0, 0.0)


@contextmanager
def _stage(name: str) -> Iterator[None]:
    logger.info("stage %s started", name)
    started = time.perf_counter()
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        logger.error("stage %s failed: %s", name, exc)
        raise StageError(name, exc) from exc
    logger.info("stage %s finished in %.3fs", name, time.perf_counter() - started)


@dataclass(frozen=True)
class AssetModel:
    """Fitted volatility model, one-step state and residual margin of one asset."""

    ticker: str
    params: ArmaAparchParams
    mu_next: float
    sigma_next: float
    margin: SemiParametricMargin
    summary: FitSummaryPayload = field(repr=False)


@dataclass(frozen=True)
class RiskModel:
    family: GeneratorFamily
    mode: str
    assets: tuple[AssetModel, ...]
    copula: HacModel | None = None

    @property
    def tickers(self) -> tuple[str, ...]:
        return tuple(asset.ticker for asset in self.assets)

    @property
    def dimension(self) -> int:
        return len(self.assets)

    @property
    def structure(self) -> str | None:
        return self.copula.structure_string if self.copula is not None else None


@dataclass(frozen=True)
class ScenarioMatrix:
    returns: NDArray[np.float64] = field(repr=False)
    tickers: tuple[str, ...]
    seed: int
    family: str
    mode: str
    structure: str | None = None

    @property
    def n(self) -> int:
        return int(self.returns.shape[0])


@dataclass(frozen=True)
class RiskReport:
    alpha: float
    var: float
    cvar: float
    cvar_mean_excess: float
    no_exceedance: bool
    weights: NDArray[np.float64]
    tickers: tuple[str, ...]
    family: str
    mode: str
    structure: str | None
    n_scenarios: int
    seed: int

    def to_payload(self) -> RiskReportPayload:
        return RiskReportPayload(
            alpha=self.alpha,
            var=self.var,
            cvar=self.cvar,
            cvar_mean_excess=self.cvar_mean_excess,
            no_exceedance=self.no_exceedance,
            weights={t: float(w) for t, w in zip(self.tickers, self.weights)},
            family=self.family,
            mode=self.mode,
            structure=self.structure,
            n_scenarios=self.n_scenarios,
            seed=self.seed,
        )


@dataclass(frozen=True)
class ComparisonRow:
    family: str
    mode: str
    var: float
    cvar: float
    seconds: float

    def to_payload(self) -> ComparisonRowPayload:
        return ComparisonRowPayload(
            family=self.family, mode=self.mode, var=self.var, cvar=self.cvar, seconds=self.seconds
        )


def fit_summary_payload(ticker: str, fitted: ArmaAparchFit) -> FitSummaryPayload:
    spec = fitted.spec
    return FitSummaryPayload(
        ticker=ticker,
        spec=(spec.p, spec.q, spec.m, spec.n),
        params=fitted.params.as_dict(),
        loglik=fitted.loglik,
        aic_total=fitted.aic_total,
        aic_per_obs=fitted.aic_per_obs,
        n_obs=fitted.n_obs,
        converged=fitted.converged,
        status=fitted.status,
    )


def return_matrix(
    data: ReturnTable | ArrayLike, tickers: Sequence[str] | None
) -> tuple[NDArray[np.float64], tuple[str, ...]]:
    if isinstance(data, ReturnTable):
        return data.returns, tuple(tickers or data.tickers)
    r = np.asarray(data, dtype=float)
    if r.ndim == 1:
        r = r[:, None]
    if r.ndim != 2:
        raise DataError("returns must be a (T, d) matrix")
    names = tuple(tickers) if tickers is not None else tuple(f"asset{j + 1}" for j in range(r.shape[1]))
    if len(names) != r.shape[1]:
        raise DataError(f"{len(names)} tickers for {r.shape[1]} return columns")
    if not np.all(np.isfinite(r)):
        raise DataError("returns contain non-finite values")
    return r, names


def _fit_volatility(
    r: NDArray[np.float64],
    config: RunConfig,
    warm: Sequence[ArmaAparchParams | None] | None,
) -> list[ArmaAparchFit]:
    options = FitOptions(n_starts=config.n_starts, seed=config.seed)
    return fit_many(config.aparch_spec, r, options, warm, max_workers=config.max_workers)


def fit_assets(
    data: ReturnTable | ArrayLike,
    config: RunConfig,
    *,
    tickers: Sequence[str] | None = None,
    warm: Sequence[ArmaAparchParams | None] | None = None,
) -> tuple[list[AssetModel], NDArray[np.float64]]:
    """Stages 1-2: per-asset fits and margins, plus the residual pseudo-uniforms."""

    r, names = return_matrix(data, tickers)
    with _stage("fit_volatility"):
        fits = _fit_volatility(r, config, warm)
        for name, fitted in zip(names, fits):
            if fitted.converged:
                logger.info("%s: %s converged, loglik=%.4f", name, fitted.spec, fitted.loglik)
            else:
                logger.warning("%s: %s", name, fitted.status)
    with _stage("fit_margins"):
        margins = [fit_margin(fitted.residuals, config.tail_fraction) for fitted in fits]
        uniforms = np.column_stack(
            [margin_cdf(margin, fitted.residuals) for margin, fitted in zip(margins, fits)]
        )
    assets = [
        AssetModel(
            ticker=name,
            params=fitted.params,
            mu_next=fitted.mu_next,
            sigma_next=fitted.sigma_next,
            margin=margin,
            summary=fit_summary_payload(name, fitted),
        )
        for name, fitted, margin in zip(names, fits, margins)
    ]
    return assets, uniforms


def estimate_copula(uniforms: ArrayLike, family: GeneratorFamily | str, mode: str) -> HacModel | None:
    """Stage 3: nested structure (``hac``) or one exchangeable node (``ac``)."""

    u = np.asarray(uniforms, dtype=float)
    if u.shape[1] == 1:
        return None
    with _stage("estimate_copula"):
        tau = empirical_kendall_matrix(u)
        if mode == "ac":
            model = exchangeable_model(tau, family)
        else:
            model = estimate_structure(tau, family)
        logger.info("copula %s: %s", mode, model.structure_string)
    return model


def build_risk_model(
    data: ReturnTable | ArrayLike,
    config: RunConfig,
    *,
    tickers: Sequence[str] | None = None,
    warm: Sequence[ArmaAparchParams | None] | None = None,
) -> RiskModel:
    """Stages 1-3 of the forecast."""

    assets, uniforms = fit_assets(data, config, tickers=tickers, warm=warm)
    copula = estimate_copula(uniforms, config.family, config.copula_mode)
    return RiskModel(config.generator_family, config.copula_mode, tuple(assets), copula)


def refresh_risk_model(model: RiskModel, data: ReturnTable | ArrayLike) -> RiskModel:
    """Re-filter each asset at its fitted parameters to move the one-step state forward.

    Margins and copula are kept as they are.
    """

    r, _ = return_matrix(data, model.tickers)
    if r.shape[1] != model.dimension:
        raise DataError(f"model has {model.dimension} assets, returns have {r.shape[1]}")
    assets = []
    for j, asset in enumerate(model.assets):
        path = filter_path(asset.params, r[:, j])
        assets.append(replace(asset, mu_next=path.mu_next, sigma_next=path.sigma_next))
    return replace(model, assets=tuple(assets))


def _sample_uniforms(model: RiskModel, n: int, seed: int, max_workers: int) -> NDArray[np.float64]:
    if model.copula is None:

        def draw(rows: int, rng: np.random.Generator) -> NDArray[np.float64]:
            return np.clip(rng.random((rows, model.dimension)), _LOWEST, _HIGHEST)

        return streams.run_blocks(n, seed, streams.MARGINAL_SAMPLE, draw, max_workers=max_workers)
    if model.mode == "ac":
        return sample_ac(model.copula.root.generator, model.dimension, n, seed, max_workers=max_workers)
    return sample_hac(model.copula, n, seed, max_workers=max_workers)


def simulate_scenarios(model: RiskModel, n: int, seed: int, *, max_workers: int = 1) -> ScenarioMatrix:
    """Stages 4-6: copula draws, margin inversion, one-step return scenarios."""

    with _stage("sample_copula"):
        u = _sample_uniforms(model, n, seed, max_workers)
    with _stage("invert_margins"):
        z = np.column_stack([margin_quantile(asset.margin, u[:, j]) for j, asset in enumerate(model.assets)])
    with _stage("forecast_scenarios"):
        mu = np.array([asset.mu_next for asset in model.assets])
        sigma = np.array([asset.sigma_next for asset in model.assets])
        returns = mu[None, :] + sigma[None, :] * z
        if not np.all(np.isfinite(returns)):
            raise NumericalError("scenario returns contain non-finite values")
    return ScenarioMatrix(
        returns=returns,
        tickers=model.tickers,
        seed=seed,
        family=model.family.value,
        mode=model.mode,
        structure=model.structure,
    )


def assess(scenarios: ScenarioMatrix, config: RunConfig) -> RiskReport:
    """Stages 7-9: min-CVaR weights, portfolio returns, VaR and CVaR of the loss."""

    with _stage("optimize_weights"):
        weights = min_cvar_weights(
            scenarios.returns,
            config.alpha,
            max_weight=config.max_weight,
            target_return=config.target_return,
        )
    with _stage("portfolio_returns"):
        portfolio = portfolio_returns(scenarios.returns, weights)
    with _stage("risk_measures"):
        risk = tail_risk(-portfolio, config.alpha)
    return RiskReport(
        alpha=config.alpha,
        var=risk.var,
        cvar=risk.cvar,
        cvar_mean_excess=risk.mean_excess,
        no_exceedance=risk.no_exceedance,
        weights=weights,
        tickers=scenarios.tickers,
        family=scenarios.family,
        mode=scenarios.mode,
        structure=scenarios.structure,
        n_scenarios=scenarios.n,
        seed=scenarios.seed,
    )


def pipeline_forecast(
    data: ReturnTable | ArrayLike,
    config: RunConfig,
    *,
    tickers: Sequence[str] | None = None,
) -> RiskReport:
    """One-step VaR and CVaR of the min-CVaR portfolio; deterministic per seed."""

    r, names = return_matrix(data, tickers)
    if r.shape[0] < MIN_FORECAST_OBS:
        raise DataError(f"a forecast needs at least {MIN_FORECAST_OBS} returns, got {r.shape[0]}")
    model = build_risk_model(r, config, tickers=names)
    scenarios = simulate_scenarios(model, config.n_scenarios, config.seed, max_workers=config.max_workers)
    report = assess(scenarios, config)
    logger.info("forecast %s/%s: VaR=%.4f CVaR=%.4f", report.family, report.mode, report.var, report.cvar)
    return report


def compare_copulas(
    data: ReturnTable | ArrayLike,
    config: RunConfig,
    *,
    tickers: Sequence[str] | None = None,
    families: Sequence[GeneratorFamily | str] = tuple(GeneratorFamily),
    modes: Sequence[str] = ("ac", "hac"),
) -> list[ComparisonRow]:
    """Forecast under every family and copula mode on shared stage 1-2 fits.

    ``seconds`` covers stages 3-9 of each run.
    """

    r, names = return_matrix(data, tickers)
    if r.shape[0] < MIN_FORECAST_OBS:
        raise DataError(f"a forecast needs at least {MIN_FORECAST_OBS} returns, got {r.shape[0]}")
    assets, uniforms = fit_assets(r, config, tickers=names)
    rows = []
    for family in families:
        family = GeneratorFamily.parse(family)
        for mode in modes:
            run_config = config.model_copy(update={"family": family.value, "copula_mode": mode})
            started = time.perf_counter()
            copula = estimate_copula(uniforms, family, mode)
            model = RiskModel(family, mode, tuple(assets), copula)
            scenarios = simulate_scenarios(
                model, config.n_scenarios, config.seed, max_workers=config.max_workers
            )
            report = assess(scenarios, run_config)
            rows.append(ComparisonRow(family.value, mode, report.var, report.cvar, time.perf_counter() - started))
    return rows


def risk_model_to_payload(model: RiskModel) -> RiskModelPayload:
    return RiskModelPayload(
        family=model.family.value,
        mode=model.mode,
        assets=[
            AssetModelPayload(
                ticker=asset.ticker,
                fit=asset.summary,
                mu_next=asset.mu_next,
                sigma_next=asset.sigma_next,
                margin=margin_to_payload(asset.margin),
            )
            for asset in model.assets
        ],
        copula=model_to_payload(model.copula) if model.copula is not None else None,
    )


def _params_from_summary(summary: FitSummaryPayload) -> ArmaAparchParams:
    spec = ArmaAparchSpec(*summary.spec)
    try:
        vector = [summary.params[name] for name in spec.parameter_names]
    except KeyError as exc:
        raise DataError(f"{summary.ticker}: fit payload lacks parameter {exc.args[0]}") from exc
    return ArmaAparchParams.from_vector(spec, vector)


def risk_model_from_payload(payload: RiskModelPayload) -> RiskModel:
    assets = tuple(
        AssetModel(
            ticker=item.ticker,
            params=_params_from_summary(item.fit),
            mu_next=item.mu_next,
            sigma_next=item.sigma_next,
            margin=margin_from_payload(item.margin),
            summary=item.fit,
        )
        for item in payload.assets
    )
    copula = model_from_payload(payload.copula) if payload.copula is not None else None
    if copula is None and len(assets) > 1:
        raise DataError("a multi-asset model bundle needs a copula")
    if copula is not None and copula.dimension != len(assets):
        raise DataError(f"copula has {copula.dimension} leaves for {len(assets)} assets")
    return RiskModel(GeneratorFamily.parse(payload.family), payload.mode, assets, copula)
