"""Tests for the nine-stage forecast pipeline."""

from __future__ import annotations

import numpy as np
import pytest

from archimedean import parse_structure, sample_hac
from config import RunConfig
from errors import EXIT_NUMERICAL, DataError, NumericalError, StageError
from risk import (
    STAGES,
    RiskModel,
    ScenarioMatrix,
    assess,
    build_risk_model,
    compare_copulas,
    pipeline_forecast,
    portfolio_returns,
    refresh_risk_model,
    risk_model_from_payload,
    risk_model_to_payload,
    simulate_scenarios,
    var_empirical,
)
from risk.pipeline import estimate_copula
from schemas import RiskModelPayload
from volatility import garch, simulate, sstd_quantile

TICKERS = ("AAA", "BBB", "CCC")
CONFIG = RunConfig(spec=(0, 0, 1, 1), n_scenarios=2000, n_starts=1, seed=5)


@pytest.fixture(name="returns", scope="module")
def fixture_returns() -> np.ndarray:
    params = garch(0.05, [0.08], [0.9], mu=0.02, shape=7.0)
    common = simulate(params, 600, seed=100)
    own = [simulate(params, 600, seed=101 + j) for j in range(3)]
    return np.column_stack([0.7 * common + 0.7 * own[j] for j in range(3)])


@pytest.fixture(name="model", scope="module")
def fixture_model(returns: np.ndarray) -> RiskModel:
    return build_risk_model(returns, CONFIG, tickers=TICKERS)


def test_stage_names():
    assert len(STAGES) == 9
    assert STAGES[0] == "fit_volatility"
    assert STAGES[-1] == "risk_measures"


def test_single_asset_has_no_copula():
    assert estimate_copula(np.random.default_rng(0).random((200, 1)), "gumbel", "hac") is None


def test_forecast_needs_enough_history():
    with pytest.raises(DataError, match="at least 500"):
        pipeline_forecast(np.zeros((100, 2)), CONFIG)


def test_infeasible_weights_surface_as_a_stage_error():
    scenarios = ScenarioMatrix(
        returns=np.random.default_rng(1).standard_normal((1000, 3)),
        tickers=TICKERS,
        seed=0,
        family="gumbel",
        mode="hac",
    )
    config = CONFIG.model_copy(update={"max_weight": 0.2})
    with pytest.raises(StageError) as info:
        assess(scenarios, config)
    assert info.value.stage == "optimize_weights"
    assert isinstance(info.value.__cause__, NumericalError)
    assert info.value.exit_code == EXIT_NUMERICAL


@pytest.mark.integration
def test_assess_reports_weights_and_tail(model: RiskModel):
    report = assess(simulate_scenarios(model, 2000, seed=3), CONFIG)
    assert report.weights.sum() == pytest.approx(1.0)
    assert report.cvar >= report.var
    assert report.n_scenarios == 2000
    payload = report.to_payload()
    assert list(payload.weights) == list(TICKERS)
    assert payload.structure == model.structure


@pytest.mark.integration
def test_fitted_model_has_a_nested_copula(model: RiskModel):
    assert model.tickers == TICKERS
    assert model.copula is not None
    assert model.copula.dimension == 3
    assert all(asset.sigma_next > 0.0 for asset in model.assets)
    assert all(theta >= 1.0 for theta in model.copula.theta_vector)


@pytest.mark.integration
def test_scenarios_are_deterministic_per_seed(model: RiskModel):
    first = simulate_scenarios(model, 3000, seed=9)
    again = simulate_scenarios(model, 3000, seed=9, max_workers=2)
    other = simulate_scenarios(model, 3000, seed=10)
    assert first.returns.shape == (3000, 3)
    np.testing.assert_array_equal(first.returns, again.returns)
    assert not np.array_equal(first.returns, other.returns)


@pytest.mark.integration
def test_model_bundle_round_trip_reproduces_scenarios(model: RiskModel):
    text = risk_model_to_payload(model).model_dump_json()
    restored = risk_model_from_payload(RiskModelPayload.model_validate_json(text))
    assert restored.structure == model.structure
    np.testing.assert_allclose(
        simulate_scenarios(restored, 1000, seed=2).returns,
        simulate_scenarios(model, 1000, seed=2).returns,
        rtol=1e-12,
    )


@pytest.mark.integration
def test_refresh_on_the_fitted_window_keeps_the_state(model: RiskModel, returns: np.ndarray):
    refreshed = refresh_risk_model(model, returns)
    for before, after in zip(model.assets, refreshed.assets):
        assert after.sigma_next == pytest.approx(before.sigma_next, rel=1e-8)
        assert after.mu_next == pytest.approx(before.mu_next, rel=1e-8, abs=1e-12)
    with pytest.raises(DataError):
        refresh_risk_model(model, returns[:, :2])


@pytest.mark.integration
@pytest.mark.slow
def test_pipeline_forecast_is_deterministic(returns: np.ndarray):
    first = pipeline_forecast(returns, CONFIG, tickers=TICKERS)
    second = pipeline_forecast(returns, CONFIG, tickers=TICKERS)
    assert first.var == second.var
    assert first.cvar == second.cvar
    np.testing.assert_array_equal(first.weights, second.weights)
    assert first.family == "gumbel"
    assert first.mode == "hac"


@pytest.mark.integration
@pytest.mark.slow
def test_compare_copulas_covers_each_family_and_mode(returns: np.ndarray):
    rows = compare_copulas(returns, CONFIG, tickers=TICKERS, families=("clayton", "frank"))
    assert [(row.family, row.mode) for row in rows] == [
        ("clayton", "ac"), ("clayton", "hac"), ("frank", "ac"), ("frank", "hac"),
    ]
    assert all(row.cvar >= row.var for row in rows)
    assert all(row.seconds >= 0.0 for row in rows)


def _garch_returns_from_uniforms(u: np.ndarray, omega: float, alpha: float, beta: float, mu: float):
    """GARCH(1,1) paths driven by Student-t innovations at copula uniforms; also the next-step scales."""

    z = sstd_quantile(u, 1.0, 8.0)
    variance = np.empty(u.shape[1])
    variance[:] = omega / (1.0 - alpha - beta)
    returns = np.empty(u.shape)
    for t in range(u.shape[0]):
        eps = np.sqrt(variance) * z[t]
        returns[t] = mu + eps
        variance = omega + alpha * eps**2 + beta * variance
    return returns, np.sqrt(variance)


@pytest.mark.integration
@pytest.mark.slow
def test_forecast_var_matches_the_data_generating_process():
    truth = parse_structure("((1 2)@3.0 3)@1.5", "gumbel")
    omega, alpha, beta, mu = 0.05, 0.08, 0.9, 0.02
    history, sigma_next = _garch_returns_from_uniforms(sample_hac(truth, 2000, seed=41), omega, alpha, beta, mu)
    config = CONFIG.model_copy(update={"n_scenarios": 20_000, "n_starts": 2})
    report = pipeline_forecast(history, config, tickers=TICKERS)

    z = sstd_quantile(sample_hac(truth, 200_000, seed=42), 1.0, 8.0)
    losses = -portfolio_returns(mu + sigma_next * z, report.weights)
    assert report.var == pytest.approx(var_empirical(losses, config.alpha), rel=0.10)
