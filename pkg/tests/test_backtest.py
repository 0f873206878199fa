"""Tests for the coverage tests and the rolling VaR back-test."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from config import RunConfig
from errors import DataError, DomainError
from risk import (
    BacktestResult,
    chi_square_sf,
    christoffersen_tests,
    coverage_tests,
    kupiec_uc,
    rolling_backtest,
    transition_counts,
)
from risk.backtest import evaluation_span
from volatility import garch, simulate

HITS = [0, 0, 1, 0, 0, 1, 0, 0, 0, 0]


def test_chi_square_critical_values():
    assert chi_square_sf(3.841, 1) == pytest.approx(0.05, abs=1e-4)
    assert chi_square_sf(5.991, 2) == pytest.approx(0.05, abs=1e-4)
    assert chi_square_sf(0.0, 1) == 1.0
    with pytest.raises(DomainError):
        chi_square_sf(-1.0, 1)


def test_kupiec_without_exceedances():
    stat, pvalue = kupiec_uc(0, 1000, 0.05)
    assert stat == pytest.approx(-2000.0 * math.log(0.95))
    assert stat == pytest.approx(102.6, abs=0.05)
    assert pvalue < 1e-20


def test_kupiec_at_the_nominal_rate_is_zero():
    stat, pvalue = kupiec_uc(50, 1000, 0.05)
    assert stat == pytest.approx(0.0, abs=1e-9)
    assert pvalue == pytest.approx(1.0)


@pytest.mark.parametrize(("x", "n", "p"), [(-1, 10, 0.05), (11, 10, 0.05), (0, 0, 0.05), (1, 10, 0.0)])
def test_kupiec_rejects_invalid_counts(x: int, n: int, p: float):
    with pytest.raises(DomainError):
        kupiec_uc(x, n, p)


def test_transition_counts():
    assert transition_counts(HITS) == (5, 2, 2, 0)
    assert transition_counts([1, 1, 1]) == (0, 0, 0, 2)


def test_independence_statistic_matches_markov_likelihood_ratio():
    ind_stat, ind_pvalue, cc_stat, cc_pvalue = christoffersen_tests(HITS, 0.05)
    pi01, pi = 2.0 / 7.0, 2.0 / 9.0
    restricted = 7.0 * math.log(1.0 - pi) + 2.0 * math.log(pi)
    markov = 5.0 * math.log(1.0 - pi01) + 2.0 * math.log(pi01)
    assert ind_stat == pytest.approx(-2.0 * (restricted - markov))
    assert ind_pvalue == pytest.approx(chi_square_sf(ind_stat, 1))
    uc_stat, _ = kupiec_uc(2, 10, 0.05)
    assert cc_stat == pytest.approx(uc_stat + ind_stat)
    assert cc_pvalue == pytest.approx(chi_square_sf(cc_stat, 2))


def test_clustered_hits_fail_independence():
    clustered = [0] * 90 + [1] * 10
    spread = ([0] * 9 + [1]) * 10
    assert christoffersen_tests(clustered, 0.1)[0] > christoffersen_tests(spread, 0.1)[0]
    assert christoffersen_tests(clustered, 0.1)[1] < 0.01


def test_alternating_hits_fail_independence():
    alternating = [0, 1] * 50
    ind_stat, ind_pvalue, _, _ = christoffersen_tests(alternating, 0.5)
    # every 0 is followed by a 1 and every 1 by a 0
    assert transition_counts(alternating) == (0, 50, 49, 0)
    assert ind_stat == pytest.approx(-2.0 * (49.0 * math.log(49.0 / 99.0) + 50.0 * math.log(50.0 / 99.0)))
    assert ind_pvalue < 1e-20
    assert kupiec_uc(50, 100, 0.5)[0] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.slow
def test_rejection_rates_under_bernoulli_hits_match_the_nominal_level():
    n, p, reps = 500, 0.05, 2000
    rng = np.random.default_rng(2024)
    hits = (rng.uniform(size=(reps, n)) < p).astype(int)
    uc_pvalues = np.array([kupiec_uc(int(row.sum()), n, p)[1] for row in hits])
    cc_pvalues = np.array([christoffersen_tests(row, p)[3] for row in hits])

    # the Kupiec test is discrete, so compare with its exact size under Binomial(n, p)
    counts = np.arange(n + 1)
    rejected = np.array([kupiec_uc(int(x), n, p)[1] < 0.05 for x in counts])
    exact_size = float(stats.binom.pmf(counts[rejected], n, p).sum())
    assert 0.03 <= exact_size <= 0.08
    uc_rate = float(np.mean(uc_pvalues < 0.05))
    assert abs(uc_rate - exact_size) <= 4.0 * math.sqrt(exact_size * (1.0 - exact_size) / reps)

    cc_rate = float(np.mean(cc_pvalues < 0.05))
    assert 0.005 <= cc_rate <= 0.12
    assert float(np.mean(uc_pvalues < 0.5)) > 0.3


def test_christoffersen_input_checks():
    with pytest.raises(DomainError):
        christoffersen_tests([1], 0.05)
    with pytest.raises(DomainError):
        christoffersen_tests([0, 2, 1], 0.05)


def test_coverage_tests_bundle():
    tests = coverage_tests(HITS, 0.05)
    assert (tests.n, tests.x) == (10, 2)
    assert tests.rate == pytest.approx(0.2)
    assert tests.uc_stat == pytest.approx(kupiec_uc(2, 10, 0.05)[0])
    assert tests.cc_stat == pytest.approx(tests.uc_stat + tests.ind_stat)


def test_masked_days_stay_in_the_payload():
    mask = np.array([True, False, True, True])
    result = BacktestResult(
        alpha=0.95,
        dates=("d1", "d2", "d3", "d4"),
        var_forecasts=np.array([1.0, np.nan, 1.0, 2.0]),
        realized=np.array([-1.5, np.nan, 0.2, -1.0]),
        mask=mask,
        tests=coverage_tests([1, 0, 0], 0.05),
    )
    np.testing.assert_array_equal(result.hits, [1, 0, 0])
    assert result.skipped_days == 1
    payload = result.to_payload()
    assert [day.hit for day in payload.days] == [1, None, 0, 0]
    assert payload.days[1].forecast_var is None
    assert payload.skipped_days == 1
    assert payload.n == 3


def test_evaluation_span_honors_window_and_day_limit():
    config = RunConfig(window=300)
    assert evaluation_span(450, config) == range(300, 450)
    assert evaluation_span(450, config.model_copy(update={"backtest_days": 20})) == range(430, 450)
    assert evaluation_span(450, config.model_copy(update={"backtest_days": 5000})) == range(300, 450)
    with pytest.raises(DataError, match="at least 400"):
        evaluation_span(399, config)


@pytest.mark.integration
@pytest.mark.slow
def test_rolling_backtest_on_simulated_returns():
    params = garch(0.05, [0.08], [0.9], mu=0.02, shape=7.0)
    returns = np.column_stack([simulate(params, 420, seed=1), simulate(params, 420, seed=2)])
    config = RunConfig(
        spec=(0, 0, 1, 1),
        window=300,
        backtest_days=6,
        refit_cadence=3,
        n_scenarios=2000,
        n_starts=1,
        seed=11,
    )
    result = rolling_backtest(returns, config, tickers=["A", "B"])
    assert result.dates == tuple(str(t) for t in range(414, 420))
    assert result.tests.n + result.skipped_days == 6
    kept = result.mask
    assert np.all(result.var_forecasts[kept] > 0.0)
    assert set(result.hits.tolist()) <= {0, 1}
    payload = result.to_payload()
    assert len(payload.days) == 6
    assert payload.alpha == 0.95
