"""Rolling VaR back-test with unconditional and conditional coverage tests."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special, stats

from archimedean import streams
from config import RunConfig
from errors import DataError, DomainError, RiskEngineError
from prices import ReturnTable
from schemas import BacktestDay, BacktestPayload
from volatility import ArmaAparchParams

from .pipeline import (
    RiskModel,
    assess,
    build_risk_model,
    refresh_risk_model,
    return_matrix,
    simulate_scenarios,
)

logger = logging.getLogger(__name__)

MIN_EVALUATION_DAYS = 100


def chi_square_sf(x: float, k: int) -> float:
    """Upper tail probability of a chi-square variable with ``k`` degrees of freedom."""

    if x < 0.0:
        raise DomainError(f"chi-square statistic must be >= 0, got {x}")
    return float(stats.chi2.sf(x, k))


def _binomial_loglik(x: int | float, n: int | float, p: float) -> float:
    # xlogy gives 0 * log(0) = 0
    return float(special.xlogy(n - x, 1.0 - p) + special.xlogy(x, p))


def kupiec_uc(x: int, n: int, p: float) -> tuple[float, float]:
    """Likelihood-ratio test that the exceedance rate ``x / n`` equals ``p``."""

    if not (0 <= x <= n) or n < 1:
        raise DomainError(f"need 0 <= x <= n and n >= 1, got x={x}, n={n}")
    if not (0.0 < p < 1.0):
        raise DomainError(f"p must lie in (0, 1), got {p}")
    stat = -2.0 * _binomial_loglik(x, n, p) + 2.0 * _binomial_loglik(x, n, x / n)
    stat = max(stat, 0.0)
    return stat, chi_square_sf(stat, 1)


def transition_counts(hits: ArrayLike) -> tuple[int, int, int, int]:
    """``(n00, n01, n10, n11)`` of consecutive hit pairs."""

    h = np.asarray(hits, dtype=int)
    prev, curr = h[:-1], h[1:]
    return (
        int(np.sum((prev == 0) & (curr == 0))),
        int(np.sum((prev == 0) & (curr == 1))),
        int(np.sum((prev == 1) & (curr == 0))),
        int(np.sum((prev == 1) & (curr == 1))),
    )


def _ratio(num: int, den: int) -> float:
    return num / den if den > 0 else 0.0


def christoffersen_tests(hits: ArrayLike, p: float) -> tuple[float, float, float, float]:
    """First-order Markov independence test and the joint conditional coverage test.

    Returns ``(ind_stat, ind_pvalue, cc_stat, cc_pvalue)`` where ``cc_stat`` is
    the Kupiec statistic plus the independence statistic.
    """

    h = np.asarray(hits)
    if h.ndim != 1 or h.size < 2:
        raise DomainError(f"the independence test needs at least 2 hits, got {h.size}")
    if not np.all((h == 0) | (h == 1)):
        raise DomainError("hits must be 0 or 1")
    n00, n01, n10, n11 = transition_counts(h)
    pi01 = _ratio(n01, n00 + n01)
    pi11 = _ratio(n11, n10 + n11)
    pi = _ratio(n01 + n11, n00 + n01 + n10 + n11)
    restricted = special.xlogy(n00 + n10, 1.0 - pi) + special.xlogy(n01 + n11, pi)
    markov = (
        special.xlogy(n00, 1.0 - pi01)
        + special.xlogy(n01, pi01)
        + special.xlogy(n10, 1.0 - pi11)
        + special.xlogy(n11, pi11)
    )
    ind_stat = max(-2.0 * float(restricted - markov), 0.0)
    uc_stat, _ = kupiec_uc(int(h.sum()), int(h.size), p)
    cc_stat = uc_stat + ind_stat
    return ind_stat, chi_square_sf(ind_stat, 1), cc_stat, chi_square_sf(cc_stat, 2)


@dataclass(frozen=True)
class CoverageTests:
    n: int
    x: int
    rate: float
    uc_stat: float
    uc_pvalue: float
    ind_stat: float
    ind_pvalue: float
    cc_stat: float
    cc_pvalue: float


def coverage_tests(hits: ArrayLike, p: float) -> CoverageTests:
    h = np.asarray(hits, dtype=int)
    n, x = int(h.size), int(h.sum())
    uc_stat, uc_pvalue = kupiec_uc(x, n, p)
    ind_stat, ind_pvalue, cc_stat, cc_pvalue = christoffersen_tests(h, p)
    return CoverageTests(n, x, x / n, uc_stat, uc_pvalue, ind_stat, ind_pvalue, cc_stat, cc_pvalue)


@dataclass(frozen=True)
class BacktestResult:
    """Per-day forecasts over the evaluation span; skipped days are masked out."""

    alpha: float
    dates: tuple[str, ...]
    var_forecasts: NDArray[np.float64] = field(repr=False)
    realized: NDArray[np.float64] = field(repr=False)
    mask: NDArray[np.bool_] = field(repr=False)
    tests: CoverageTests

    @property
    def hits(self) -> NDArray[np.int64]:
        kept = self.mask
        return (-self.realized[kept] > self.var_forecasts[kept]).astype(np.int64)

    @property
    def skipped_days(self) -> int:
        return int((~self.mask).sum())

    def to_payload(self) -> BacktestPayload:
        days = []
        for date, var, realized, kept in zip(self.dates, self.var_forecasts, self.realized, self.mask):
            if kept:
                hit = int(-realized > var)
                days.append(BacktestDay(date=date, forecast_var=float(var), realized_return=float(realized), hit=hit))
            else:
                days.append(BacktestDay(date=date, forecast_var=None, realized_return=None, hit=None))
        t = self.tests
        return BacktestPayload(
            alpha=self.alpha,
            n=t.n,
            x=t.x,
            exceedance_rate=t.rate,
            uc_stat=t.uc_stat,
            uc_pvalue=t.uc_pvalue,
            ind_stat=t.ind_stat,
            ind_pvalue=t.ind_pvalue,
            cc_stat=t.cc_stat,
            cc_pvalue=t.cc_pvalue,
            skipped_days=self.skipped_days,
            days=days,
        )


def evaluation_span(n_obs: int, config: RunConfig) -> range:
    if n_obs < config.window + MIN_EVALUATION_DAYS:
        raise DataError(
            f"a back-test with window {config.window} needs at least "
            f"{config.window + MIN_EVALUATION_DAYS} returns, got {n_obs}"
        )
    start = config.window
    if config.backtest_days is not None:
        start = max(start, n_obs - config.backtest_days)
    return range(start, n_obs)


def rolling_backtest(
    data: ReturnTable | ArrayLike,
    config: RunConfig,
    *,
    tickers: Sequence[str] | None = None,
    dates: Sequence[str] | None = None,
) -> BacktestResult:
    """Forecast each day's portfolio VaR from the trailing window and score the hits.

    Volatility models, margins and copula are refitted every
    ``refit_cadence`` days, warm-started from the previous parameters; days in
    between re-filter the window at fixed parameters. A day whose forecast
    fails is logged, skipped and masked.
    """

    r, names = return_matrix(data, tickers)
    if dates is None:
        dates = data.dates if isinstance(data, ReturnTable) else [str(t) for t in range(r.shape[0])]
    if len(dates) != r.shape[0]:
        raise DataError(f"{len(dates)} dates for {r.shape[0]} return rows")
    span = evaluation_span(r.shape[0], config)

    var_forecasts = np.full(len(span), np.nan)
    realized = np.full(len(span), np.nan)
    mask = np.zeros(len(span), dtype=bool)
    model: RiskModel | None = None
    warm: list[ArmaAparchParams | None] | None = None
    since_refit = 0
    for k, t in enumerate(span):
        window = r[t - config.window : t]
        try:
            if model is None or since_refit >= config.refit_cadence:
                model = build_risk_model(window, config, tickers=names, warm=warm)
                warm = [asset.params for asset in model.assets]
                since_refit = 0
            else:
                model = refresh_risk_model(model, window)
            since_refit += 1
            seed = streams.derived_seed(config.seed, streams.BACKTEST_DAY, t)
            scenarios = simulate_scenarios(model, config.n_scenarios, seed, max_workers=config.max_workers)
            report = assess(scenarios, config)
        except RiskEngineError as exc:
            logger.warning("back-test day %s skipped: %s", dates[t], exc)
            logger.debug("back-test day %s failure detail", dates[t], exc_info=True)
            continue
        var_forecasts[k] = report.var
        realized[k] = float(r[t] @ report.weights)
        mask[k] = True
        if (k + 1) % 50 == 0:
            logger.info("back-test: %d/%d days", k + 1, len(span))

    if mask.sum() < 2:
        raise DataError(f"only {int(mask.sum())} back-test day(s) produced a forecast")
    hits = (-realized[mask] > var_forecasts[mask]).astype(int)
    tests = coverage_tests(hits, 1.0 - config.alpha)
    logger.info(
        "back-test: n=%d x=%d rate=%.4f uc_p=%.4f cc_p=%.4f skipped=%d",
        tests.n,
        tests.x,
        tests.rate,
        tests.uc_pvalue,
        tests.cc_pvalue,
        int((~mask).sum()),
    )
    return BacktestResult(
        alpha=config.alpha,
        dates=tuple(dates[t] for t in span),
        var_forecasts=var_forecasts,
        realized=realized,
        mask=mask,
        tests=tests,
    )
