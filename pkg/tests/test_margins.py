"""Tests for GPD tails and semi-parametric residual margins."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from errors import DataError, DomainError
from margins import GpdTail, fit_gpd, fit_margin, margin_cdf, margin_from_payload, margin_quantile, margin_to_payload
from margins.gpd import gpd_loglik, gpd_pwm, gpd_score, gpd_sf


@pytest.fixture(name="excesses")
def fixture_excesses() -> np.ndarray:
    return stats.genpareto.rvs(c=0.2, scale=0.5, size=3000, random_state=np.random.default_rng(8))


@pytest.fixture(name="residuals")
def fixture_residuals() -> np.ndarray:
    rng = np.random.default_rng(21)
    draws = rng.standard_t(5, size=2000)
    return draws / math.sqrt(5.0 / 3.0)


def test_gpd_fit_recovers_parameters(excesses: np.ndarray):
    tail = fit_gpd(excesses, threshold=1.5, n_total=30_000)
    assert tail.method == "mle"
    assert tail.xi == pytest.approx(0.2, abs=0.07)
    assert tail.beta == pytest.approx(0.5, rel=0.08)
    assert tail.exceed_prob == pytest.approx(0.1)


def test_gpd_fit_is_a_stationary_point(excesses: np.ndarray):
    tail = fit_gpd(excesses, threshold=0.0, n_total=excesses.size)
    score = gpd_score(excesses, tail.xi, tail.beta) / excesses.size
    np.testing.assert_allclose(score, 0.0, atol=1e-6)


@pytest.mark.parametrize("xi", [-0.3, 1e-8, 0.25, 0.7])
def test_score_matches_numeric_gradient(excesses: np.ndarray, xi: float):
    y = excesses[:200] if xi >= 0 else np.minimum(excesses[:200], 1.0)
    beta, h = 0.6, 1e-6
    numeric = np.array(
        [
            (gpd_loglik(y, xi + h, beta) - gpd_loglik(y, xi - h, beta)) / (2.0 * h),
            (gpd_loglik(y, xi, beta + h) - gpd_loglik(y, xi, beta - h)) / (2.0 * h),
        ]
    )
    np.testing.assert_allclose(gpd_score(y, xi, beta), numeric, rtol=1e-4, atol=1e-4)


def test_probability_weighted_moments_are_close(excesses: np.ndarray):
    xi, beta = gpd_pwm(excesses)
    assert xi == pytest.approx(0.2, abs=0.1)
    assert beta == pytest.approx(0.5, rel=0.15)


def test_exponential_limit_of_survival():
    y = np.array([0.0, 0.5, 2.0])
    np.testing.assert_allclose(gpd_sf(y, 0.0, 2.0), np.exp(-y / 2.0), rtol=1e-14)
    np.testing.assert_allclose(gpd_sf(y, 0.5, 2.0), (1.0 + 0.5 * y / 2.0) ** -2.0, rtol=1e-12)


def test_bounded_tail_endpoint():
    assert GpdTail(-0.25, 1.0, 2.0, 40, 400, "upper").endpoint == pytest.approx(6.0)
    assert GpdTail(-0.25, 1.0, -2.0, 40, 400, "lower").endpoint == pytest.approx(-6.0)
    assert GpdTail(0.1, 1.0, 2.0, 40, 400, "upper").endpoint == math.inf


def test_gpd_needs_enough_valid_exceedances(excesses: np.ndarray):
    with pytest.raises(DataError, match="exceedances"):
        fit_gpd(excesses[:29], 0.0, 100)
    with pytest.raises(DataError):
        fit_gpd(np.concatenate([excesses[:40], [-0.1]]), 0.0, 100)
    with pytest.raises(DomainError):
        GpdTail(0.1, 0.0, 0.0, 40, 400)


def test_margin_tail_probabilities_are_exact_fractions(residuals: np.ndarray):
    margin = fit_margin(residuals, tail_fraction=0.1)
    assert margin.lower.n_exceed == 200
    assert margin.upper.n_exceed == 200
    assert margin.lower_prob == margin.upper_prob == 0.1
    assert np.sum(residuals < margin.lower.threshold) == 200
    assert np.sum(residuals > margin.upper.threshold) == 200


def test_margin_cdf_is_continuous_and_increasing(residuals: np.ndarray):
    margin = fit_margin(residuals, tail_fraction=0.1)
    for threshold, level in ((margin.lower.threshold, 0.1), (margin.upper.threshold, 0.9)):
        left = margin_cdf(margin, threshold - 1e-9)
        right = margin_cdf(margin, threshold + 1e-9)
        assert left == pytest.approx(level, abs=1e-7)
        assert right == pytest.approx(level, abs=1e-7)
    z = np.linspace(-8.0, 8.0, 2001)
    values = margin_cdf(margin, z)
    assert np.all(np.diff(values) >= 0.0)
    assert np.all((values > 0.0) & (values < 1.0))


def test_margin_quantile_inverts_cdf(residuals: np.ndarray):
    margin = fit_margin(residuals, tail_fraction=0.1)
    u = np.array([1e-5, 0.01, 0.05, 0.1, 0.3, 0.5, 0.8, 0.9, 0.97, 0.9999])
    np.testing.assert_allclose(margin_cdf(margin, margin_quantile(margin, u)), u, rtol=1e-8, atol=1e-10)
    assert margin.quantile(0.5) == pytest.approx(np.median(residuals), abs=0.1)


def test_probability_integral_transform_is_uniform(residuals: np.ndarray):
    margin = fit_margin(residuals, 0.10)
    assert stats.kstest(margin_cdf(margin, residuals), "uniform").pvalue > 0.05
    fresh = np.random.default_rng(5).standard_t(5, size=5000) / math.sqrt(5.0 / 3.0)
    assert stats.kstest(margin_cdf(margin, fresh), "uniform").pvalue > 1e-3


@pytest.mark.slow
def test_flat_kernel_stretch_keeps_the_quantile_inverse():
    rng = np.random.default_rng(14)
    # two clusters far apart relative to the bandwidth leave the kernel CDF flat around zero
    residuals = np.concatenate([rng.normal(-1.0, 0.05, 50_000), rng.normal(1.0, 0.05, 50_000)])
    margin = fit_margin(residuals, 0.10)
    assert np.all(np.diff(margin.grid_u) > 0.0)
    for z in (-0.1, 0.0, 0.1):
        assert margin_quantile(margin, margin_cdf(margin, z)) == pytest.approx(z, abs=1e-4)


def test_margin_survives_payload_round_trip(residuals: np.ndarray):
    margin = fit_margin(residuals, tail_fraction=0.08)
    restored = margin_from_payload(margin_to_payload(margin))
    z = np.linspace(-6.0, 6.0, 101)
    np.testing.assert_allclose(margin_cdf(restored, z), margin_cdf(margin, z), rtol=1e-14)
    assert restored.tail_fraction == 0.08


def test_margin_input_checks(residuals: np.ndarray):
    with pytest.raises(DataError):
        fit_margin(residuals[:299])
    with pytest.raises(DomainError):
        fit_margin(residuals, tail_fraction=0.6)
    with pytest.raises(DomainError):
        margin_quantile(fit_margin(residuals), [0.0])
