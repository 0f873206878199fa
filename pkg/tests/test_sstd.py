"""Tests for the standardized skewed Student-t law."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate, stats

from archimedean import streams
from errors import DomainError
from volatility import power_moment, sstd_cdf, sstd_density, sstd_quantile, sstd_random

LAWS = [(1.0, 8.0), (0.85, 5.0), (1.3, 12.0), (0.9, math.inf)]


def _moment(k: int, skew: float, shape: float) -> float:
    value, _ = integrate.quad(lambda z: z**k * sstd_density(z, skew, shape), -np.inf, np.inf, limit=200)
    return value


@pytest.mark.parametrize(("skew", "shape"), LAWS)
def test_density_is_standardized(skew: float, shape: float):
    assert _moment(0, skew, shape) == pytest.approx(1.0, abs=1e-7)
    assert _moment(1, skew, shape) == pytest.approx(0.0, abs=1e-7)
    assert _moment(2, skew, shape) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize(("skew", "shape"), LAWS)
def test_quantile_inverts_cdf(skew: float, shape: float):
    u = np.array([1e-6, 0.01, 0.2, 0.5, 0.77, 0.99, 1.0 - 1e-6])
    np.testing.assert_allclose(sstd_cdf(sstd_quantile(u, skew, shape), skew, shape), u, rtol=1e-9)


@pytest.mark.parametrize(("skew", "shape"), LAWS)
def test_cdf_derivative_is_density(skew: float, shape: float):
    for z in (-2.0, -0.3, 0.4, 1.7):
        h = 1e-5
        numeric = (sstd_cdf(z + h, skew, shape) - sstd_cdf(z - h, skew, shape)) / (2.0 * h)
        assert sstd_density(z, skew, shape) == pytest.approx(numeric, rel=1e-6)


def test_symmetric_gaussian_limit_is_standard_normal():
    z = np.linspace(-3.0, 3.0, 13)
    np.testing.assert_allclose(sstd_cdf(z, 1.0, math.inf), stats.norm.cdf(z), atol=1e-14)


def test_symmetric_case_is_a_unit_variance_t():
    scale = math.sqrt(6.0 / 8.0)
    z = np.linspace(-4.0, 4.0, 9)
    np.testing.assert_allclose(sstd_density(z, 1.0, 8.0), stats.t.pdf(z / scale, 8.0) / scale, rtol=1e-12)


def test_skew_below_one_stretches_the_left_tail():
    assert sstd_quantile(0.01, 0.8, 6.0) < sstd_quantile(0.01, 1.0, 6.0)
    assert sstd_quantile(0.99, 0.8, 6.0) < sstd_quantile(0.99, 1.0, 6.0)
    assert sstd_quantile(0.01, 0.8, 6.0) == pytest.approx(-sstd_quantile(0.99, 1.25, 6.0), rel=1e-10)


@pytest.mark.parametrize(("skew", "shape"), LAWS)
def test_random_draws_are_standardized(skew: float, shape: float):
    draws = sstd_random(200_000, skew, shape, streams.substream(1, 7))
    assert draws.mean() == pytest.approx(0.0, abs=0.02)
    assert draws.var() == pytest.approx(1.0, abs=0.05)


@pytest.mark.parametrize(("skew", "shape"), LAWS)
def test_power_moment_matches_direct_quadrature(skew: float, shape: float):
    assert power_moment(2.0, 0.0, skew, shape) == pytest.approx(1.0, rel=1e-7)
    direct, _ = integrate.quad(
        lambda z: (abs(z) + 0.3 * z) ** 1.4 * sstd_density(z, skew, shape), -np.inf, np.inf, limit=200
    )
    assert power_moment(1.4, -0.3, skew, shape) == pytest.approx(direct, rel=1e-5)


@pytest.mark.parametrize(("skew", "shape"), [(0.0, 5.0), (-1.0, 5.0), (1.0, 2.0), (1.0, 1.5)])
def test_invalid_parameters_are_rejected(skew: float, shape: float):
    with pytest.raises(DomainError):
        sstd_density(0.0, skew, shape)


def test_quantile_levels_must_be_open_unit_interval():
    with pytest.raises(DomainError):
        sstd_quantile([0.0, 0.5], 1.0, 8.0)
