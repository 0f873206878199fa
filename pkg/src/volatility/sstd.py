"""Standardized skewed Student-t innovations.

Fernandez-Steel skewing of a unit-variance Student-t, shifted and rescaled to
mean 0 and variance 1 (the ``sstd`` law of fGarch). ``shape = inf`` gives the
skew-normal limit.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate, special, stats

from errors import DomainError


def _check(skew: float, shape: float) -> None:
    if not (np.isfinite(skew) and skew > 0.0):
        raise DomainError(f"skew must be > 0, got {skew}")
    if not (shape > 2.0):
        raise DomainError(f"shape must be > 2, got {shape}")


@lru_cache(maxsize=4096)
def _constants(skew: float, shape: float) -> tuple[float, float, float, float]:
    """``(m1, mu, sigma, t_scale)`` of the standardization."""

    if math.isinf(shape):
        m1 = math.sqrt(2.0 / math.pi)
        t_scale = 1.0
    else:
        m1 = 2.0 * math.sqrt(shape - 2.0) / ((shape - 1.0) * special.beta(0.5, shape / 2.0))
        t_scale = math.sqrt(shape / (shape - 2.0))
    mu = m1 * (skew - 1.0 / skew)
    sigma = math.sqrt((1.0 - m1 * m1) * (skew * skew + 1.0 / skew**2) + 2.0 * m1 * m1 - 1.0)
    return m1, mu, sigma, t_scale


def _unit_t(shape: float):
    return stats.norm if math.isinf(shape) else stats.t(shape)


@lru_cache(maxsize=4096)
def _log_unit_t_norm(shape: float) -> float:
    """Log normalizing constant of the unit-variance Student-t density."""

    if math.isinf(shape):
        return -0.5 * math.log(2.0 * math.pi)
    return float(
        special.gammaln((shape + 1.0) / 2.0)
        - special.gammaln(shape / 2.0)
        - 0.5 * math.log(math.pi * (shape - 2.0))
    )


def _log_unit_t(y: NDArray[np.float64], shape: float) -> NDArray[np.float64]:
    if math.isinf(shape):
        return _log_unit_t_norm(shape) - 0.5 * y * y
    return _log_unit_t_norm(shape) - (shape + 1.0) / 2.0 * np.log1p(y * y / (shape - 2.0))


def sstd_logpdf(z: ArrayLike, skew: float, shape: float) -> NDArray[np.float64] | float:
    _check(skew, shape)
    _, mu, sigma, _ = _constants(float(skew), float(shape))
    x = np.asarray(z, dtype=float)
    y = x * sigma + mu
    xi = np.where(y >= 0.0, skew, 1.0 / skew)
    g = 2.0 / (skew + 1.0 / skew)
    out = math.log(g) + _log_unit_t(y / xi, shape) + math.log(sigma)
    return float(out) if x.ndim == 0 else out


def sstd_density(z: ArrayLike, skew: float, shape: float) -> NDArray[np.float64] | float:
    out = np.exp(sstd_logpdf(z, skew, shape))
    return float(out) if np.ndim(out) == 0 else out


def sstd_cdf(z: ArrayLike, skew: float, shape: float) -> NDArray[np.float64] | float:
    _check(skew, shape)
    _, mu, sigma, t_scale = _constants(float(skew), float(shape))
    x = np.asarray(z, dtype=float)
    y = x * sigma + mu
    g = 2.0 / (skew + 1.0 / skew)
    base = _unit_t(shape)
    upper = 1.0 - g * skew * base.cdf(-y / skew * t_scale)
    lower = g / skew * base.cdf(y * skew * t_scale)
    out = np.where(y >= 0.0, upper, lower)
    return float(out) if x.ndim == 0 else out


def sstd_quantile(u: ArrayLike, skew: float, shape: float) -> NDArray[np.float64] | float:
    _check(skew, shape)
    p = np.asarray(u, dtype=float)
    if np.any(~((p > 0.0) & (p < 1.0))):
        raise DomainError("quantile levels must lie in (0, 1)")
    _, mu, sigma, t_scale = _constants(float(skew), float(shape))
    base = _unit_t(shape)
    split = 1.0 / (1.0 + skew * skew)
    ratio = 1.0 + skew * skew
    with np.errstate(invalid="ignore"):
        lower = base.ppf(np.minimum(p * ratio / 2.0, 1.0)) / t_scale / skew
        upper = -skew * base.ppf(np.minimum((1.0 - p) * ratio / (2.0 * skew * skew), 1.0)) / t_scale
    y = np.where(p < split, lower, upper)
    out = (y - mu) / sigma
    return float(out) if p.ndim == 0 else out


def sstd_random(
    size: int | tuple[int, ...], skew: float, shape: float, rng: np.random.Generator
) -> NDArray[np.float64]:
    """Draws by inverse transform of uniforms from ``rng``."""

    u = rng.uniform(size=size)
    u = np.clip(u, np.finfo(float).tiny, np.nextafter(1.0, 0.0))
    return np.asarray(sstd_quantile(u, skew, shape), dtype=float)


@lru_cache(maxsize=4096)
def power_moment(delta: float, gamma: float, skew: float, shape: float) -> float:
    """``E[(|Z| - gamma Z) ** delta]`` for a standardized skew-t ``Z``."""

    _check(skew, shape)
    _, mu, sigma, _ = _constants(float(skew), float(shape))
    log_front = math.log(2.0 / (skew + 1.0 / skew)) + math.log(sigma) + _log_unit_t_norm(shape)
    gaussian = math.isinf(shape)

    def integrand(z: float) -> float:
        y = z * sigma + mu
        y = y / skew if y >= 0.0 else y * skew
        if gaussian:
            log_f = log_front - 0.5 * y * y
        else:
            log_f = log_front - (shape + 1.0) / 2.0 * math.log1p(y * y / (shape - 2.0))
        return (abs(z) - gamma * z) ** delta * math.exp(log_f)

    # kinks at z = 0 (absolute value) and at the skewing point
    lo, hi = sorted((0.0, -mu / sigma))
    pieces = [(-np.inf, lo), (lo, hi), (hi, np.inf)]
    total = 0.0
    for a, b in pieces:
        if a == b:
            continue
        value, _ = integrate.quad(integrand, a, b, epsabs=1e-10, epsrel=1e-10, limit=200)
        total += value
    return total
