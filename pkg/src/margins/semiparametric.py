"""Semi-parametric margins: GPD tails around a kernel-smoothed empirical body.

    G(z) = pL * sfL(uL - z)                   z < uL
         = kernel CDF rescaled to [pL, 1-pR]   uL <= z <= uR
         = 1 - pR * sfR(z - uR)               z > uR

``pL`` and ``pR`` are the exact fractions of observations strictly beyond each
threshold, so the pieces meet continuously.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special

from errors import DataError, DomainError
from schemas import MarginPayload

from .gpd import GpdTail, fit_gpd

logger = logging.getLogger(__name__)

MIN_RESIDUALS = 300
GRID_POINTS = 512
CDF_FLOOR = 1e-12
# share of the interior mass spread linearly so the grid stays strictly increasing
MONOTONE_RAMP = 1e-9
_KERNEL_CHUNK = 64


@dataclass(frozen=True)
class SemiParametricMargin:
    lower: GpdTail
    upper: GpdTail
    grid_z: NDArray[np.float64] = field(repr=False)
    grid_u: NDArray[np.float64] = field(repr=False)
    tail_fraction: float = 0.10

    @property
    def lower_prob(self) -> float:
        return self.lower.exceed_prob

    @property
    def upper_prob(self) -> float:
        return self.upper.exceed_prob

    def cdf(self, z: ArrayLike) -> NDArray[np.float64] | float:
        return margin_cdf(self, z)

    def quantile(self, u: ArrayLike) -> NDArray[np.float64] | float:
        return margin_quantile(self, u)


def _silverman(x: NDArray[np.float64]) -> float:
    sd = float(np.std(x, ddof=1))
    q75, q25 = np.percentile(x, [75.0, 25.0])
    spread = min(sd, float(q75 - q25) / 1.34) if q75 > q25 else sd
    return 0.9 * spread * x.size ** (-0.2)


def _kernel_cdf(points: NDArray[np.float64], data: NDArray[np.float64], h: float) -> NDArray[np.float64]:
    out = np.empty(points.size)
    for start in range(0, points.size, _KERNEL_CHUNK):
        block = points[start : start + _KERNEL_CHUNK]
        out[start : start + _KERNEL_CHUNK] = special.ndtr((block[:, None] - data[None, :]) / h).mean(axis=1)
    return out


def fit_margin(residuals: ArrayLike, tail_fraction: float = 0.10) -> SemiParametricMargin:
    """Fit GPD tails beyond the ``tail_fraction`` quantiles and a smoothed interior.

    Thresholds sit halfway between consecutive order statistics so that
    exactly ``floor(tail_fraction * N)`` observations lie strictly beyond each.
    """

    x = np.sort(np.asarray(residuals, dtype=float))
    n = x.size
    if x.ndim != 1 or n < MIN_RESIDUALS:
        raise DataError(f"a margin needs at least {MIN_RESIDUALS} residuals, got {n}")
    if not np.all(np.isfinite(x)):
        raise DataError("residuals contain non-finite values")
    if not (0.0 < tail_fraction < 0.5):
        raise DomainError(f"tail_fraction must lie in (0, 0.5), got {tail_fraction}")

    k = int(math.floor(tail_fraction * n + 1e-9))
    u_low = 0.5 * (x[k - 1] + x[k])
    u_high = 0.5 * (x[n - k - 1] + x[n - k])
    if not u_low < u_high:
        raise DataError("tail thresholds collapse; residuals have too many ties")
    below = x[x < u_low]
    above = x[x > u_high]
    lower = fit_gpd(u_low - below, u_low, n, side="lower")
    upper = fit_gpd(above - u_high, u_high, n, side="upper")

    h = _silverman(x)
    if not h > 0.0:
        raise DataError("residuals have no spread")
    grid_z = np.linspace(u_low, u_high, GRID_POINTS)
    smooth = np.maximum.accumulate(_kernel_cdf(grid_z, x, h))
    p_low, p_high = lower.exceed_prob, upper.exceed_prob
    span = smooth[-1] - smooth[0]
    if not span > 0.0:
        raise DataError("kernel CDF is flat between the tail thresholds")
    shape = (1.0 - MONOTONE_RAMP) * (smooth - smooth[0]) / span + MONOTONE_RAMP * np.linspace(0.0, 1.0, GRID_POINTS)
    grid_u = p_low + (1.0 - p_low - p_high) * shape
    grid_u[0], grid_u[-1] = p_low, 1.0 - p_high
    logger.debug(
        "margin: uL=%.4f uR=%.4f xiL=%.4f xiR=%.4f h=%.4f", u_low, u_high, lower.xi, upper.xi, h
    )
    return SemiParametricMargin(lower, upper, grid_z, grid_u, tail_fraction)


def margin_cdf(margin: SemiParametricMargin, z: ArrayLike) -> NDArray[np.float64] | float:
    values = np.asarray(z, dtype=float)
    scalar = values.ndim == 0
    z_arr = np.atleast_1d(values)
    lo, hi = margin.lower, margin.upper
    out = np.interp(z_arr, margin.grid_z, margin.grid_u)
    left = z_arr < lo.threshold
    right = z_arr > hi.threshold
    if np.any(left):
        out[left] = lo.exceed_prob * lo.excess_sf(lo.threshold - z_arr[left])
    if np.any(right):
        out[right] = 1.0 - hi.exceed_prob * hi.excess_sf(z_arr[right] - hi.threshold)
    out = np.clip(out, CDF_FLOOR, 1.0 - CDF_FLOOR)
    return float(out[0]) if scalar else out


def margin_quantile(margin: SemiParametricMargin, u: ArrayLike) -> NDArray[np.float64] | float:
    values = np.asarray(u, dtype=float)
    if np.any(~((values > 0.0) & (values < 1.0))):
        raise DomainError("margin quantile levels must lie in (0, 1)")
    scalar = values.ndim == 0
    u_arr = np.atleast_1d(values)
    lo, hi = margin.lower, margin.upper
    out = np.interp(u_arr, margin.grid_u, margin.grid_z)
    left = u_arr < lo.exceed_prob
    right = u_arr > 1.0 - hi.exceed_prob
    if np.any(left):
        out[left] = lo.threshold - lo.excess_isf(u_arr[left] / lo.exceed_prob)
    if np.any(right):
        out[right] = hi.threshold + hi.excess_isf((1.0 - u_arr[right]) / hi.exceed_prob)
    return float(out[0]) if scalar else out


def margin_to_payload(margin: SemiParametricMargin) -> MarginPayload:
    return MarginPayload(
        xi_l=margin.lower.xi,
        beta_l=margin.lower.beta,
        u_l=margin.lower.threshold,
        n_l=margin.lower.n_exceed,
        method_l=margin.lower.method,
        xi_r=margin.upper.xi,
        beta_r=margin.upper.beta,
        u_r=margin.upper.threshold,
        n_r=margin.upper.n_exceed,
        method_r=margin.upper.method,
        n_total=margin.lower.n_total,
        tail_fraction=margin.tail_fraction,
        interior_grid=[(float(a), float(b)) for a, b in zip(margin.grid_z, margin.grid_u)],
    )


def margin_from_payload(payload: MarginPayload) -> SemiParametricMargin:
    lower = GpdTail(
        payload.xi_l, payload.beta_l, payload.u_l, payload.n_l, payload.n_total, "lower", payload.method_l
    )
    upper = GpdTail(
        payload.xi_r, payload.beta_r, payload.u_r, payload.n_r, payload.n_total, "upper", payload.method_r
    )
    grid = np.asarray(payload.interior_grid, dtype=float)
    if grid.ndim != 2 or grid.shape[1] != 2 or grid.shape[0] < 2:
        raise DataError("margin payload needs an interior grid of (z, u) pairs")
    return SemiParametricMargin(lower, upper, grid[:, 0].copy(), grid[:, 1].copy(), payload.tail_fraction)
