"""Generalized Pareto tails fitted to threshold exceedances."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import optimize, stats

from errors import DataError, DomainError

logger = logging.getLogger(__name__)

MIN_EXCEEDANCES = 30
XI_BOUNDS = (-0.5, 1.0)
# below this |xi| the score uses its second-order expansion around 0
_XI_SERIES = 1e-6

Side = Literal["lower", "upper"]


@dataclass(frozen=True)
class GpdTail:
    """One fitted tail.

    Excesses are measured away from the body: ``threshold - z`` for the lower
    tail and ``z - threshold`` for the upper tail.
    """

    xi: float
    beta: float
    threshold: float
    n_exceed: int
    n_total: int
    side: Side = "upper"
    method: str = "mle"

    def __post_init__(self) -> None:
        if not (self.beta > 0.0 and math.isfinite(self.beta)):
            raise DomainError(f"GPD scale must be > 0, got {self.beta}")
        if not math.isfinite(self.xi):
            raise DomainError(f"GPD tail index must be finite, got {self.xi}")

    @property
    def exceed_prob(self) -> float:
        return self.n_exceed / self.n_total

    @property
    def endpoint(self) -> float:
        """Finite end of the support when ``xi < 0``, otherwise infinite."""

        if self.xi >= 0.0:
            return math.inf if self.side == "upper" else -math.inf
        reach = self.beta / -self.xi
        return self.threshold + reach if self.side == "upper" else self.threshold - reach

    def excess_sf(self, y: ArrayLike) -> NDArray[np.float64]:
        return gpd_sf(y, self.xi, self.beta)

    def excess_isf(self, p: ArrayLike) -> NDArray[np.float64]:
        return gpd_isf(p, self.xi, self.beta)


def gpd_sf(y: ArrayLike, xi: float, beta: float) -> NDArray[np.float64]:
    """Survival ``(1 + xi y / beta) ** (-1 / xi)``, exponential in the ``xi -> 0`` limit."""

    return np.asarray(stats.genpareto.sf(np.maximum(np.asarray(y, dtype=float), 0.0), c=xi, scale=beta))


def gpd_isf(p: ArrayLike, xi: float, beta: float) -> NDArray[np.float64]:
    return np.asarray(stats.genpareto.isf(np.asarray(p, dtype=float), c=xi, scale=beta))


def gpd_loglik(excesses: ArrayLike, xi: float, beta: float) -> float:
    y = np.asarray(excesses, dtype=float)
    if beta <= 0.0:
        return -math.inf
    value = float(np.sum(stats.genpareto.logpdf(y, c=xi, scale=beta)))
    return value if math.isfinite(value) else -math.inf


def gpd_score(excesses: ArrayLike, xi: float, beta: float) -> NDArray[np.float64]:
    """Gradient of the log-likelihood with respect to ``(xi, beta)``."""

    y = np.asarray(excesses, dtype=float)
    a = y / beta
    n = y.size
    if abs(xi) < _XI_SERIES:
        d_xi = float(np.sum(a * a / 2.0 - a))
        d_beta = float((-n + (1.0 + xi) * np.sum(a / (1.0 + xi * a))) / beta)
        return np.array([d_xi, d_beta])
    w = a / (1.0 + xi * a)
    log_term = np.log1p(xi * a)
    d_xi = float(np.sum(log_term) / xi**2 - (1.0 + 1.0 / xi) * np.sum(w))
    d_beta = float((-n + (1.0 + xi) * np.sum(w)) / beta)
    return np.array([d_xi, d_beta])


def gpd_pwm(excesses: ArrayLike) -> tuple[float, float]:
    """Probability-weighted moment estimates ``(xi, beta)``."""

    y = np.sort(np.asarray(excesses, dtype=float))
    n = y.size
    plotting = (np.arange(1, n + 1) - 0.35) / n
    a0 = float(y.mean())
    a1 = float(np.mean((1.0 - plotting) * y))
    denom = a0 - 2.0 * a1
    if denom <= 0.0:
        raise DataError("probability-weighted moments are degenerate for these excesses")
    return 2.0 - a0 / denom, 2.0 * a0 * a1 / denom


def _mle(y: NDArray[np.float64], start: tuple[float, float]) -> tuple[float, float] | None:
    def negative(x: NDArray[np.float64]) -> float:
        value = gpd_loglik(y, x[1], math.exp(x[0]))
        return -value if math.isfinite(value) else 1e100

    xi0 = min(max(start[0], XI_BOUNDS[0] + 0.05), XI_BOUNDS[1] - 0.05)
    result = optimize.minimize(
        negative,
        np.array([math.log(start[1]), xi0]),
        method="L-BFGS-B",
        bounds=[(None, None), XI_BOUNDS],
    )
    if not result.success or result.fun >= 1e100:
        return None
    xi, beta = float(result.x[1]), float(math.exp(result.x[0]))
    if not (XI_BOUNDS[0] + 1e-6 < xi < XI_BOUNDS[1] - 1e-6):
        return None

    # polish on the score: the returned point is a stationary point to solver precision
    polished = optimize.root(
        lambda p: gpd_score(y, p[0], p[1]) / y.size, np.array([xi, beta]), method="hybr", tol=1e-14
    )
    if polished.success and XI_BOUNDS[0] < polished.x[0] < XI_BOUNDS[1] and polished.x[1] > 0.0:
        if gpd_loglik(y, polished.x[0], polished.x[1]) >= gpd_loglik(y, xi, beta) - 1e-9:
            xi, beta = float(polished.x[0]), float(polished.x[1])
    return xi, beta


def fit_gpd(
    excesses: ArrayLike,
    threshold: float,
    n_total: int,
    side: Side = "upper",
) -> GpdTail:
    """Maximum likelihood on ``(log beta, xi)`` with a probability-weighted moment fallback."""

    y = np.asarray(excesses, dtype=float)
    if y.size < MIN_EXCEEDANCES:
        raise DataError(f"{side} tail has {y.size} exceedances; at least {MIN_EXCEEDANCES} are required")
    if np.any(y < 0.0) or not np.all(np.isfinite(y)):
        raise DataError("excesses must be finite and non-negative")
    start = gpd_pwm(y)
    start = (start[0], start[1] if start[1] > 0.0 else float(y.mean()))
    estimate = _mle(y, start)
    method = "mle"
    if estimate is None:
        logger.warning("%s tail GPD likelihood fit failed; using probability-weighted moments", side)
        xi, beta = gpd_pwm(y)
        if beta <= 0.0:
            raise DataError(f"{side} tail: moment estimate of the GPD scale is not positive")
        estimate = (xi, beta)
        method = "pwm"
    xi, beta = estimate
    logger.debug("%s tail: xi=%.4f beta=%.4f n=%d (%s)", side, xi, beta, y.size, method)
    return GpdTail(
        xi=xi,
        beta=beta,
        threshold=float(threshold),
        n_exceed=int(y.size),
        n_total=int(n_total),
        side=side,
        method=method,
    )
