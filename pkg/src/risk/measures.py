"""Empirical Value-at-Risk and Conditional Value-at-Risk of simulated losses."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from errors import DataError, DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TailRisk:
    alpha: float
    var: float
    cvar: float
    mean_excess: float
    n_tail: int

    @property
    def no_exceedance(self) -> bool:
        return self.n_tail == 0


def _losses(losses: ArrayLike, alpha: float) -> NDArray[np.float64]:
    values = np.asarray(losses, dtype=float).ravel()
    if values.size == 0:
        raise DataError("no losses supplied")
    if not np.all(np.isfinite(values)):
        raise DataError("losses contain non-finite values")
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if values.size < 1.0 / (1.0 - alpha):
        logger.warning("only %d losses for alpha=%.4f; the tail is empty or nearly so", values.size, alpha)
    return values


def _var_sorted(ordered: NDArray[np.float64], alpha: float) -> float:
    rank = max(1, math.ceil(alpha * ordered.size - 1e-9))
    return float(ordered[rank - 1])


def var_empirical(losses: ArrayLike, alpha: float) -> float:
    """Order statistic at rank ``ceil(alpha N)`` of the ascending losses."""

    values = _losses(losses, alpha)
    return _var_sorted(np.sort(values), alpha)


def tail_risk(losses: ArrayLike, alpha: float) -> TailRisk:
    """VaR, tail mean beyond VaR and the mean excess over VaR.

    Without any loss strictly above VaR the tail mean falls back to VaR and
    the mean excess to zero.
    """

    values = _losses(losses, alpha)
    var = _var_sorted(np.sort(values), alpha)
    tail = values[values > var]
    if tail.size == 0:
        logger.warning("no loss exceeds VaR=%.6g at alpha=%.4f; CVaR set to VaR", var, alpha)
        return TailRisk(alpha=alpha, var=var, cvar=var, mean_excess=0.0, n_tail=0)
    cvar = float(tail.mean())
    return TailRisk(alpha=alpha, var=var, cvar=cvar, mean_excess=cvar - var, n_tail=int(tail.size))


def cvar_empirical(losses: ArrayLike, alpha: float) -> float:
    return tail_risk(losses, alpha).cvar


def mean_excess(losses: ArrayLike, alpha: float) -> float:
    return tail_risk(losses, alpha).mean_excess


def ru_cvar(losses: ArrayLike, alpha: float) -> float:
    """Rockafellar-Uryasev CVaR ``min_z z + E[(L - z)+] / (1 - alpha)``.

    The minimum is attained at the empirical VaR; this is the objective the
    min-CVaR program optimizes.
    """

    values = _losses(losses, alpha)
    zeta = var_empirical(values, alpha)
    return zeta + float(np.maximum(values - zeta, 0.0).mean()) / (1.0 - alpha)
