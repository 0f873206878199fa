"""Long-only minimum-CVaR portfolio weights from a scenario matrix.

The Rockafellar-Uryasev program over ``x = [w, zeta, z]``:

    minimize    zeta + sum(z) / ((1 - alpha) N)
    subject to  z_i >= -r_i . w - zeta,  z_i >= 0
                sum(w) = 1,  0 <= w_j <= max_weight
                mean(r) . w >= target_return        (optional)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import optimize, sparse

from errors import DataError, DomainError, NumericalError

logger = logging.getLogger(__name__)

_WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class MinCvarSolution:
    weights: NDArray[np.float64]
    objective: float
    zeta: float
    status: str = "ok"


def _scenarios(scenarios: ArrayLike) -> NDArray[np.float64]:
    r = np.asarray(scenarios, dtype=float)
    if r.ndim == 1:
        r = r[:, None]
    if r.ndim != 2 or r.shape[0] == 0 or r.shape[1] == 0:
        raise DataError("scenarios must be a non-empty (N, d) matrix")
    if not np.all(np.isfinite(r)):
        raise DataError("scenarios contain non-finite values")
    return r


def solve_min_cvar(
    scenarios: ArrayLike,
    alpha: float,
    *,
    max_weight: float = 1.0,
    target_return: float | None = None,
) -> MinCvarSolution:
    """Solve the linear program with HiGHS and return weights and the optimum."""

    r = _scenarios(scenarios)
    n, d = r.shape
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if not (0.0 < max_weight <= 1.0):
        raise DomainError(f"max_weight must lie in (0, 1], got {max_weight}")
    if max_weight * d < 1.0 - _WEIGHT_SUM_TOL:
        raise NumericalError(f"{d} assets capped at {max_weight} cannot be fully invested")
    means = r.mean(axis=0)
    if target_return is not None and target_return > float(means.max()):
        raise NumericalError(
            f"target return {target_return} exceeds the best scenario mean {float(means.max()):.6g}"
        )

    cost = np.concatenate([np.zeros(d), [1.0], np.full(n, 1.0 / ((1.0 - alpha) * n))])
    hinge = sparse.hstack(
        [sparse.csr_matrix(-r), sparse.csr_matrix(-np.ones((n, 1))), -sparse.identity(n, format="csr")],
        format="csr",
    )
    rows = [hinge]
    bounds_ub = [np.zeros(n)]
    if target_return is not None:
        rows.append(sparse.csr_matrix(np.concatenate([-means, np.zeros(1 + n)])[None, :]))
        bounds_ub.append(np.array([-float(target_return)]))
    a_ub = sparse.vstack(rows, format="csr")
    b_ub = np.concatenate(bounds_ub)
    a_eq = sparse.csr_matrix(np.concatenate([np.ones(d), np.zeros(1 + n)])[None, :])
    bounds = [(0.0, max_weight)] * d + [(None, None)] + [(0.0, None)] * n

    result = optimize.linprog(
        cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0], bounds=bounds, method="highs"
    )
    if result.status == 2:
        raise NumericalError(f"min-CVaR constraints are infeasible: {result.message}")
    if not result.success:
        raise NumericalError(f"min-CVaR linear program failed: {result.message}")

    weights = np.clip(result.x[:d], 0.0, max_weight)
    weights = weights / weights.sum()
    logger.debug("min-CVaR: objective=%.6g zeta=%.6g weights=%s", result.fun, result.x[d], weights)
    return MinCvarSolution(weights=weights, objective=float(result.fun), zeta=float(result.x[d]))


def min_cvar_weights(
    scenarios: ArrayLike,
    alpha: float,
    *,
    max_weight: float = 1.0,
    target_return: float | None = None,
) -> NDArray[np.float64]:
    """Weights minimizing the sample CVaR of the portfolio loss ``-w . r``."""

    r = _scenarios(scenarios)
    if r.shape[1] == 1:
        return np.ones(1)
    return solve_min_cvar(r, alpha, max_weight=max_weight, target_return=target_return).weights


def portfolio_returns(scenarios: ArrayLike, weights: ArrayLike) -> NDArray[np.float64]:
    r = _scenarios(scenarios)
    w = np.asarray(weights, dtype=float)
    if w.shape != (r.shape[1],):
        raise DataError(f"expected {r.shape[1]} weights, got shape {w.shape}")
    return r @ w
