"""Maximum-likelihood fitting of ARMA-APARCH models with skew-t innovations."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import optimize

from archimedean import streams
from errors import DataError, DomainError, NumericalError

from .aparch import ArmaAparchParams, ArmaAparchSpec, filter_path, loglik

logger = logging.getLogger(__name__)

RECOMMENDED_MIN_OBS = 250
DEFAULT_CANDIDATES = (
    ArmaAparchSpec(0, 1, 1, 1),
    ArmaAparchSpec(1, 0, 1, 1),
    ArmaAparchSpec(1, 1, 1, 1),
    ArmaAparchSpec(1, 2, 1, 1),
)


@dataclass(frozen=True)
class FitOptions:
    n_starts: int = 5
    seed: int = 0
    max_iter: int = 4000
    initial: ArmaAparchParams | None = None
    # perturbation scale of the multi-starts on the unconstrained scale
    start_spread: float = 0.5


@dataclass(frozen=True)
class ArmaAparchFit:
    spec: ArmaAparchSpec
    params: ArmaAparchParams
    sigma_path: NDArray[np.float64] = field(repr=False)
    residuals: NDArray[np.float64] = field(repr=False)
    loglik: float
    aic_total: float
    aic_per_obs: float
    n_obs: int
    mu_next: float
    sigma_next: float
    converged: bool = True
    status: str = "ok"

    def summary(self) -> dict[str, float]:
        return {**self.params.as_dict(), "aic": self.aic_per_obs}


def forecast_one_step(fit: ArmaAparchFit) -> tuple[float, float]:
    """Conditional mean and scale of the step after the fitted sample."""

    return fit.mu_next, fit.sigma_next


def evaluate_fit(
    params: ArmaAparchParams,
    returns: ArrayLike,
    *,
    converged: bool = True,
    status: str = "ok",
) -> ArmaAparchFit:
    """Package filtered output and information criteria at fixed parameters."""

    r = np.asarray(returns, dtype=float)
    path = filter_path(params, r)
    value = loglik(params, r)
    if not math.isfinite(value):
        raise NumericalError("log-likelihood is not finite at the given parameters")
    k = params.spec.n_params
    aic = -2.0 * value + 2.0 * k
    return ArmaAparchFit(
        spec=params.spec,
        params=params,
        sigma_path=path.sigma,
        residuals=path.residuals,
        loglik=value,
        aic_total=aic,
        aic_per_obs=aic / r.size,
        n_obs=int(r.size),
        mu_next=path.mu_next,
        sigma_next=path.sigma_next,
        converged=converged,
        status=status,
    )


def _to_unconstrained(params: ArmaAparchParams) -> NDArray[np.float64]:
    return np.array(
        [
            params.mu,
            *params.ar,
            *params.ma,
            math.log(params.omega),
            *(math.log(max(a, 1e-8)) for a in params.alpha),
            *(math.atanh(g) for g in params.gamma),
            *(math.log(max(b, 1e-8)) for b in params.beta),
            math.log(params.delta),
            math.log(params.skew),
            math.log(params.shape - 2.0),
        ]
    )


def _from_unconstrained(spec: ArmaAparchSpec, x: NDArray[np.float64]) -> ArmaAparchParams:
    i = 1 + spec.p + spec.q
    natural = np.empty_like(x)
    natural[:i] = x[:i]
    with np.errstate(over="ignore"):
        natural[i] = math.exp(min(x[i], 700.0))
        j = i + 1
        natural[j : j + spec.m] = np.exp(np.minimum(x[j : j + spec.m], 700.0))
        j += spec.m
        natural[j : j + spec.m] = np.tanh(x[j : j + spec.m])
        j += spec.m
        natural[j : j + spec.n] = np.exp(np.minimum(x[j : j + spec.n], 700.0))
        j += spec.n
        natural[j] = math.exp(min(x[j], 700.0))
        natural[j + 1] = math.exp(min(x[j + 1], 700.0))
        natural[j + 2] = 2.0 + math.exp(min(x[j + 2], 700.0))
    return ArmaAparchParams.from_vector(spec, natural)


def initial_params(spec: ArmaAparchSpec, returns: NDArray[np.float64]) -> ArmaAparchParams:
    """Moment-based starting point."""

    delta = 1.5
    scale = float(np.mean(np.abs(returns - returns.mean()) ** delta))
    return ArmaAparchParams(
        mu=float(returns.mean()),
        ar=[0.0] * spec.p,
        ma=[0.0] * spec.q,
        omega=max(scale * (1.0 - 0.9), 1e-12),
        alpha=[0.05] * spec.m,
        gamma=[0.05] * spec.m,
        beta=[0.85 / spec.n] * spec.n,
        delta=delta,
        skew=1.0,
        shape=8.0,
    )


def _objective(spec: ArmaAparchSpec, returns: NDArray[np.float64]):
    def negative(x: NDArray[np.float64]) -> float:
        try:
            params = _from_unconstrained(spec, x)
        except DomainError:
            return 1e100
        value = loglik(params, returns, digits=6)
        return -value if math.isfinite(value) else 1e100

    return negative


def _starts(spec: ArmaAparchSpec, returns: NDArray[np.float64], options: FitOptions) -> list[NDArray[np.float64]]:
    base = _to_unconstrained(initial_params(spec, returns))
    starts = []
    if options.initial is not None:
        if options.initial.spec != spec:
            raise DomainError(f"warm start has spec {options.initial.spec}, expected {spec}")
        starts.append(_to_unconstrained(options.initial))
    starts.append(base)
    for k in range(1, options.n_starts):
        rng = streams.substream(options.seed, streams.FIT_STARTS, k)
        noise = rng.normal(scale=options.start_spread, size=base.size)
        noise[: 1 + spec.p + spec.q] *= 0.2
        noise[0] = 0.0
        starts.append(base + noise)
    return starts


def fit(spec: ArmaAparchSpec, returns: ArrayLike, options: FitOptions | None = None) -> ArmaAparchFit:
    """Maximize the likelihood over unconstrained parameters.

    Each start runs Nelder-Mead followed by a BFGS polish; the best finite
    optimum wins. Non-convergence is reported through ``converged`` and
    ``status`` on the returned fit.
    """

    options = options or FitOptions()
    r = np.asarray(returns, dtype=float)
    if r.ndim != 1 or not np.all(np.isfinite(r)):
        raise DataError("returns must be a finite one-dimensional series")
    if r.size <= spec.max_lag + spec.n_params:
        raise DataError(f"{spec} needs more than {spec.max_lag + spec.n_params} observations, got {r.size}")
    if r.size < RECOMMENDED_MIN_OBS:
        logger.warning("fitting %s on only %d observations", spec, r.size)

    objective = _objective(spec, r)
    best: optimize.OptimizeResult | None = None
    best_converged = False
    for index, x0 in enumerate(_starts(spec, r, options)):
        if objective(x0) >= 1e100:
            logger.debug("start %d has no finite likelihood; skipped", index)
            continue
        simplex = optimize.minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"maxiter": options.max_iter, "maxfev": options.max_iter * 2, "xatol": 1e-6, "fatol": 1e-8},
        )
        polish = optimize.minimize(objective, simplex.x, method="BFGS", options={"maxiter": 500, "gtol": 1e-5})
        result = polish if polish.fun <= simplex.fun else simplex
        converged = bool(simplex.success or polish.success)
        logger.debug("start %d: -loglik=%.6f converged=%s", index, result.fun, converged)
        if best is None or result.fun < best.fun:
            best, best_converged = result, converged

    if best is None or best.fun >= 1e100:
        raise NumericalError(f"no start of {spec} produced a finite likelihood")
    params = _from_unconstrained(spec, best.x)
    status = "ok" if best_converged else f"optimizer did not converge: {best.message}"
    fitted = evaluate_fit(params, r, converged=best_converged, status=status)
    if best_converged:
        logger.info("%s fitted: loglik=%.4f aic/obs=%.4f", spec, fitted.loglik, fitted.aic_per_obs)
    else:
        logger.warning("%s %s", spec, status)
    return fitted


def select_spec(
    returns: ArrayLike,
    candidates: Iterable[ArmaAparchSpec] = DEFAULT_CANDIDATES,
    options: FitOptions | None = None,
) -> ArmaAparchFit:
    """Fit each candidate and keep the lowest AIC per observation."""

    fits: list[ArmaAparchFit] = []
    for spec in candidates:
        try:
            fits.append(fit(spec, returns, options))
        except NumericalError as exc:
            logger.warning("candidate %s failed: %s", spec, exc)
    if not fits:
        raise NumericalError("no candidate specification could be fitted")
    chosen = min(fits, key=lambda f: f.aic_per_obs)
    logger.info("selected %s (aic/obs=%.4f)", chosen.spec, chosen.aic_per_obs)
    return chosen


def fit_many(
    specs: Sequence[ArmaAparchSpec] | ArmaAparchSpec,
    columns: NDArray[np.float64],
    options: FitOptions | None = None,
    warm: Sequence[ArmaAparchParams | None] | None = None,
    *,
    max_workers: int = 1,
) -> list[ArmaAparchFit]:
    """Fit each column of an (T, d) return matrix independently.

    With ``max_workers > 1`` the columns are fitted on a thread pool; the
    result does not depend on the worker count.
    """

    d = columns.shape[1]
    spec_list = [specs] * d if isinstance(specs, ArmaAparchSpec) else list(specs)
    base = options or FitOptions()

    def task(j: int) -> ArmaAparchFit:
        initial = warm[j] if warm is not None else None
        return fit(spec_list[j], columns[:, j], replace(base, initial=initial))

    if max_workers > 1 and d > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(task, range(d)))
    return [task(j) for j in range(d)]
