"""Kendall's tau for Archimedean families: calibration in both directions and estimation."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate, optimize, stats

from errors import DataError, DomainError

from .generators import (
    ArchimedeanGenerator,
    GeneratorFamily,
    bivariate_cdf,
    psi,
    psi_derivative,
)
from .sampling import sample_ac

logger = logging.getLogger(__name__)

_QUAD_TOL = 1e-12
_ROOT_TOL = 1e-12
# below this theta the Frank tau is evaluated from its Taylor series
_FRANK_SERIES_CUTOFF = 1e-2


@dataclass(frozen=True)
class TauEstimate:
    """Monte Carlo estimate of Kendall's tau with its standard error."""

    tau: float
    std_error: float
    n: int


def debye1(x: float) -> float:
    """Debye function of order one, ``(1/x) * int_0^x t / (e^t - 1) dt``."""

    if x == 0.0:
        return 1.0
    value, _ = integrate.quad(
        lambda t: t / math.expm1(t) if t != 0.0 else 1.0,
        0.0,
        x,
        epsabs=_QUAD_TOL,
        epsrel=_QUAD_TOL,
        limit=200,
    )
    return value / x


def _frank_tau(theta: float) -> float:
    if theta < _FRANK_SERIES_CUTOFF:
        return theta / 9.0 - theta**3 / 900.0 + theta**5 / 52920.0
    return 1.0 - 4.0 / theta * (1.0 - debye1(theta))


def tau_by_quadrature(gen: ArchimedeanGenerator) -> float:
    """Kendall's tau as ``1 + 4 * int_0^1 psi(t) / psi'(t) dt`` for any family."""

    if gen.is_independence:
        return 0.0

    def ratio(t: float) -> float:
        if t <= 0.0 or t >= 1.0:
            return 0.0
        return float(psi(gen, t)) / float(psi_derivative(gen, t))

    value, _ = integrate.quad(ratio, 0.0, 1.0, epsabs=_QUAD_TOL, epsrel=1e-10, limit=400)
    return 1.0 + 4.0 * value


def _joe_tau(theta: float) -> float:
    if theta == 1.0:
        return 0.0

    # x = 1 - t moves the logarithmic endpoint to x = 1 where the integrand vanishes
    def integrand(x: float) -> float:
        if x <= 0.0 or x >= 1.0:
            return 0.0
        xt = x**theta
        # log1p(-xt) / x**(theta - 1) written as x * log1p(-xt) / xt
        ratio = math.log1p(-xt) / xt if xt > 0.0 else -1.0
        return ratio * x * (1.0 - xt)

    value, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=_QUAD_TOL, epsrel=1e-11, limit=400)
    return 1.0 + 4.0 / theta * value


def tau_from_theta(gen: ArchimedeanGenerator) -> float:
    """Kendall's tau implied by a generator."""

    theta = gen.theta
    if gen.family is GeneratorFamily.GUMBEL:
        return 1.0 - 1.0 / theta
    if gen.family is GeneratorFamily.CLAYTON:
        return theta / (theta + 2.0)
    if gen.family is GeneratorFamily.FRANK:
        return _frank_tau(theta)
    return _joe_tau(theta)


def _bracket(family: GeneratorFamily, tau: float) -> tuple[float, float]:
    def f(theta: float) -> float:
        return tau_from_theta(ArchimedeanGenerator(family, theta)) - tau

    if family is GeneratorFamily.FRANK:
        lo, hi = 1e-6, 50.0
        while f(lo) > 0.0:
            lo /= 10.0
            if lo < 1e-300:
                raise DomainError(f"tau={tau} too small for the frank family")
        while f(hi) < 0.0:
            hi *= 2.0
            if hi > 1e12:
                raise DomainError(f"tau={tau} not attainable by the frank family")
        return lo, hi
    lo, hi = 1.0 + 1e-6, 100.0
    while f(lo) > 0.0:
        lo = 1.0 + (lo - 1.0) / 10.0
        if lo - 1.0 < 1e-15:
            raise DomainError(f"tau={tau} too small for the joe family")
    while f(hi) < 0.0:
        hi *= 2.0
        if hi > 1e9:
            raise DomainError(f"tau={tau} not attainable by the joe family")
    return lo, hi


def theta_from_tau(family: GeneratorFamily | str, tau: float) -> float:
    """Invert the tau-theta relation of a family.

    Only positive dependence is representable, so ``tau`` must lie in (0, 1).
    """

    family = GeneratorFamily.parse(family)
    tau = float(tau)
    if not (0.0 < tau < 1.0):
        raise DomainError(f"tau={tau} is not attainable by the {family.value} family")
    if family is GeneratorFamily.GUMBEL:
        return 1.0 / (1.0 - tau)
    if family is GeneratorFamily.CLAYTON:
        return 2.0 * tau / (1.0 - tau)
    lo, hi = _bracket(family, tau)
    return float(
        optimize.brentq(
            lambda theta: tau_from_theta(ArchimedeanGenerator(family, theta)) - tau,
            lo,
            hi,
            xtol=_ROOT_TOL,
            rtol=4 * np.finfo(float).eps,
            maxiter=500,
        )
    )


def tau_monte_carlo(gen: ArchimedeanGenerator, n: int, seed: int = 0) -> TauEstimate:
    """Kendall's tau as ``4 E[C(U, V)] - 1`` with (U, V) drawn from the copula."""

    if n < 1000:
        raise DomainError("tau_monte_carlo needs n >= 1000")
    sample = sample_ac(gen, 2, n, seed)
    values = np.asarray(bivariate_cdf(gen, sample[:, 0], sample[:, 1]), dtype=float)
    tau = 4.0 * float(values.mean()) - 1.0
    std_error = 4.0 * float(values.std(ddof=1)) / math.sqrt(n)
    return TauEstimate(tau=tau, std_error=std_error, n=n)


def empirical_kendall_matrix(x: ArrayLike) -> NDArray[np.float64]:
    """Pairwise Kendall tau-b matrix of the columns of ``x``.

    Uses the O(n log n) tau-b of ``scipy.stats.kendalltau`` so rounded returns
    with ties are handled.
    """

    data = np.asarray(x, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2:
        raise DataError("Kendall matrix needs an (n, d) matrix with n >= 2")
    if not np.all(np.isfinite(data)):
        raise DataError("Kendall matrix input contains non-finite values")
    constant = np.flatnonzero(np.ptp(data, axis=0) == 0.0)
    if constant.size:
        raise DataError(f"Kendall matrix input has constant column(s) {constant.tolist()}")
    d = data.shape[1]
    out = np.eye(d)
    for i in range(d):
        for j in range(i + 1, d):
            result = stats.kendalltau(data[:, i], data[:, j], variant="b")
            out[i, j] = out[j, i] = float(result.statistic)
    return out
