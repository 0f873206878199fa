"""ARMA(p, q) conditional mean with APARCH(m, n) conditional scale.

    r_t       = mu + sum_i ar_i r_{t-i} + sum_j ma_j eps_{t-j} + eps_t
    eps_t     = sigma_t z_t,  z_t ~ standardized skew-t(skew, shape)
    sigma_t^d = omega + sum_j alpha_j (|eps_{t-j}| - gamma_j eps_{t-j})^d + sum_k beta_k sigma_{t-k}^d

Filtering and simulation run the same compiled recursion. Presample values
are ``eps = 0``, ``r = mean(r)`` and ``sigma^d = mean(|r - mean(r)|^d)`` when
filtering; the simulator starts from the unconditional mean and power.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from numba import njit
from numpy.typing import ArrayLike, NDArray

from archimedean import streams
from errors import DataError, DomainError, NumericalError

from .sstd import power_moment, sstd_logpdf, sstd_random

logger = logging.getLogger(__name__)

BURN_IN = 500


@dataclass(frozen=True)
class ArmaAparchSpec:
    p: int = 1
    q: int = 2
    m: int = 1
    n: int = 1

    def __post_init__(self) -> None:
        for name in ("p", "q", "m", "n"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise DomainError(f"order {name} must be a non-negative integer, got {value}")
        if self.n >= 1 and self.m < 1:
            raise DomainError("GARCH terms (n >= 1) need at least one ARCH term (m >= 1)")

    @classmethod
    def parse(cls, text: str) -> "ArmaAparchSpec":
        """Parse ``"p,q,m,n"``."""

        parts = [part.strip() for part in text.split(",")]
        if len(parts) != 4:
            raise DomainError(f"spec must be 'p,q,m,n', got {text!r}")
        try:
            return cls(*(int(part) for part in parts))
        except ValueError as exc:
            raise DomainError(f"spec must be 'p,q,m,n', got {text!r}") from exc

    @property
    def max_lag(self) -> int:
        return max(self.p, self.q, self.m, self.n)

    @property
    def parameter_names(self) -> list[str]:
        return (
            ["mu"]
            + [f"ar{i + 1}" for i in range(self.p)]
            + [f"ma{i + 1}" for i in range(self.q)]
            + ["omega"]
            + [f"alpha{i + 1}" for i in range(self.m)]
            + [f"gamma{i + 1}" for i in range(self.m)]
            + [f"beta{i + 1}" for i in range(self.n)]
            + ["delta", "skew", "shape"]
        )

    @property
    def n_params(self) -> int:
        return len(self.parameter_names)

    def __str__(self) -> str:
        return f"ARMA({self.p},{self.q})-APARCH({self.m},{self.n})"


def _floats(values: Sequence[float] | NDArray[np.float64]) -> tuple[float, ...]:
    return tuple(float(v) for v in np.atleast_1d(np.asarray(values, dtype=float)))


@dataclass(frozen=True)
class ArmaAparchParams:
    mu: float = 0.0
    ar: tuple[float, ...] = ()
    ma: tuple[float, ...] = ()
    omega: float = 0.0
    alpha: tuple[float, ...] = ()
    gamma: tuple[float, ...] = ()
    beta: tuple[float, ...] = ()
    delta: float = 2.0
    skew: float = 1.0
    shape: float = 8.0

    def __post_init__(self) -> None:
        for name in ("ar", "ma", "alpha", "gamma", "beta"):
            object.__setattr__(self, name, _floats(getattr(self, name)))
        for name in ("mu", "omega", "delta", "skew", "shape"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if len(self.alpha) != len(self.gamma):
            raise DomainError("alpha and gamma need the same length")
        if self.beta and not self.alpha:
            raise DomainError("GARCH terms need at least one ARCH term")
        if not all(math.isfinite(v) for v in (self.mu, *self.ar, *self.ma)):
            raise DomainError("mean parameters must be finite")
        if not (math.isfinite(self.omega) and self.omega > 0.0):
            raise DomainError(f"omega must be > 0, got {self.omega}")
        if any(not (a >= 0.0) or not math.isfinite(a) for a in self.alpha):
            raise DomainError("alpha must be >= 0")
        if any(not (-1.0 < g < 1.0) for g in self.gamma):
            raise DomainError("gamma must lie in (-1, 1)")
        if any(not (b >= 0.0) or not math.isfinite(b) for b in self.beta):
            raise DomainError("beta must be >= 0")
        if not (math.isfinite(self.delta) and self.delta > 0.0):
            raise DomainError(f"delta must be > 0, got {self.delta}")
        if not (math.isfinite(self.skew) and self.skew > 0.0):
            raise DomainError(f"skew must be > 0, got {self.skew}")
        if not (self.shape > 2.0):
            raise DomainError(f"shape must be > 2, got {self.shape}")

    @property
    def spec(self) -> ArmaAparchSpec:
        return ArmaAparchSpec(len(self.ar), len(self.ma), len(self.alpha), len(self.beta))

    def to_vector(self) -> NDArray[np.float64]:
        return np.array(
            [self.mu, *self.ar, *self.ma, self.omega, *self.alpha, *self.gamma, *self.beta,
             self.delta, self.skew, self.shape],
            dtype=float,
        )

    @classmethod
    def from_vector(cls, spec: ArmaAparchSpec, vector: ArrayLike) -> "ArmaAparchParams":
        v = np.asarray(vector, dtype=float)
        if v.size != spec.n_params:
            raise DomainError(f"{spec} has {spec.n_params} parameters, got {v.size}")
        i = 0

        def take(k: int) -> NDArray[np.float64]:
            nonlocal i
            out = v[i : i + k]
            i += k
            return out

        mu = take(1)[0]
        ar, ma = take(spec.p), take(spec.q)
        omega = take(1)[0]
        alpha, gamma, beta = take(spec.m), take(spec.m), take(spec.n)
        delta, skew, shape = take(3)
        return cls(mu, ar, ma, omega, alpha, gamma, beta, delta, skew, shape)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.spec.parameter_names, self.to_vector().tolist()))

    def with_mean(self, mu: float) -> "ArmaAparchParams":
        return replace(self, mu=float(mu))


def arch(omega: float, alpha: Sequence[float], **kwargs: float) -> ArmaAparchParams:
    """ARCH(m): delta = 2, no asymmetry, no GARCH terms."""

    return ArmaAparchParams(omega=omega, alpha=alpha, gamma=[0.0] * len(alpha), delta=2.0, **kwargs)


def garch(omega: float, alpha: Sequence[float], beta: Sequence[float], **kwargs: float) -> ArmaAparchParams:
    return ArmaAparchParams(
        omega=omega, alpha=alpha, gamma=[0.0] * len(alpha), beta=beta, delta=2.0, **kwargs
    )


def gjr_garch(
    omega: float, alpha: Sequence[float], gamma: Sequence[float], beta: Sequence[float], **kwargs: float
) -> ArmaAparchParams:
    return ArmaAparchParams(omega=omega, alpha=alpha, gamma=gamma, beta=beta, delta=2.0, **kwargs)


def tgarch(omega: float, alpha: Sequence[float], gamma: Sequence[float], **kwargs: float) -> ArmaAparchParams:
    """Threshold GARCH on the conditional standard deviation: delta = 1, no GARCH terms."""

    return ArmaAparchParams(omega=omega, alpha=alpha, gamma=gamma, delta=1.0, **kwargs)


def special_case(params: ArmaAparchParams) -> str | None:
    """Name of the classical model a parameter set reduces to, if any."""

    symmetric = all(g == 0.0 for g in params.gamma)
    if params.delta == 2.0 and symmetric:
        return "garch" if params.beta else "arch"
    if params.delta == 2.0:
        return "gjr-garch"
    if params.delta == 1.0 and not params.beta:
        return "tgarch"
    return None


def stationarity_margin(params: ArmaAparchParams, *, digits: int | None = None) -> float:
    """``1 - [sum_j alpha_j E(|Z| - gamma_j Z)^delta + sum_k beta_k]``; positive iff stationary.

    With ``digits`` the moment arguments are rounded to that many significant
    digits first so that repeated calls from an optimizer hit the moment
    cache.
    """

    def key(value: float) -> float:
        return value if digits is None else float(f"{value:.{digits}g}")

    load = sum(
        a * power_moment(key(params.delta), key(g), key(params.skew), key(params.shape))
        for a, g in zip(params.alpha, params.gamma)
        if a != 0.0
    )
    return 1.0 - load - sum(params.beta)


@njit(cache=True)
def _arma_aparch_recursion(
    x: np.ndarray,
    simulate: bool,
    mu: float,
    ar: np.ndarray,
    ma: np.ndarray,
    omega: float,
    alpha: np.ndarray,
    gamma: np.ndarray,
    beta: np.ndarray,
    delta: float,
    r_pre: float,
    power_pre: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Run the joint recursion over ``x``.

    ``x`` holds returns when filtering and innovations ``z`` when simulating.
    Returns ``(r, eps, power, mean)`` with ``power = sigma ** delta``.
    """

    size = x.shape[0]
    r = np.empty(size)
    eps = np.zeros(size)
    power = np.empty(size)
    mean = np.empty(size)
    for t in range(size):
        m = mu
        for i in range(ar.shape[0]):
            m += ar[i] * (r[t - i - 1] if t - i - 1 >= 0 else r_pre)
        for j in range(ma.shape[0]):
            if t - j - 1 >= 0:
                m += ma[j] * eps[t - j - 1]
        pw = omega
        for j in range(alpha.shape[0]):
            if t - j - 1 >= 0:
                e = eps[t - j - 1]
                pw += alpha[j] * (abs(e) - gamma[j] * e) ** delta
        for k in range(beta.shape[0]):
            pw += beta[k] * (power[t - k - 1] if t - k - 1 >= 0 else power_pre)
        mean[t] = m
        power[t] = pw
        if simulate:
            eps[t] = pw ** (1.0 / delta) * x[t]
            r[t] = m + eps[t]
        else:
            r[t] = x[t]
            eps[t] = x[t] - m
    return r, eps, power, mean


def _run(params: ArmaAparchParams, x: NDArray[np.float64], simulate: bool, r_pre: float, power_pre: float):
    return _arma_aparch_recursion(
        np.ascontiguousarray(x, dtype=np.float64),
        simulate,
        params.mu,
        np.asarray(params.ar, dtype=np.float64),
        np.asarray(params.ma, dtype=np.float64),
        params.omega,
        np.asarray(params.alpha, dtype=np.float64),
        np.asarray(params.gamma, dtype=np.float64),
        np.asarray(params.beta, dtype=np.float64),
        params.delta,
        r_pre,
        power_pre,
    )


@dataclass(frozen=True)
class FilteredPath:
    """Output of one filter pass, including the one-step-ahead state."""

    sigma: NDArray[np.float64]
    residuals: NDArray[np.float64]
    innovations: NDArray[np.float64]
    mu_next: float
    sigma_next: float


def _as_returns(returns: ArrayLike) -> NDArray[np.float64]:
    r = np.asarray(returns, dtype=float)
    if r.ndim != 1:
        raise DataError("returns must be a one-dimensional series")
    if not np.all(np.isfinite(r)):
        raise NumericalError("returns contain non-finite values")
    return r


def filter_path(params: ArmaAparchParams, returns: ArrayLike) -> FilteredPath:
    r = _as_returns(returns)
    if r.size <= params.spec.max_lag:
        raise DataError(f"need more than {params.spec.max_lag} observations, got {r.size}")
    r_bar = float(r.mean())
    power_pre = float(np.mean(np.abs(r - r_bar) ** params.delta))
    # one extra step yields the forecast state at T + 1
    extended = np.append(r, 0.0)
    _, eps, power, mean = _run(params, extended, False, r_bar, power_pre)
    if not np.all(np.isfinite(power)) or np.any(power <= 0.0):
        raise NumericalError("APARCH recursion produced a non-positive or non-finite scale")
    sigma = power ** (1.0 / params.delta)
    return FilteredPath(
        sigma=sigma[:-1],
        residuals=eps[:-1] / sigma[:-1],
        innovations=eps[:-1],
        mu_next=float(mean[-1]),
        sigma_next=float(sigma[-1]),
    )


def aparch_filter(params: ArmaAparchParams, returns: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """``(sigma_path, standardized_residuals)`` of a return series."""

    path = filter_path(params, returns)
    return path.sigma, path.residuals


def loglik(params: ArmaAparchParams, returns: ArrayLike, *, digits: int | None = None) -> float:
    """Skew-t quasi log-likelihood ``sum_t [log f(z_t) - log sigma_t]``.

    Non-stationary parameters and non-finite paths give ``-inf``.
    """

    if stationarity_margin(params, digits=digits) <= 0.0:
        return -math.inf
    try:
        path = filter_path(params, returns)
    except NumericalError:
        return -math.inf
    value = float(np.sum(sstd_logpdf(path.residuals, params.skew, params.shape)) - np.sum(np.log(path.sigma)))
    return value if math.isfinite(value) else -math.inf


def loglik_gradient(params: ArmaAparchParams, returns: ArrayLike, step: float = 1e-5) -> NDArray[np.float64]:
    """Central-difference gradient in the natural parameter vector."""

    spec = params.spec
    base = params.to_vector()
    grad = np.empty(base.size)
    for i in range(base.size):
        h = step * max(1.0, abs(base[i]))
        up, down = base.copy(), base.copy()
        up[i] += h
        down[i] -= h
        grad[i] = (
            loglik(ArmaAparchParams.from_vector(spec, up), returns)
            - loglik(ArmaAparchParams.from_vector(spec, down), returns)
        ) / (2.0 * h)
    return grad


@dataclass(frozen=True)
class SimulatedPath:
    returns: NDArray[np.float64]
    sigma: NDArray[np.float64]
    innovations: NDArray[np.float64] = field(repr=False)


def simulate_path(params: ArmaAparchParams, T: int, seed: int, *, burn_in: int = BURN_IN) -> SimulatedPath:
    """Simulate ``T + 1`` scales and ``T`` returns after ``burn_in`` discarded steps.

    ``sigma`` has one more entry than ``returns``: the scale of the next,
    unrealized step.
    """

    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}")
    margin = stationarity_margin(params)
    if margin <= 0.0:
        raise DomainError(f"parameters are not stationary (margin {margin:.4g})")
    rng = streams.substream(seed, streams.VOLATILITY_SIMULATION, 0)
    z = sstd_random(burn_in + T + 1, params.skew, params.shape, rng)
    persistence = 1.0 - sum(params.ar)
    r_pre = params.mu / persistence if abs(persistence) > 1e-8 else params.mu
    power_pre = params.omega / margin
    r, _, power, _ = _run(params, z, True, r_pre, power_pre)
    sigma = power ** (1.0 / params.delta)
    return SimulatedPath(
        returns=r[burn_in : burn_in + T],
        sigma=sigma[burn_in:],
        innovations=z[burn_in:],
    )


def simulate(params: ArmaAparchParams, T: int, seed: int) -> NDArray[np.float64]:
    return simulate_path(params, T, seed).returns
