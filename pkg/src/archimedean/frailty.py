"""Frailty variables whose Laplace transforms are the inverse generators.

Root frailties have Laplace transform ``psi_inverse``. Inner frailties of a
nested copula, given the parent frailty ``V0``, have Laplace transform
``exp(-V0 * psi_parent(psi_inverse_child(s)))``.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from numpy.typing import NDArray
from scipy import special

from errors import DomainError, NestingError, NumericalError

from .generators import ArchimedeanGenerator, GeneratorFamily

logger = logging.getLogger(__name__)

# largest Joe parent frailty whose Sibuya sum is drawn; larger ones raise NumericalError
JOE_EXACT_LIMIT = 10_000_000
# tilted stable draws with c above this use double rejection instead of splitting
TILT_SPLIT_LIMIT = 50.0
# Frank inner law: rejection from Sibuya when the acceptance rate is at least this
FRANK_REJECTION_RATE = 0.05
FRANK_TABLE_LIMIT = 5_000_000
_SUM_CHUNK = 2_000_000
_EXACT_INTEGER = 2.0**52


def positive_stable(alpha: float, size: int, rng: np.random.Generator) -> NDArray[np.float64]:
    """Positive stable variables with Laplace transform ``exp(-s**alpha)``.

    Chambers-Mallows-Stuck construction in Kanter's form.
    """

    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"stable index must lie in (0, 1], got {alpha}")
    if alpha == 1.0:
        return np.ones(size)
    u = rng.uniform(0.0, math.pi, size)
    e = rng.standard_exponential(size)
    with np.errstate(over="ignore", divide="ignore"):
        log_s = (
            np.log(np.sin(alpha * u))
            - np.log(np.sin(u)) / alpha
            + (1.0 - alpha) / alpha * (np.log(np.sin((1.0 - alpha) * u)) - np.log(e))
        )
        return np.exp(log_s)


def sibuya(alpha: float, size: int, rng: np.random.Generator) -> NDArray[np.float64]:
    """Sibuya variables with Laplace transform ``1 - (1 - exp(-s))**alpha``.

    Inverse transform on the survival function
    ``S(k) = Gamma(k + 1 - alpha) / (Gamma(k + 1) Gamma(1 - alpha))``, started
    from its power-law asymptote and corrected by unit steps.
    """

    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"Sibuya index must lie in (0, 1], got {alpha}")
    if alpha == 1.0:
        return np.ones(size)
    w = rng.uniform(size=size)
    log_norm = special.gammaln(1.0 - alpha)

    def log_survival(k: NDArray[np.float64]) -> NDArray[np.float64]:
        # poch(k + 1 - alpha, alpha) = Gamma(k + 1) / Gamma(k + 1 - alpha), accurate for large k
        return -np.log(special.poch(k + 1.0 - alpha, alpha)) - log_norm

    out = np.ones(size)
    tail = w < 1.0 - alpha
    if not np.any(tail):
        return out
    wt = w[tail]
    with np.errstate(over="ignore"):
        guess = np.exp(-(np.log(wt) + log_norm) / alpha)
    k = np.clip(np.floor(guess), 1.0, 1e300)
    log_w = np.log(wt)
    refine = k < _EXACT_INTEGER
    for _ in range(10_000):
        up = refine & (log_survival(k) > log_w)
        down = refine & ~up & (k > 1.0) & (log_survival(k - 1.0) <= log_w)
        if not (np.any(up) or np.any(down)):
            break
        k = k + up - down
    out[tail] = k
    return out


def root_frailty(gen: ArchimedeanGenerator, size: int, rng: np.random.Generator) -> NDArray[np.float64]:
    """Frailty whose Laplace transform is ``gen.psi_inverse``."""

    theta = gen.theta
    if gen.family is GeneratorFamily.GUMBEL:
        return positive_stable(1.0 / theta, size, rng)
    if gen.family is GeneratorFamily.CLAYTON:
        return rng.gamma(shape=1.0 / theta, scale=theta, size=size)
    if gen.family is GeneratorFamily.FRANK:
        p = min(-math.expm1(-theta), np.nextafter(1.0, 0.0))
        return rng.logseries(p, size=size).astype(float)
    return sibuya(1.0 / theta, size, rng)


def _sum_of_iid(counts: NDArray[np.float64], draw, rng: np.random.Generator) -> NDArray[np.float64]:
    """Per row, the sum of ``counts[i]`` iid draws of ``draw(size, rng)``."""

    counts = counts.astype(np.int64)
    out = np.zeros(counts.size)
    cumulative = np.cumsum(counts)
    start = 0
    while start < counts.size:
        base = cumulative[start - 1] if start else 0
        end = max(start + 1, int(np.searchsorted(cumulative, base + _SUM_CHUNK, side="right")))
        segment = counts[start:end]
        draws = draw(int(segment.sum()), rng)
        owner = np.repeat(np.arange(segment.size), segment)
        out[start:end] = np.bincount(owner, weights=draws, minlength=segment.size)
        start = end
    return out


def _tilted_stable_split(alpha: float, c: NDArray[np.float64], rng: np.random.Generator) -> NDArray[np.float64]:
    pieces = np.maximum(np.ceil(c), 1.0)
    kappa = np.repeat(c / pieces, pieces.astype(np.int64))
    values = np.empty(kappa.size)
    pending = np.arange(kappa.size)
    while pending.size:
        z = kappa[pending] ** (1.0 / alpha) * positive_stable(alpha, pending.size, rng)
        accept = rng.uniform(size=pending.size) <= np.exp(-z)
        values[pending[accept]] = z[accept]
        pending = pending[~accept]
    owner = np.repeat(np.arange(c.size), pieces.astype(np.int64))
    return np.bincount(owner, weights=values, minlength=c.size)


def _sinc(x: float) -> float:
    if x == 0.0:
        return 1.0
    if abs(x) < 2e-4:
        return 1.0 - x * x / 6.0
    if abs(x) < 0.006:
        x_sq = x * x
        return 1.0 - x_sq / 6.0 * (1.0 - x_sq / 20.0)
    return math.sin(x) / x


def _zolotarev(x: float, alpha: float) -> float:
    return (
        ((1.0 - alpha) * _sinc((1.0 - alpha) * x)) ** (1.0 - alpha)
        * (alpha * _sinc(alpha * x)) ** alpha
        / _sinc(x)
    )


def _tilted_stable_double_rejection(alpha: float, lam: float, rng: np.random.Generator) -> float:
    """One draw with Laplace transform ``exp(-((lam + s)**alpha - lam**alpha))``."""

    b = (1.0 - alpha) / alpha
    lam_alpha = lam**alpha
    gamma = lam_alpha * alpha * (1.0 - alpha)
    sqrt_gamma = math.sqrt(gamma)
    c1 = math.sqrt(math.pi / 2.0)
    c2 = 2.0 + c1
    c3 = c2 * sqrt_gamma
    xi = (1.0 + math.sqrt(2.0) * c3) / math.pi
    psi = c3 * math.exp(-gamma * math.pi * math.pi / 8.0) / math.sqrt(math.pi)
    w1 = c1 * xi / sqrt_gamma
    w2 = 2.0 * math.sqrt(math.pi) * psi
    w3 = xi * math.pi

    while True:
        # auxiliary angle U and its acceptance variable Z
        while True:
            v = rng.random()
            if gamma >= 1.0:
                if v < w1 / (w1 + w2):
                    u = abs(rng.standard_normal()) / sqrt_gamma
                else:
                    w = rng.random()
                    u = math.pi * (1.0 - w * w)
            else:
                w = rng.random()
                u = math.pi * w if v < w3 / (w2 + w3) else math.pi * (1.0 - w * w)
            if not (0.0 <= u < math.pi):
                continue
            zeta = math.sqrt(_sinc(u) / (_sinc(alpha * u) ** alpha * _sinc((1.0 - alpha) * u) ** (1.0 - alpha)))
            z = 1.0 / (1.0 - (1.0 + alpha * zeta / sqrt_gamma) ** (-1.0 / alpha))
            rho = math.pi * math.exp(-lam_alpha * (1.0 - 1.0 / (zeta * zeta))) / (
                (1.0 + c1) * sqrt_gamma / zeta + z
            )
            d = 0.0
            if gamma >= 1.0:
                d += xi * math.exp(-gamma * u * u / 2.0)
            if 0.0 < u < math.pi:
                d += psi / math.sqrt(math.pi - u)
            if gamma < 1.0:
                d += xi
            big_z = rng.random() * rho * d
            if big_z <= 1.0:
                break

        a = _zolotarev(u, alpha) ** (1.0 / (1.0 - alpha))
        m = (b / a) ** alpha * lam_alpha
        delta = math.sqrt(m * alpha / a)
        a1 = delta * c1
        a3 = z / a
        s = a1 + delta + a3
        v2 = rng.random()
        n = 0.0
        e1 = 0.0
        if v2 < a1 / s:
            n = rng.standard_normal()
            x = m - delta * abs(n)
        elif v2 < (a1 + delta) / s:
            x = m + delta * rng.random()
        else:
            e1 = rng.standard_exponential()
            x = m + delta + e1 * a3
        if x < 0.0:
            continue
        e2 = -math.log(big_z)
        c = a * (x - m) + math.exp((1.0 / alpha) * math.log(lam_alpha) - b * math.log(m)) * (
            (m / x) ** b - 1.0
        )
        if x < m:
            c -= n * n / 2.0
        elif x > m + delta:
            c -= e1
        if c <= e2:
            return x ** (-b)


def tilted_stable(alpha: float, c: NDArray[np.float64], rng: np.random.Generator) -> NDArray[np.float64]:
    """Draws with Laplace transform ``exp(-c * ((1 + s)**alpha - 1))``, one per entry of ``c``."""

    if not (0.0 < alpha < 1.0):
        raise DomainError(f"tilted stable index must lie in (0, 1), got {alpha}")
    c = np.asarray(c, dtype=float)
    out = np.empty(c.size)
    small = c <= TILT_SPLIT_LIMIT
    if np.any(small):
        out[small] = _tilted_stable_split(alpha, c[small], rng)
    for i in np.flatnonzero(~small):
        scale = c[i] ** (1.0 / alpha)
        out[i] = scale * _tilted_stable_double_rejection(alpha, scale, rng)
    return out


def _frank_inner_table(alpha: float, c1: float, c0: float) -> NDArray[np.float64]:
    """Cumulative distribution of the Frank inner law on k = 1, 2, ..."""

    # log pmf(k) = log(alpha / k) + sum_{j<k} log(1 - alpha / j) + k log(c1) - log(c0)
    log_c1 = math.log(c1)
    chunk = 65_536
    cdf_parts: list[NDArray[np.float64]] = []
    total = 0.0
    log_prod = 0.0
    start = 1
    while start <= FRANK_TABLE_LIMIT:
        k = np.arange(start, start + chunk, dtype=float)
        steps = np.concatenate(([log_prod], np.log1p(-alpha / k[:-1])))
        log_running = np.cumsum(steps)
        log_prod = float(log_running[-1] + math.log1p(-alpha / k[-1]))
        pmf = np.exp(np.log(alpha / k) + log_running + k * log_c1 - math.log(c0))
        cdf = total + np.cumsum(pmf)
        cdf_parts.append(cdf)
        total = float(cdf[-1])
        if 1.0 - total < 1e-14:
            break
        start += chunk
    else:
        logger.warning(
            "Frank inner law truncated at k=%d (remaining mass %.3g)", FRANK_TABLE_LIMIT, 1.0 - total
        )
    return np.concatenate(cdf_parts)


def _frank_inner_draws(
    alpha: float, theta_parent: float, theta_child: float, size: int, rng: np.random.Generator
) -> NDArray[np.float64]:
    c0 = -math.expm1(-theta_parent)
    c1 = -math.expm1(-theta_child)
    if c0 >= FRANK_REJECTION_RATE:
        out = np.empty(size)
        pending = np.arange(size)
        while pending.size:
            proposals = int(min(5_000_000, math.ceil(pending.size / c0 * 1.1) + 16))
            k = sibuya(alpha, proposals, rng)
            accept = rng.uniform(size=proposals) <= np.exp(k * math.log(c1))
            accepted = k[accept][: pending.size]
            out[pending[: accepted.size]] = accepted
            pending = pending[accepted.size :]
        return out
    cdf = _frank_inner_table(alpha, c1, c0)
    u = rng.uniform(size=size) * cdf[-1]
    index = np.minimum(np.searchsorted(cdf, u, side="left"), cdf.size - 1)
    return index.astype(float) + 1.0


def inner_frailty(
    parent: ArchimedeanGenerator,
    child: ArchimedeanGenerator,
    v0: NDArray[np.float64],
    rng: np.random.Generator,
) -> NDArray[np.float64]:
    """Child frailties given parent frailties ``v0`` (one draw per entry)."""

    if parent.family is not child.family:
        raise NestingError(
            f"mixed families {parent.family.value}/{child.family.value} cannot be nested"
        )
    if parent.theta > child.theta:
        raise NestingError(
            f"parent theta {parent.theta:.6g} exceeds child theta {child.theta:.6g}"
        )
    v0 = np.asarray(v0, dtype=float)
    if parent.theta == child.theta:
        return v0.copy()
    alpha = parent.theta / child.theta
    family = parent.family

    if family is GeneratorFamily.GUMBEL:
        return v0 ** (1.0 / alpha) * positive_stable(alpha, v0.size, rng)

    if family is GeneratorFamily.CLAYTON:
        return child.theta * tilted_stable(alpha, v0 / parent.theta, rng)

    if family is GeneratorFamily.JOE:
        counts = np.maximum(np.round(v0), 1.0)
        if np.any(counts > JOE_EXACT_LIMIT):
            raise NumericalError(
                f"Joe parent frailty {counts.max():.6g} exceeds the exact Sibuya-sum limit {JOE_EXACT_LIMIT}"
            )
        return _sum_of_iid(counts, lambda n, g: sibuya(alpha, n, g), rng)

    counts = np.maximum(np.round(v0), 1.0)
    return _sum_of_iid(
        counts,
        lambda n, g: _frank_inner_draws(alpha, parent.theta, child.theta, n, g),
        rng,
    )
