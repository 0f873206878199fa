"""Archimedean generators and exchangeable copula evaluation.

Convention used throughout the package:

* ``psi`` is the decreasing generator of the classical table form, with
  ``psi(1) = 0`` and ``psi(0+) = inf``.
* ``psi_inverse`` is its inverse, which for every supported family is the
  Laplace transform of a positive frailty variable. The nested sampler and the
  hierarchical CDF only ever combine these two functions, so no second
  convention exists anywhere in the code.

All functions accept scalars or numpy arrays and return the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from errors import DomainError


class GeneratorFamily(str, Enum):
    GUMBEL = "gumbel"
    CLAYTON = "clayton"
    FRANK = "frank"
    JOE = "joe"

    @classmethod
    def parse(cls, value: "str | GeneratorFamily") -> "GeneratorFamily":
        if isinstance(value, GeneratorFamily):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError as exc:
            names = ", ".join(f.value for f in cls)
            raise DomainError(f"Unknown copula family '{value}' (expected one of {names})") from exc


@dataclass(frozen=True)
class ArchimedeanGenerator:
    """A one-parameter Archimedean generator.

    Parameter domains are the nesting-compatible ones: theta >= 1 for Gumbel
    and Joe, theta > 0 for Clayton and Frank.
    """

    family: GeneratorFamily
    theta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", GeneratorFamily.parse(self.family))
        theta = float(self.theta)
        object.__setattr__(self, "theta", theta)
        if not np.isfinite(theta):
            raise DomainError(f"theta must be finite, got {theta}")
        if self.family in (GeneratorFamily.GUMBEL, GeneratorFamily.JOE) and theta < 1.0:
            raise DomainError(f"{self.family.value} requires theta >= 1, got {theta}")
        if self.family in (GeneratorFamily.CLAYTON, GeneratorFamily.FRANK) and theta <= 0.0:
            raise DomainError(f"{self.family.value} requires theta > 0, got {theta}")

    @property
    def is_independence(self) -> bool:
        return self.family in (GeneratorFamily.GUMBEL, GeneratorFamily.JOE) and self.theta == 1.0

    def psi(self, t: ArrayLike) -> NDArray[np.float64] | float:
        return psi(self, t)

    def psi_inverse(self, s: ArrayLike) -> NDArray[np.float64] | float:
        return psi_inverse(self, s)

    def cdf(self, u: ArrayLike) -> NDArray[np.float64] | float:
        return ac_cdf(self, u)

    def __str__(self) -> str:
        return f"{self.family.value}(theta={self.theta:.6g})"


def _shape_out(values: NDArray[np.float64], scalar: bool) -> NDArray[np.float64] | float:
    return float(values) if scalar else values


def _unit_interval(t: ArrayLike, name: str = "t") -> tuple[NDArray[np.float64], bool]:
    arr = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr > 1.0):
        raise DomainError(f"{name} must lie in (0, 1]")
    return arr, arr.ndim == 0


def psi(gen: ArchimedeanGenerator, t: ArrayLike) -> NDArray[np.float64] | float:
    """Generator value; ``psi(gen, 1) == 0`` and strictly decreasing on (0, 1]."""

    arr, scalar = _unit_interval(t)
    theta = gen.theta
    with np.errstate(divide="ignore", over="ignore"):
        if gen.family is GeneratorFamily.GUMBEL:
            out = (-np.log(arr)) ** theta
        elif gen.family is GeneratorFamily.CLAYTON:
            out = np.expm1(-theta * np.log(arr)) / theta
        elif gen.family is GeneratorFamily.FRANK:
            out = -np.log(np.expm1(-theta * arr) / np.expm1(-theta))
        else:
            out = -np.log1p(-((1.0 - arr) ** theta))
    return _shape_out(np.asarray(out, dtype=float), scalar)


def psi_inverse(gen: ArchimedeanGenerator, s: ArrayLike) -> NDArray[np.float64] | float:
    """Inverse generator, i.e. the Laplace transform of the family's frailty."""

    arr = np.asarray(s, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0):
        raise DomainError("s must be >= 0")
    scalar = arr.ndim == 0
    theta = gen.theta
    with np.errstate(over="ignore", under="ignore"):
        if gen.family is GeneratorFamily.GUMBEL:
            out = np.exp(-(arr ** (1.0 / theta)))
        elif gen.family is GeneratorFamily.CLAYTON:
            out = np.exp(-np.log1p(theta * arr) / theta)
        elif gen.family is GeneratorFamily.FRANK:
            out = -np.log1p(np.expm1(-theta) * np.exp(-arr)) / theta
        else:
            out = 1.0 - (-np.expm1(-arr)) ** (1.0 / theta)
    return _shape_out(np.asarray(out, dtype=float), scalar)


def psi_derivative(gen: ArchimedeanGenerator, t: ArrayLike) -> NDArray[np.float64] | float:
    """First derivative of ``psi``; strictly negative on (0, 1)."""

    arr, scalar = _unit_interval(t)
    theta = gen.theta
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if gen.family is GeneratorFamily.GUMBEL:
            out = -theta * (-np.log(arr)) ** (theta - 1.0) / arr
        elif gen.family is GeneratorFamily.CLAYTON:
            out = -(arr ** (-theta - 1.0))
        elif gen.family is GeneratorFamily.FRANK:
            out = -theta / np.expm1(theta * arr)
        else:
            tail = (1.0 - arr) ** theta
            out = -theta * (1.0 - arr) ** (theta - 1.0) / (1.0 - tail)
    return _shape_out(np.asarray(out, dtype=float), scalar)


def ac_cdf(gen: ArchimedeanGenerator, u: ArrayLike) -> NDArray[np.float64] | float:
    """Exchangeable Archimedean copula ``psi_inverse(sum_i psi(u_i))``.

    ``u`` is a d-vector or an (n, d) matrix with d >= 2. Rows with at most one
    coordinate below 1 return that coordinate exactly.
    """

    arr = np.asarray(u, dtype=float)
    scalar = arr.ndim == 1
    rows = np.atleast_2d(arr)
    if rows.ndim != 2 or rows.shape[1] < 2:
        raise DomainError("ac_cdf needs at least two coordinates")
    _unit_interval(rows, "u")
    total = np.sum(psi(gen, rows), axis=1)
    out = np.asarray(psi_inverse(gen, total), dtype=float)
    trivial = np.sum(rows < 1.0, axis=1) <= 1
    out = np.where(trivial, rows.min(axis=1), out)
    return float(out[0]) if scalar else out


def bivariate_cdf(gen: ArchimedeanGenerator, u: ArrayLike, v: ArrayLike) -> NDArray[np.float64] | float:
    """Closed-form bivariate copula of each family."""

    uu, scalar_u = _unit_interval(u, "u")
    vv, scalar_v = _unit_interval(v, "v")
    theta = gen.theta
    if gen.family is GeneratorFamily.GUMBEL:
        out = np.exp(-(((-np.log(uu)) ** theta + (-np.log(vv)) ** theta) ** (1.0 / theta)))
    elif gen.family is GeneratorFamily.CLAYTON:
        base = np.maximum(uu ** -theta + vv ** -theta - 1.0, 0.0)
        out = base ** (-1.0 / theta)
    elif gen.family is GeneratorFamily.FRANK:
        num = np.expm1(-theta * uu) * np.expm1(-theta * vv)
        out = -np.log1p(num / np.expm1(-theta)) / theta
    else:
        a = (1.0 - uu) ** theta
        b = (1.0 - vv) ** theta
        out = 1.0 - (a + b - a * b) ** (1.0 / theta)
    return _shape_out(np.asarray(out, dtype=float), scalar_u and scalar_v)


def ac_bivariate_density(
    gen: ArchimedeanGenerator, u: ArrayLike, v: ArrayLike
) -> NDArray[np.float64] | float:
    """Mixed partial derivative of the bivariate copula on the open unit square."""

    uu = np.asarray(u, dtype=float)
    vv = np.asarray(v, dtype=float)
    if np.any(~((uu > 0.0) & (uu < 1.0))) or np.any(~((vv > 0.0) & (vv < 1.0))):
        raise DomainError("density is defined on the open unit square only")
    scalar = uu.ndim == 0 and vv.ndim == 0
    theta = gen.theta
    if gen.family is GeneratorFamily.GUMBEL:
        x = -np.log(uu)
        y = -np.log(vv)
        a = (x**theta + y**theta) ** (1.0 / theta)
        cdf = np.exp(-a)
        out = cdf / (uu * vv) * (x * y) ** (theta - 1.0) * a ** (1.0 - 2.0 * theta) * (a + theta - 1.0)
    elif gen.family is GeneratorFamily.CLAYTON:
        base = uu**-theta + vv**-theta - 1.0
        out = (1.0 + theta) * (uu * vv) ** (-theta - 1.0) * base ** (-1.0 / theta - 2.0)
    elif gen.family is GeneratorFamily.FRANK:
        a = np.expm1(-theta)
        denom = (a + np.expm1(-theta * uu) * np.expm1(-theta * vv)) ** 2
        out = -theta * a * np.exp(-theta * (uu + vv)) / denom
    else:
        ub = (1.0 - uu) ** theta
        vb = (1.0 - vv) ** theta
        s = ub + vb - ub * vb
        out = (
            s ** (1.0 / theta - 2.0)
            * (1.0 - uu) ** (theta - 1.0)
            * (1.0 - vv) ** (theta - 1.0)
            * (theta - 1.0 + s)
        )
    return _shape_out(np.asarray(out, dtype=float), scalar)


def bivariate_grid(
    gen: ArchimedeanGenerator, points: int = 50
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """CDF and density of the bivariate copula on a regular interior grid.

    Returns ``(u, v, cdf, density)`` as flattened arrays of length ``points**2``.
    """

    if points < 2:
        raise DomainError("grid needs at least two points per axis")
    axis = (np.arange(points) + 0.5) / points
    uu, vv = np.meshgrid(axis, axis, indexing="ij")
    uu = uu.ravel()
    vv = vv.ravel()
    cdf = np.asarray(bivariate_cdf(gen, uu, vv), dtype=float)
    density = np.asarray(ac_bivariate_density(gen, uu, vv), dtype=float)
    return uu, vv, cdf, density
