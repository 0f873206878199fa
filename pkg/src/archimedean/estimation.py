"""Bottom-up structure and parameter estimation from a Kendall tau matrix."""

from __future__ import annotations

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from errors import DataError

from .generators import ArchimedeanGenerator, GeneratorFamily
from .hac import HacInternal, HacLeaf, HacModel, HacNode
from .kendall import theta_from_tau

logger = logging.getLogger(__name__)

# generators in the supported ranges cannot express tau <= 0
TAU_FLOOR = 1e-6
TAU_CEILING = 1.0 - 1e-6


def _validate(tau_matrix: ArrayLike) -> NDArray[np.float64]:
    tau = np.asarray(tau_matrix, dtype=float)
    if tau.ndim != 2 or tau.shape[0] != tau.shape[1] or tau.shape[0] < 2:
        raise DataError(f"Kendall matrix must be square with d >= 2, got shape {tau.shape}")
    if not np.all(np.isfinite(tau)):
        raise DataError("Kendall matrix contains non-finite values")
    if not np.allclose(tau, tau.T, atol=1e-10):
        raise DataError("Kendall matrix is not symmetric")
    if not np.allclose(np.diag(tau), 1.0, atol=1e-10):
        raise DataError("Kendall matrix must have a unit diagonal")
    if np.any(np.abs(tau) > 1.0 + 1e-12):
        raise DataError("Kendall matrix entries must lie in [-1, 1]")
    return tau


def _calibrated_theta(family: GeneratorFamily, tau: float, label: str) -> tuple[float, float]:
    used = tau
    if tau < TAU_FLOOR:
        logger.warning("tau %.6g for %s floored at %.0e", tau, label, TAU_FLOOR)
        used = TAU_FLOOR
    elif tau > TAU_CEILING:
        logger.warning("tau %.6g for %s capped at %.6f", tau, label, TAU_CEILING)
        used = TAU_CEILING
    return used, theta_from_tau(family, used)


def estimate_structure(tau_matrix: ArrayLike, family: GeneratorFamily | str) -> HacModel:
    """Greedy agglomeration of clusters by mean pairwise Kendall tau.

    The pair of clusters with the largest mean tau merges first and receives
    the generator calibrated from that mean. A parent theta above the smallest
    child theta is clamped down to it so that the result always nests.
    """

    tau = _validate(tau_matrix)
    family = GeneratorFamily.parse(family)
    clusters: list[HacNode] = [HacLeaf(i) for i in range(tau.shape[0])]
    members: list[list[int]] = [[i] for i in range(tau.shape[0])]

    while len(clusters) > 1:
        best: tuple[float, int, int] | None = None
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                mean_tau = float(tau[np.ix_(members[i], members[j])].mean())
                if best is None or mean_tau > best[0]:
                    best = (mean_tau, i, j)
        assert best is not None
        mean_tau, i, j = best
        pair = (clusters[i], clusters[j])
        label = "+".join(str(k + 1) for k in sorted(members[i] + members[j]))
        used_tau, theta = _calibrated_theta(family, mean_tau, label)

        child_thetas = [c.theta for c in pair if isinstance(c, HacInternal)]
        if child_thetas and theta > min(child_thetas):
            logger.warning(
                "theta %.6g for %s clamped to %.6g to keep the nesting order",
                theta,
                label,
                min(child_thetas),
            )
            theta = min(child_thetas)

        node = HacInternal(ArchimedeanGenerator(family, theta), pair, tau=used_tau)
        merged = members[i] + members[j]
        for index in (j, i):
            del clusters[index]
            del members[index]
        clusters.append(node)
        members.append(merged)
        logger.debug("merged %s at tau=%.6g theta=%.6g", label, used_tau, theta)

    root = clusters[0]
    assert isinstance(root, HacInternal)
    return HacModel(root)


def exchangeable_model(tau_matrix: ArrayLike, family: GeneratorFamily | str) -> HacModel:
    """Single-node model calibrated from the mean off-diagonal tau."""

    tau = _validate(tau_matrix)
    family = GeneratorFamily.parse(family)
    d = tau.shape[0]
    mean_tau = float(tau[~np.eye(d, dtype=bool)].mean())
    used_tau, theta = _calibrated_theta(family, mean_tau, "all assets")
    node = HacInternal(
        ArchimedeanGenerator(family, theta),
        tuple(HacLeaf(i) for i in range(d)),
        tau=used_tau,
    )
    return HacModel(node)
