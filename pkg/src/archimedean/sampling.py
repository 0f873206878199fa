"""Marshall-Olkin sampling of exchangeable and hierarchical Archimedean copulas."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from errors import DomainError, NestingError

from . import streams
from .frailty import inner_frailty, root_frailty
from .generators import ArchimedeanGenerator, psi_inverse
from .hac import HacInternal, HacLeaf, HacModel, check_nesting

_LOWEST = np.finfo(float).tiny
_HIGHEST = np.nextafter(1.0, 0.0)


def _to_uniform(gen: ArchimedeanGenerator, e: NDArray[np.float64], v: NDArray[np.float64]) -> NDArray[np.float64]:
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        s = e / v
    s = np.nan_to_num(s, nan=0.0, posinf=np.inf)
    u = np.asarray(psi_inverse(gen, s), dtype=float)
    return np.clip(u, _LOWEST, _HIGHEST)


def sample_ac(
    gen: ArchimedeanGenerator, d: int, n: int, seed: int, *, max_workers: int = 1
) -> NDArray[np.float64]:
    """Draw ``n`` rows of a ``d``-dimensional exchangeable Archimedean copula.

    Each row shares one frailty ``V`` and sets ``u_j = psi_inverse(E_j / V)``
    with iid unit exponentials ``E_j``.
    """

    if d < 2:
        raise DomainError(f"an Archimedean copula needs d >= 2, got {d}")

    def draw(rows: int, rng: np.random.Generator) -> NDArray[np.float64]:
        v = root_frailty(gen, rows, rng)
        e = rng.standard_exponential((rows, d))
        return _to_uniform(gen, e, v[:, None])

    return streams.run_blocks(n, seed, streams.AC_SAMPLE, draw, max_workers=max_workers)


def _fill(
    node: HacInternal,
    v: NDArray[np.float64],
    rng: np.random.Generator,
    out: NDArray[np.float64],
) -> None:
    for child in node.children:
        if isinstance(child, HacLeaf):
            e = rng.standard_exponential(v.size)
            out[:, child.asset_index] = _to_uniform(node.generator, e, v)
        else:
            _fill(child, inner_frailty(node.generator, child.generator, v, rng), rng, out)


def sample_hac(model: HacModel, n: int, seed: int, *, max_workers: int = 1) -> NDArray[np.float64]:
    """Draw ``n`` rows of a nested Archimedean copula by recursive frailties.

    The root frailty follows the family's root law; every internal child gets
    an inner frailty conditional on its parent's; leaves are mapped through
    their parent's inverse generator.
    """

    if not check_nesting(model):
        raise NestingError(f"structure {model.structure_string} violates the nesting condition")
    d = model.dimension

    def draw(rows: int, rng: np.random.Generator) -> NDArray[np.float64]:
        out = np.empty((rows, d))
        _fill(model.root, root_frailty(model.root.generator, rows, rng), rng, out)
        return out

    return streams.run_blocks(n, seed, streams.HAC_SAMPLE, draw, max_workers=max_workers)
