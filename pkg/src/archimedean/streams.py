"""Reproducible random substreams indexed by purpose and row block.

Every sampler splits its rows into blocks of ``BLOCK_ROWS``; block ``b`` draws
from a Philox stream keyed by ``(seed, purpose, b)``. Results therefore do not
depend on how many workers process the blocks.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from errors import DomainError

BLOCK_ROWS = 4096

# purpose keys
AC_SAMPLE = 1
HAC_SAMPLE = 2
MARGINAL_SAMPLE = 3
VOLATILITY_SIMULATION = 4
FIT_STARTS = 5
BACKTEST_DAY = 6


def substream(seed: int, *key: int) -> np.random.Generator:
    if seed < 0:
        raise DomainError(f"seed must be non-negative, got {seed}")
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(sequence))


def derived_seed(seed: int, *key: int) -> int:
    """An integer seed for a nested unit of work, e.g. one back-test day."""

    if seed < 0:
        raise DomainError(f"seed must be non-negative, got {seed}")
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


def run_blocks(
    n: int,
    seed: int,
    purpose: int,
    draw: Callable[[int, np.random.Generator], NDArray[np.float64]],
    *,
    max_workers: int = 1,
) -> NDArray[np.float64]:
    """Call ``draw(rows, rng)`` once per block and stack the results in row order."""

    if n < 1:
        raise DomainError(f"number of rows must be >= 1, got {n}")
    starts = list(range(0, n, BLOCK_ROWS))

    def task(index: int) -> NDArray[np.float64]:
        rows = min(BLOCK_ROWS, n - starts[index])
        return draw(rows, substream(seed, purpose, index))

    if max_workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            parts = list(pool.map(task, range(len(starts))))
    else:
        parts = [task(i) for i in range(len(starts))]
    return np.concatenate(parts, axis=0)
