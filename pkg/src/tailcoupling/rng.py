"""Counter-based random streams for reproducible parallel sampling.

Rows are grouped into fixed-size blocks whose size depends only on the row
width. Block ``b`` of stream ``s`` under seed ``seed`` is drawn from a Philox
generator keyed by ``(seed, s)`` with its counter started at ``b << 64``, so
every block is an independent, addressable stream. Results depend on
``(seed, stream, count, width)`` and never on the number of workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, TypeVar

import numpy as np

T = TypeVar("T")

BLOCK_ELEMENTS = 1 << 20
MAX_BLOCK_ROWS = 1 << 14

# stream identifiers, one per kind of draw
STREAM_COUPLING = 0
STREAM_COMONOTONE = 1
STREAM_CONDITIONAL = 2
STREAM_INDEPENDENT = 3
STREAM_PROBE = 4


def block_rows(width: int) -> int:
    return max(1, min(MAX_BLOCK_ROWS, BLOCK_ELEMENTS // max(int(width), 1)))


def block_generator(seed: int, stream: int, block: int) -> np.random.Generator:
    key = (int(seed) % (1 << 64)) | (int(stream) << 64)
    return np.random.Generator(np.random.Philox(key=key, counter=[0, int(block), 0, 0]))


def open_uniform(rng: np.random.Generator, shape) -> np.ndarray:
    """Uniform draws on the open interval (0, 1)."""
    u = rng.random(shape)
    # random() is on [0, 1); lift the (probability 2**-53) zero
    np.maximum(u, 2.0**-54, out=u)
    return u


def map_blocks(
    count: int,
    width: int,
    seed: int,
    stream: int,
    func: Callable[[np.ndarray], T],
    workers: int = 1,
) -> Iterator[T]:
    """Apply ``func`` to each block of ``(rows, width)`` open uniforms, in block order."""
    if count < 1:
        raise ValueError("count must be positive")
    if workers < 1:
        raise ValueError("workers must be at least 1")
    rows = block_rows(width)
    starts = range(0, count, rows)

    def run(block: int) -> T:
        nrows = min(rows, count - block * rows)
        rng = block_generator(seed, stream, block)
        return func(open_uniform(rng, (nrows, width)))

    nblocks = len(starts)
    if workers == 1 or nblocks == 1:
        for b in range(nblocks):
            yield run(b)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # bounded look-ahead keeps memory flat for wide rows
        window = 4 * workers
        futures = [pool.submit(run, b) for b in range(min(window, nblocks))]
        nxt = len(futures)
        for i in range(nblocks):
            result = futures[i].result()
            futures[i] = None
            if nxt < nblocks:
                futures.append(pool.submit(run, nxt))
                nxt += 1
            yield result
