"""Deterministic, chunk-parallel random streams.

Every random draw in the package is addressed by a *seed key*: a tuple of
non-negative integers whose first element is the user's root seed and whose
remaining elements name the stream (which arm, which channel, ...). Large
draws are split into fixed-size chunks, chunk ``c`` of key ``k`` drawing from
``SeedSequence(k[0], spawn_key=k[1:] + (c,))``. The output therefore does not
depend on how many worker threads produced the chunks.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Sequence, Union

import numpy as np

CHUNK_SIZE = 1 << 16

SeedLike = Union[int, Sequence[int]]

# stream labels used as the second element of derived seed keys
STATE = 0
PHASE = 1
LOSS = 2
SHUFFLE = 3
BOOTSTRAP = 4
SERIES = 5


def seed_key(seed: SeedLike) -> tuple[int, ...]:
    """Normalize an int or int sequence to a seed-key tuple."""
    if isinstance(seed, (int, np.integer)):
        key = (int(seed),)
    else:
        key = tuple(int(s) for s in seed)
    if not key:
        raise ValueError("empty seed key")
    if any(k < 0 for k in key):
        raise ValueError(f"seed key entries must be non-negative, got {key}")
    return key


def derive(seed: SeedLike, *labels: int) -> tuple[int, ...]:
    return seed_key(seed) + tuple(int(x) for x in labels)


def generator(seed: SeedLike) -> np.random.Generator:
    key = seed_key(seed)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key[0], spawn_key=key[1:])))


def _fill_chunk(key, out, start, stop, chunk):
    rng = generator(key + (chunk,))
    out[start:stop] = rng.standard_normal(out[start:stop].shape)


def standard_normal(seed: SeedLike, n: int, cols: int | None = None, threads: int = 1) -> np.ndarray:
    """Draw ``n`` rows of standard normals from chunked substreams.

    The result is bit-identical for any ``threads`` value.
    """
    key = seed_key(seed)
    shape = (n,) if cols is None else (n, cols)
    out = np.empty(shape)
    bounds = [(c, s, min(s + CHUNK_SIZE, n)) for c, s in enumerate(range(0, n, CHUNK_SIZE))]
    if threads <= 1 or len(bounds) == 1:
        for c, s, e in bounds:
            _fill_chunk(key, out, s, e, c)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda b: _fill_chunk(key, out, b[1], b[2], b[0]), bounds))
    return out
