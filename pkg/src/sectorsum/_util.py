"""Small shared helpers: seeded substreams and optional thread fan-out."""
from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def thread_count() -> int:
    """Thread cap, controlled by the SECTORSUM_THREADS environment variable."""
    raw = os.environ.get("SECTORSUM_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def pmap(fn, items):
    """Map preserving order; uses a thread pool when SECTORSUM_THREADS > 1.

    Results are collected by index, so the output is identical to the
    serial map regardless of scheduling.
    """
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def substream(seed: int, *tags) -> np.random.Generator:
    """Deterministic child generator for (seed, tags).

    Tags are strings or ints; strings are crushed through crc32 so the
    derivation is stable across runs and platforms.
    """
    keys = [int(seed) & 0xFFFFFFFF]
    for tag in tags:
        if isinstance(tag, str):
            keys.append(zlib.crc32(tag.encode("utf8")))
        else:
            keys.append(int(tag) & 0xFFFFFFFF)
    return np.random.default_rng(np.random.SeedSequence(keys))
