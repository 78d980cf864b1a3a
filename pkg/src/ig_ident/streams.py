"""Counter-based random substreams.

Every stochastic routine takes a ``numpy.random.Generator``. Parallel drivers
split work into fixed-size blocks and derive the generator of block ``k`` from
``(master_seed, tag, k)`` only, so results never depend on how blocks are
scheduled across workers.
"""

from __future__ import annotations

import zlib

import numpy as np

# Trials/samples per block. Fixed so worker count cannot change stream layout.
BLOCK_SIZE = 256


def _tag_key(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def substream(master_seed: int, tag: str, index: int) -> np.random.Generator:
    """Philox generator keyed by ``(master_seed, tag, index)``."""
    if master_seed < 0 or index < 0:
        raise ValueError("seed and index must be non-negative")
    seq = np.random.SeedSequence([master_seed & 0xFFFFFFFFFFFFFFFF, _tag_key(tag), index])
    return np.random.Generator(np.random.Philox(seq))


def make_rng(seed: int | None = None) -> np.random.Generator:
    """Seeded Philox stream, or fresh OS entropy when ``seed`` is None."""
    if seed is None:
        return np.random.default_rng()
    return substream(seed, "default", 0)


def block_counts(total: int, block_size: int = BLOCK_SIZE) -> list[int]:
    """Split ``total`` items into consecutive blocks of ``block_size``."""
    full, rest = divmod(total, block_size)
    counts = [block_size] * full
    if rest:
        counts.append(rest)
    return counts
