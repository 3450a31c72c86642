"""Counter-based seed derivation.

Every random stream is derived from ``(seed, purpose tag, index)``, so results
do not depend on the order in which trials or layers are processed.
"""

from __future__ import annotations

import zlib

import numpy as np


def _entropy(seed: int, tag: str, index: int) -> list[int]:
    return [int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(tag.encode("utf-8")), int(index)]


def derive_rng(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(_entropy(seed, tag, index)))


def derive_seed(seed: int, tag: str, index: int = 0) -> int:
    """A 64-bit sub-seed."""
    state = np.random.SeedSequence(_entropy(seed, tag, index)).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])
