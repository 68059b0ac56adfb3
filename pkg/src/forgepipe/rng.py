"""Counter-based random streams.

Every random draw in the pipeline goes through a Philox generator keyed by
(seed, entity, index) so that regenerating any single entity (a video, a clip,
an epoch) yields identical values regardless of what else was generated.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def stable_id(text: str) -> int:
    """Map a string to a stable 64-bit integer (platform independent)."""
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def keyed_rng(seed: int, entity: int | str = 0, index: int = 0) -> np.random.Generator:
    """Generator for the (seed, entity, index) stream.

    `entity` may be a string (hashed via :func:`stable_id`) or an integer.
    Streams with distinct keys are statistically independent.
    """
    ent = stable_id(entity) if isinstance(entity, str) else int(entity) & _MASK64
    bits = np.random.Philox(counter=[0, 0, int(index) & _MASK64, ent],
                            key=[int(seed) & _MASK64, 0x9E3779B97F4A7C15])
    return np.random.Generator(bits)
