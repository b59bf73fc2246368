"""Deterministic keyed random streams.

Every random draw in the library comes from a generator keyed by the master
seed plus the structural coordinates of the draw (step, player, resource id,
...).  Results are therefore reproducible and independent of evaluation
order: evaluating players concurrently or sequentially exposes the same
values.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _key_entropy(key) -> int:
    if isinstance(key, (int, np.integer)):
        return int(key) & _MASK64
    digest = hashlib.blake2s(str(key).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def keyed_rng(master_seed: int, *keys) -> np.random.Generator:
    """Generator for the stream identified by (master_seed, *keys).

    String keys are hashed with blake2s, so resource ids participate in the
    key without relying on Python's salted hash().
    """
    entropy = [int(master_seed) & _MASK64]
    entropy.extend(_key_entropy(k) for k in keys)
    seq = np.random.SeedSequence(entropy)
    return np.random.Generator(np.random.PCG64(seq))
