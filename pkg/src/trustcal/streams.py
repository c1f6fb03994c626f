"""Deterministic RNG substreams.

Every logical stream (pool build, session, agent, chain, restart) derives its
own generator from (seed, stream path), so runs are reproducible and the
streams are independent of evaluation order. String path elements are hashed
with SHA-256 so the mapping is stable across processes and Python versions.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _path_id(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part) & _MASK64
    if isinstance(part, str):
        digest = hashlib.sha256(part.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little")
    raise TypeError(f"stream path elements must be int or str, got {type(part)!r}")


def substream(seed: int, *path) -> np.random.Generator:
    """Generator for the stream identified by (seed, *path)."""
    key = tuple(_path_id(p) for p in path)
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=key))
