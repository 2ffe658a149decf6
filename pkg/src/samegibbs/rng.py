"""Deterministic random substreams derived by keyed hashing.

All randomness in the package flows from a single master seed. Each sampling
site gets its own counter-based (Philox) generator keyed by hashing
``(seed, label, *indices)``, so results never depend on execution order or
on how work is split across threads.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stream_key(seed: int, label: str, *indices: int) -> np.ndarray:
    """Hash (seed, label, indices) into a 128-bit Philox key."""
    text = ":".join([str(int(seed)), label] + [str(int(i)) for i in indices])
    digest = hashlib.blake2b(text.encode(), digest_size=16).digest()
    return np.frombuffer(digest, dtype=np.uint64).copy()


def substream(seed: int, label: str, *indices: int) -> np.random.Generator:
    """Independent generator for one (label, indices) sampling site."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, label, *indices)))


def derive_seed(seed: int, label: str, *indices: int) -> int:
    """Collapse a stream key to a plain integer sub-seed."""
    return int(stream_key(seed, label, *indices)[0])
