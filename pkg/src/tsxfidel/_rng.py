"""Keyed random streams.

Every stochastic step owns a private generator derived from the master seed
plus the identifiers of the work item (series id, window anchor, horizon,
method tag, ...). Streams are therefore independent of scheduling order,
which keeps parallel runs bit-reproducible.
"""

from __future__ import annotations

import hashlib

import numpy as np

Key = int | str


def seed_sequence(*keys: Key) -> np.random.SeedSequence:
    """Derive a SeedSequence from a tuple of ints and strings.

    Uses blake2b rather than ``hash()`` so the derivation is stable across
    processes and interpreter runs.
    """
    h = hashlib.blake2b(digest_size=16)
    for key in keys:
        if isinstance(key, (int, np.integer)):
            h.update(b"i" + str(int(key)).encode())
        elif isinstance(key, str):
            h.update(b"s" + key.encode())
        else:
            raise TypeError(f"rng keys must be int or str, got {type(key).__name__}")
        h.update(b"\x1f")
    return np.random.SeedSequence(int.from_bytes(h.digest(), "big"))


def keyed_rng(*keys: Key) -> np.random.Generator:
    """Generator for the stream identified by ``keys``."""
    return np.random.default_rng(seed_sequence(*keys))
