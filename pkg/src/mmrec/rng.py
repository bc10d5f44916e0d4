"""Deterministic, seed-splittable random streams.

Every stochastic step in the pipeline draws from a named child stream
derived from the run seed plus a tuple of tags (strings or ints).  Streams
are numpy PCG64 generators keyed through SeedSequence, so two runs with
the same seed and tags produce bit-identical draws on any platform, and
adding an unrelated stream never perturbs an existing one.

String tags are hashed with blake2b (Python's builtin ``hash`` is salted
per process and would break cross-run determinism).
"""

from __future__ import annotations

import hashlib

import numpy as np


def _tag_to_int(tag) -> int:
    if isinstance(tag, (int, np.integer)):
        return int(tag) & 0xFFFFFFFFFFFFFFFF
    digest = hashlib.blake2b(str(tag).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive(seed: int, *tags) -> np.random.Generator:
    """Return a fresh generator for the stream named by (seed, *tags)."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_tag_to_int(t) for t in tags]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
