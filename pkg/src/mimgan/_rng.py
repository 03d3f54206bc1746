"""Seeded random streams.

Every stochastic routine takes a single integer seed and derives its
streams from a Philox (counter-based) generator keyed by that seed plus a
tuple of stream labels, so results do not depend on call order.
"""

from __future__ import annotations

import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _key(label) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label) & _MASK64
    return zlib.crc32(str(label).encode("utf-8"))


def make_rng(seed: int, *labels) -> np.random.Generator:
    """Return an independent generator for ``(seed, *labels)``."""
    entropy = [int(seed) & _MASK64] + [_key(lab) for lab in labels]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
