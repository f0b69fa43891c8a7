"""Reproducible random streams.

One 64-bit seed drives every randomized routine in the package.  Each
logically independent consumer gets its own named substream derived from
(seed, stream id) through a counter-based Philox generator, so adding or
reordering consumers never perturbs the draws of another, and serial and
parallel execution see identical streams.
"""

from __future__ import annotations

import numpy as np

# Fixed stream ids.  Never renumber: witness reproducibility depends on them.
STREAM_CONJUGATORS = 1
STREAM_CERT_CONTAINMENT = 2
STREAM_CERT_LIPSCHITZ = 3
STREAM_SAMPLES = 4
STREAM_PROBE = 5


def substream(seed: int, *ids: int) -> np.random.Generator:
    """Return the Generator for the named substream of ``seed``.

    ``ids`` is a short tuple of small non-negative integers naming the
    consumer (stream id first, then optional per-check counters).
    """
    if not 0 <= int(seed) < 2**64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    key = np.zeros(2, dtype=np.uint64)
    key[0] = np.uint64(int(seed))
    mixed = np.uint64(0)
    for part in ids:
        if part < 0:
            raise ValueError("stream ids must be non-negative")
        # Fibonacci-style mixing keeps distinct id tuples on distinct keys.
        mixed = np.uint64((int(mixed) * 0x9E3779B97F4A7C15 + int(part) + 1) % 2**64)
    key[1] = mixed
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(seed: int, *ids: int) -> int:
    """Collapse a named substream to a scalar seed for a nested consumer."""
    return int(substream(seed, *ids).integers(2**63))
