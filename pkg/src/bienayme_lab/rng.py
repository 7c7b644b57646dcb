"""Reproducible random streams.

All randomness in the package flows through numpy Generators backed by the
Philox counter-based bit generator.  Philox is pure 64-bit integer
arithmetic, so streams are bit-exact across platforms and numpy builds.

Stream splitting convention: the 128-bit Philox key is (seed, replicate).
Distinct replicates of one experiment therefore get provably independent
streams, and results do not depend on scheduling order.  The draw index is
the natural Philox counter, which advances with consumption.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream"]


def stream(seed: int, replicate: int = 0) -> np.random.Generator:
    """Return the Generator for (seed, replicate).

    Calling twice with the same arguments yields identical streams.
    """
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, replicate & 0xFFFFFFFFFFFFFFFF],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
