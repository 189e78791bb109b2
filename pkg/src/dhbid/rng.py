"""Seeded random-stream helpers.

All stochastic code in the package draws from counter-based Philox streams keyed
by (seed, stream index), so scenario i is bit-identical no matter how many other
scenarios are generated or in which order. ``derive_seed`` folds string/int tags
into a fresh 63-bit seed so independent purposes (price walk, wind walk, ...)
never share a stream.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    """Generator for one scenario stream, independent of all other streams."""
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(seed: int, *tags: object) -> int:
    """Stable sub-seed for a named purpose, e.g. derive_seed(s, date, "wind")."""
    h = hashlib.sha256()
    h.update(str(int(seed)).encode())
    for tag in tags:
        h.update(b"\x1f")
        h.update(str(tag).encode())
    return int.from_bytes(h.digest()[:8], "big") >> 1
