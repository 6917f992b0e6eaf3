"""Deterministic seed derivation for labeled sub-streams.

Every randomized operation in the toolkit takes an integer seed and derives
independent child seeds for its internal stages by hashing the parent seed
together with string/int labels.  This keeps whole pipelines reproducible
from a single master seed without any global RNG state.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK = (1 << 63) - 1


def derive(seed: int, *labels) -> int:
    """Derive a child seed from ``seed`` and a label path.

    Stable across processes and platforms (sha256-based, not ``hash()``).
    """
    h = hashlib.sha256()
    h.update(str(int(seed)).encode())
    for lab in labels:
        h.update(b"/")
        h.update(str(lab).encode())
    return int.from_bytes(h.digest()[:8], "little") & _MASK


def generator(seed: int, *labels) -> np.random.Generator:
    """A fresh PCG64 generator for the given seed/label path."""
    if labels:
        seed = derive(seed, *labels)
    return np.random.Generator(np.random.PCG64(seed))
