"""Tables over all 2^M bit vectors, shared by the exhaustive oracles."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

MAX_ENUM_BITS = 20


def _check(m: int) -> None:
    if not (1 <= m <= MAX_ENUM_BITS):
        raise ValueError(f"exhaustive enumeration supports 1..{MAX_ENUM_BITS} bits, got {m}")


@lru_cache(maxsize=8)
def bit_matrix(m: int) -> np.ndarray:
    """(2^m, m) uint8 matrix; row k holds the bits of k, position 0 first."""
    _check(m)
    masks = np.arange(1 << m, dtype=np.uint32)[:, None]
    return ((masks >> np.arange(m, dtype=np.uint32)[None, :]) & 1).astype(np.uint8)


@lru_cache(maxsize=8)
def popcount_table(m: int) -> np.ndarray:
    _check(m)
    return bit_matrix(m).sum(axis=1).astype(np.int64)


@lru_cache(maxsize=8)
def max_zero_run_table(m: int) -> np.ndarray:
    """Longest zero-run of every m-bit vector, indexed by its integer value."""
    _check(m)
    bits = bit_matrix(m)
    n = bits.shape[0]
    run = np.zeros(n, dtype=np.int64)
    best = np.zeros(n, dtype=np.int64)
    for t in range(m):
        run = np.where(bits[:, t], 0, run + 1)
        np.maximum(best, run, out=best)
    return best


@lru_cache(maxsize=8)
def cumsum_matrix(m: int) -> np.ndarray:
    """(2^m, m) running popcounts, used for feasibility checks."""
    _check(m)
    return bit_matrix(m).cumsum(axis=1, dtype=np.int64)
