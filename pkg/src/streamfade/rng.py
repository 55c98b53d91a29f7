"""Counter-based random numbers for reproducible parallel Monte Carlo.

Every variate is a pure function of (seed, stream, counter), so trial
substreams can be generated in any order, on any number of workers, and
always reproduce bit-for-bit.  The mixer is the SplitMix64 finalizer
applied twice: once to derive a per-(seed, stream) base state and once
per counter value.  Uniforms use the top 53 bits.
"""
from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_SEED_SALT = np.uint64(0xD1B54A32D192ED03)
_INV_2_53 = float(2.0**-53)


def _finalize(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def stream_base(seed: int, streams: np.ndarray) -> np.ndarray:
    """Mix a 64-bit seed with stream indices into independent base states."""
    with np.errstate(over="ignore"):
        s = _finalize(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) * _MIX1 + _SEED_SALT)
        return _finalize(s ^ (streams.astype(np.uint64) * _GOLDEN + _MIX2))


def uniform_matrix(seed: int, start: int, stop: int, count: int) -> np.ndarray:
    """Uniforms in [0, 1) for streams start..stop-1, `count` values each.

    Returns an array of shape (stop - start, count); row i is the substream
    for stream index start + i.
    """
    if stop < start or start < 0:
        raise ValueError("stream range must be nonnegative and ordered")
    with np.errstate(over="ignore"):
        base = stream_base(seed, np.arange(start, stop, dtype=np.uint64))[:, None]
        ctr = np.arange(1, count + 1, dtype=np.uint64)[None, :]
        z = _finalize(base + ctr * _GOLDEN)
    return (z >> np.uint64(11)).astype(np.float64) * _INV_2_53


def uniform_stream(seed: int, stream: int, count: int) -> np.ndarray:
    """Uniforms in [0, 1) for a single substream."""
    return uniform_matrix(seed, stream, stream + 1, count)[0]


def exponential_matrix(seed: int, start: int, stop: int, count: int) -> np.ndarray:
    """Unit-mean exponentials via the inverse CDF, -ln(1 - u)."""
    return -np.log1p(-uniform_matrix(seed, start, stop, count))
