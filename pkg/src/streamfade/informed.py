"""Genie bound: best achievable decode set given the whole channel realization.

With all block capacities known in advance, the cumulative number of
decodable messages up to block t is capped by min(t, floor(I_tot(t)/R)),
where I_tot is the running mutual-information total.  A greedy scan attains
the cap; a second pass then re-spreads the decoded positions to minimize the
longest gap without giving up any throughput.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _bits
from .channel import ChannelTrace


def _capacities(trace) -> np.ndarray:
    if isinstance(trace, ChannelTrace):
        return trace.capacities
    return np.asarray(trace, dtype=np.float64)


@dataclass(frozen=True)
class GreedyResult:
    """Throughput-maximal decode vector and its running totals."""

    decode_vector: np.ndarray  # 0/1 per block
    cumulative_decoded: np.ndarray
    cumulative_mi: np.ndarray


def greedy_allocate(trace, rate: float) -> GreedyResult:
    """Decode message t whenever the running MI covers one more message.

    Marks position t iff I_tot(t) >= (decoded_so_far + 1) * rate.
    """
    if rate <= 0:
        raise ValueError("rate must be positive")
    caps = _capacities(trace)
    i_tot = np.cumsum(caps)
    m = caps.shape[0]
    v = np.zeros(m, dtype=np.int8)
    psi = np.zeros(m, dtype=np.int64)
    decoded = 0
    for t in range(m):
        if i_tot[t] >= (decoded + 1) * rate:
            decoded += 1
            v[t] = 1
        psi[t] = decoded
    return GreedyResult(v, psi, i_tot)


def lower_bound_pattern(M: int, D: int) -> np.ndarray:
    """Sparsest 0/1 vector of length M whose longest zero-run is D.

    Ones sit exactly at positions k*(D+1), k = 1..floor(M/(D+1)) (1-based);
    D = 0 gives all ones and D = M the all-zero vector.
    """
    if not (0 <= D <= M):
        raise ValueError(f"need 0 <= D <= M, got D={D}, M={M}")
    v = np.zeros(M, dtype=np.int8)
    step = D + 1
    v[step - 1 :: step] = 1
    if D == M:
        v[:] = 0
    return v


def _dominance_holds(psi: np.ndarray, D: int) -> bool:
    """Cumulative-sum dominance against the D-spaced lower-bound pattern."""
    m = psi.shape[0]
    cum_lb = 0
    step = D + 1
    for t in range(1, m + 1):
        if t % step == 0:
            cum_lb += 1
        if psi[t - 1] < cum_lb:
            return False
    return True


def min_delay_max_rate(v) -> tuple[np.ndarray, int]:
    """Re-spread the ones of v to minimize the longest zero-run.

    Finds the smallest D whose lower-bound pattern is dominated by v's
    cumulative sum, then fills the rightmost zeros of that pattern until the
    number of ones matches v.  Throughput (popcount) is preserved exactly.
    Returns (new vector, achieved longest zero-run).
    """
    v = np.asarray(v).astype(np.int8)
    m = v.shape[0]
    if m == 0:
        raise ValueError("empty decode vector")
    if not v.any():
        return np.zeros(m, dtype=np.int8), m
    psi = np.cumsum(v)
    D = 0
    while not _dominance_holds(psi, D):
        D += 1
    s_opt = lower_bound_pattern(m, D)
    excess = int(v.sum()) - int(s_opt.sum())
    k = m - 1
    while excess > 0:
        if s_opt[k] == 0:
            s_opt[k] = 1
            excess -= 1
        k -= 1
    return s_opt, D


def min_achievable_delay(psi: np.ndarray) -> int:
    """Closed form for the smallest dominated D: max_t floor(t/(psi(t)+1)).

    Equivalent to scanning D = 0, 1, 2, ... against the lower-bound patterns;
    kept separate so the vectorized Monte Carlo path and the literal scan can
    be cross-checked.
    """
    psi = np.asarray(psi, dtype=np.int64)
    t = np.arange(1, psi.shape[0] + 1, dtype=np.int64)
    return int(np.max(t // (psi + 1)))


def oracle_exhaustive(trace, rate: float) -> tuple[int, int]:
    """Brute-force optimum over all 2^M decode subsets.

    A subset with sorted positions t_1 < ... < t_k is feasible iff
    I_tot(t_j) >= j * rate for every j.  Returns the maximum feasible size
    and, among subsets of that size, the smallest longest zero-run.
    """
    if rate <= 0:
        raise ValueError("rate must be positive")
    caps = _capacities(trace)
    m = caps.shape[0]
    if m > _bits.MAX_ENUM_BITS:
        raise ValueError(f"exhaustive oracle limited to M <= {_bits.MAX_ENUM_BITS}")
    i_tot = np.cumsum(caps)
    cum = _bits.cumsum_matrix(m)
    # Same comparison form as the greedy scan: MI against count * rate.
    feasible = np.all(i_tot[None, :] >= cum * rate, axis=1)
    counts = _bits.popcount_table(m)
    best = int(counts[feasible].max())
    runs = _bits.max_zero_run_table(m)
    mask = feasible & (counts == best)
    return best, int(runs[mask].min())


def informed_trial(trace, rate: float) -> tuple[int, int]:
    """(decoded count, minimized longest zero-run) for one realization."""
    greedy = greedy_allocate(trace, rate)
    count = int(greedy.cumulative_decoded[-1])
    if count == 0:
        return 0, len(greedy.decode_vector)
    s_opt, d_it = min_delay_max_rate(greedy.decode_vector)
    assert int(s_opt.sum()) == count
    return count, d_it


def informed_counts_and_delays(capacity_matrix: np.ndarray, rate: float):
    """Vectorized greedy + delay minimization across trials.

    The achieved delay equals max_t floor(t/(psi(t)+1)) (see
    min_achievable_delay); the explicit pattern construction is only needed
    when the re-spread vector itself is of interest.
    """
    caps = np.asarray(capacity_matrix, dtype=np.float64)
    n, m = caps.shape
    i_tot = np.cumsum(caps, axis=1)
    psi = np.zeros(n, dtype=np.int64)
    delay = np.zeros(n, dtype=np.int64)
    for t in range(1, m + 1):
        decoded = i_tot[:, t - 1] >= (psi + 1) * rate
        psi = psi + decoded
        np.maximum(delay, t // (psi + 1), out=delay)
    return psi, delay
