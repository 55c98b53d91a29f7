"""Vectorized Monte Carlo evaluation of the transmission schemes.

Evaluators operate on a (trials, blocks) capacity matrix and return integer
per-trial statistics; chunked drivers accumulate exact integer sums so that
results are bit-identical regardless of worker count.  All schemes at one
sweep point share the same traces (common random numbers), which makes
per-realization dominance comparisons exact.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams, sample_capacity_matrix
from .informed import informed_counts_and_delays
from .metrics import max_zero_run_rows

CHUNK = 4096


def evaluate_mt(caps: np.ndarray, rate: float):
    """Per-block transmission: message t decodes iff block t's capacity >= rate."""
    v = caps >= rate
    return v.sum(axis=1).astype(np.int64), max_zero_run_rows(v)


def _equal_share_weights(m: int) -> np.ndarray:
    # Block t (0-indexed) is split among the m - t messages still alive.
    return 1.0 / (m - np.arange(m))


def ets_mi_matrix(caps: np.ndarray) -> np.ndarray:
    """Running equal-share MI; column m-1 is message m's total."""
    return np.cumsum(caps * _equal_share_weights(caps.shape[1]), axis=1)


def evaluate_ets(caps: np.ndarray, rate: float):
    v = ets_mi_matrix(caps) >= rate
    return v.sum(axis=1).astype(np.int64), max_zero_run_rows(v)


def pb_mi_matrix(caps: np.ndarray, window: int) -> np.ndarray:
    """MI totals of the `window` transmitted messages (columns M-B+1..M)."""
    n, m = caps.shape
    if not (1 <= window <= m):
        raise ValueError(f"need 1 <= window <= blocks, got {window}")
    prefix = caps[:, : m - window + 1].sum(axis=1) / window
    if window == 1:
        return prefix[:, None]
    tail = np.cumsum(caps[:, m - window + 1 :] * _equal_share_weights(m)[m - window + 1 :], axis=1)
    return np.concatenate([prefix[:, None], prefix[:, None] + tail], axis=1)


def evaluate_pb(caps: np.ndarray, rate: float, window: int):
    """Pre-buffering: only the last `window` messages are sent.

    Decoded messages always form a suffix, so the longest zero-run equals
    blocks - decoded_count on every realization.
    """
    m = caps.shape[1]
    counts = (pb_mi_matrix(caps, window) >= rate).sum(axis=1).astype(np.int64)
    return counts, m - counts


def wts_decode_bits(caps: np.ndarray, rate: float, window: int):
    """(full-window decode bits, short-window bit or None) for windowed sharing."""
    n, m = caps.shape
    if not (1 <= window <= m):
        raise ValueError(f"need 1 <= window <= blocks, got {window}")
    n_full = m // window
    remainder = m - n_full * window
    full = caps[:, : n_full * window].reshape(n, n_full, window).sum(axis=2) >= rate
    short = caps[:, n_full * window :].sum(axis=1) >= rate if remainder else None
    return full, short


def evaluate_wts(caps: np.ndarray, rate: float, window: int):
    """Windowed time-sharing.

    Returns (counts, delays, window_delays): `delays` is the literal longest
    zero-run over all M message slots (untransmitted messages count as
    failures), while `window_delays` is `window` times the longest run of
    consecutive failed full windows — the statistic bounded by the floor/ceil
    substitution into the run-length closed form.
    """
    n, m = caps.shape
    full, short = wts_decode_bits(caps, rate, window)
    v = np.zeros((n, m), dtype=bool)
    v[:, window - 1 : full.shape[1] * window : window] = full
    counts = full.sum(axis=1).astype(np.int64)
    if short is not None:
        v[:, m - 1] = short
        counts = counts + short
    delays = max_zero_run_rows(v)
    window_delays = window * max_zero_run_rows(full)
    return counts, delays, window_delays


def evaluate_informed(caps: np.ndarray, rate: float):
    return informed_counts_and_delays(caps, rate)


def pb_count_sums(caps: np.ndarray, rate: float) -> np.ndarray:
    """Decoded-count sums over trials for every buffer depth 1..M.

    Used for the common-random-numbers sweep; entry B-1 is the total decoded
    count when only the last B messages are transmitted.
    """
    n, m = caps.shape
    weights = _equal_share_weights(m)
    running = np.cumsum(caps * weights, axis=1)  # equal-share totals W_m
    prefix_sums = np.cumsum(caps, axis=1)
    sums = np.zeros(m, dtype=np.int64)
    for b in range(1, m + 1):
        pref = prefix_sums[:, m - b] / b
        tau = rate - pref + running[:, m - b]
        # W is nondecreasing along a row, so a suffix comparison counts all
        # transmitted messages whose MI clears the rate.
        sums[b - 1] = int((running[:, m - b :] >= tau[:, None]).sum())
    return sums


@dataclass
class Accumulator:
    """Exact integer reductions of per-trial statistics."""

    blocks: int
    trials: int = 0
    count_sum: int = 0
    count_sqsum: int = 0
    delay_sum: int = 0
    delay_sqsum: int = 0
    wdelay_sum: int | None = None
    wdelay_sqsum: int | None = None
    hist: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.hist is None:
            self.hist = np.zeros(self.blocks + 1, dtype=np.int64)

    def add(self, counts, delays, window_delays=None):
        self.trials += counts.size
        self.count_sum += int(counts.sum())
        self.count_sqsum += int((counts.astype(np.int64) ** 2).sum())
        self.delay_sum += int(delays.sum())
        self.delay_sqsum += int((delays.astype(np.int64) ** 2).sum())
        self.hist += np.bincount(counts, minlength=self.blocks + 1)
        if window_delays is not None:
            self.wdelay_sum = (self.wdelay_sum or 0) + int(window_delays.sum())
            self.wdelay_sqsum = (self.wdelay_sqsum or 0) + int(
                (window_delays.astype(np.int64) ** 2).sum()
            )

    def mean_count(self) -> float:
        return self.count_sum / self.trials

    def mean_delay(self) -> float:
        return self.delay_sum / self.trials

    def mean_window_delay(self) -> float:
        return self.wdelay_sum / self.trials

    def _stderr(self, total: int, sqtotal: int) -> float:
        n = self.trials
        if n < 2:
            return 0.0
        mean = total / n
        var = (sqtotal - n * mean * mean) / (n - 1)
        return float(np.sqrt(max(var, 0.0)) / np.sqrt(n))

    def stderr_count(self) -> float:
        return self._stderr(self.count_sum, self.count_sqsum)

    def stderr_delay(self) -> float:
        return self._stderr(self.delay_sum, self.delay_sqsum)

    def stderr_window_delay(self) -> float:
        return self._stderr(self.wdelay_sum, self.wdelay_sqsum)

    def eta_hist(self) -> np.ndarray:
        return self.hist / self.trials


def chunk_ranges(trials: int, chunk: int = CHUNK):
    return [(lo, min(lo + chunk, trials)) for lo in range(0, trials, chunk)]


def _map_chunks(task, trials: int, threads: int):
    ranges = chunk_ranges(trials)
    if threads <= 1 or len(ranges) <= 1:
        return [task(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda r: task(*r), ranges))


def evaluate_point(
    params: ChannelParams,
    schemes: dict,
    trials: int,
    seed: int,
    threads: int = 1,
) -> dict:
    """Run all requested schemes on shared traces.

    `schemes` maps an arbitrary key to ("mt"|"ets"|"pb"|"wts"|"it", window);
    returns key -> Accumulator.  Chunks are fixed-size and keyed by absolute
    trial index, so the result is independent of `threads`.
    """
    rate = params.rate

    def task(lo, hi):
        caps = sample_capacity_matrix(params, seed, lo, hi)
        out = {}
        for key, (tag, window) in schemes.items():
            if tag == "mt":
                out[key] = (*evaluate_mt(caps, rate), None)
            elif tag == "ets":
                out[key] = (*evaluate_ets(caps, rate), None)
            elif tag == "pb":
                out[key] = (*evaluate_pb(caps, rate, window), None)
            elif tag == "wts":
                out[key] = evaluate_wts(caps, rate, window)
            elif tag == "it":
                out[key] = (*evaluate_informed(caps, rate), None)
            else:
                raise ValueError(f"unknown scheme tag {tag!r}")
        return out

    results = _map_chunks(task, trials, threads)
    accums = {key: Accumulator(blocks=params.blocks) for key in schemes}
    for chunk_out in results:
        for key, (counts, delays, wdelays) in chunk_out.items():
            accums[key].add(counts, delays, wdelays)
    return accums


def optimize_pb_window(
    params: ChannelParams, trials: int, seed: int, threads: int = 1
) -> tuple[int, float]:
    """Buffer depth maximizing mean decoded count (equivalently minimizing
    mean delay, since delay = M - count per realization).  Ties break low."""

    def task(lo, hi):
        caps = sample_capacity_matrix(params, seed, lo, hi)
        return pb_count_sums(caps, params.rate)

    totals = sum(_map_chunks(task, trials, threads))
    best = int(np.argmax(totals)) + 1
    return best, float(totals[best - 1] / trials)


def optimize_wts_window(
    params: ChannelParams,
    maximize_throughput: bool,
    trials: int,
    seed: int,
    threads: int = 1,
) -> tuple[int, float]:
    """Window length optimizing throughput (T-variant) or block-level delay
    (D-variant) over a shared trace set; ties break toward smaller windows."""
    m = params.blocks

    def task(lo, hi):
        caps = sample_capacity_matrix(params, seed, lo, hi)
        counts = np.zeros(m, dtype=np.int64)
        delays = np.zeros(m, dtype=np.int64)
        for b in range(1, m + 1):
            c, d, _ = evaluate_wts(caps, params.rate, b)
            counts[b - 1] = int(c.sum())
            delays[b - 1] = int(d.sum())
        return counts, delays

    results = _map_chunks(task, trials, threads)
    counts = sum(r[0] for r in results)
    delays = sum(r[1] for r in results)
    if maximize_throughput:
        best = int(np.argmax(counts)) + 1
        return best, float(counts[best - 1] / trials)
    best = int(np.argmin(delays)) + 1
    return best, float(delays[best - 1] / trials)
