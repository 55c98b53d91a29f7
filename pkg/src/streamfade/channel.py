"""Block-fading channel model: i.i.d. per-block gains and instantaneous capacities.

The channel stays constant within a block and redraws independently across
blocks.  A block with power gain g and transmit power P supports
log2(1 + g*P) bits per channel use; a message of rate R decodes whenever the
mutual information accumulated for it reaches R.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate

from . import rng
from .errors import NumericFailure

_LN2 = math.log(2.0)
_EULER_GAMMA = 0.5772156649015328606065


class Fading(Enum):
    """Per-block power-gain law."""

    RAYLEIGH_UNIT_MEAN = "rayleigh-unit-mean"
    # Degenerate point mass at gain 1; useful for deterministic tests.
    UNIT_GAIN = "unit-gain"


@dataclass(frozen=True)
class ChannelParams:
    """Static link parameters.

    snr_db   average SNR in dB; transmit power is 10**(snr_db/10) with
             unit-mean fading and unit-variance noise
    rate     fixed message rate in bits per channel use
    blocks   number of channel blocks (one message per block deadline)
    """

    snr_db: float
    rate: float
    blocks: int
    fading: Fading = Fading.RAYLEIGH_UNIT_MEAN

    def __post_init__(self):
        if not math.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError("rate must be positive and finite")
        if int(self.blocks) != self.blocks or self.blocks < 1:
            raise ValueError("blocks must be a positive integer")
        if not isinstance(self.fading, Fading):
            raise ValueError("fading must be a Fading member")

    @property
    def power(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)


@dataclass(frozen=True)
class ChannelTrace:
    """One realization: per-block power gains and the matching capacities."""

    gains: np.ndarray
    capacities: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gains, dtype=np.float64)
        c = np.asarray(self.capacities, dtype=np.float64)
        if g.ndim != 1 or c.shape != g.shape:
            raise ValueError("gains and capacities must be 1-D of equal length")
        g.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "gains", g)
        object.__setattr__(self, "capacities", c)

    def __len__(self) -> int:
        return self.gains.shape[0]


def capacities_from_gains(gains: np.ndarray, power: float) -> np.ndarray:
    return np.log2(1.0 + power * np.asarray(gains, dtype=np.float64))


def trace_from_gains(params: ChannelParams, gains) -> ChannelTrace:
    g = np.asarray(gains, dtype=np.float64)
    return ChannelTrace(g, capacities_from_gains(g, params.power))


def trace_from_capacities(params: ChannelParams, capacities) -> ChannelTrace:
    """Build a trace from target capacities (gains back-solved); test helper."""
    c = np.asarray(capacities, dtype=np.float64)
    return ChannelTrace((np.exp2(c) - 1.0) / params.power, c)


def sample_gain_matrix(params: ChannelParams, seed: int, start: int, stop: int) -> np.ndarray:
    """Gains for trials start..stop-1, shape (stop-start, blocks).

    Row i is a pure function of (seed, start + i); sampling the same trial
    index alone or inside any batch yields identical values.
    """
    if params.fading is Fading.RAYLEIGH_UNIT_MEAN:
        return rng.exponential_matrix(seed, start, stop, params.blocks)
    return np.ones((stop - start, params.blocks), dtype=np.float64)


def sample_capacity_matrix(params: ChannelParams, seed: int, start: int, stop: int) -> np.ndarray:
    return capacities_from_gains(sample_gain_matrix(params, seed, start, stop), params.power)


def sample_trace(params: ChannelParams, seed: int, trial_index: int) -> ChannelTrace:
    gains = sample_gain_matrix(params, seed, trial_index, trial_index + 1)[0]
    return ChannelTrace(gains, capacities_from_gains(gains, params.power))


def decode_success_prob(params: ChannelParams) -> float:
    """Pr{per-block capacity >= rate} for a single block."""
    threshold = (2.0**params.rate - 1.0) / params.power
    if params.fading is Fading.RAYLEIGH_UNIT_MEAN:
        return math.exp(-threshold)
    return 1.0 if 1.0 >= threshold else 0.0


def exp1(x: float) -> float:
    """Exponential integral E1(x) for x > 0.

    Power series below 1.0, modified-Lentz continued fraction above; both
    branches converge to full double precision over the SNR range used here.
    """
    if not (x > 0):
        raise ValueError("exp1 requires x > 0")
    if x <= 1.0:
        total = -_EULER_GAMMA - math.log(x)
        term = x
        k = 1
        total += term
        while abs(term) > 1e-18 * max(1.0, abs(total)):
            k += 1
            term *= -x * (k - 1) / (k * k)
            total += term
            if k > 200:  # unreachable for x <= 1
                raise NumericFailure("exp1 series did not converge")
        return total
    # Continued fraction e^-x / (x + 1 - 1/(x + 3 - 4/(x + 5 - 9/(...))))
    tiny = 1e-300
    f = x + 1.0
    c = f
    d = 0.0
    for n in range(1, 300):
        a = -float(n * n)
        b = x + 2.0 * n + 1.0
        d = b + a * d
        if d == 0.0:
            d = tiny
        c = b + a / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            return math.exp(-x) / f
    raise NumericFailure("exp1 continued fraction did not converge")


def mean_capacity(params: ChannelParams) -> float:
    """Average per-block capacity E[log2(1 + g*P)] by adaptive quadrature."""
    power = params.power
    if params.fading is Fading.UNIT_GAIN:
        return math.log2(1.0 + power)

    def integrand(g):
        return math.log2(1.0 + power * g) * math.exp(-g)

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, abserr = integrate.quad(
                integrand, 0.0, np.inf, epsabs=1e-14, epsrel=1e-10, limit=200
            )
        except integrate.IntegrationWarning as exc:
            raise NumericFailure(f"mean-capacity quadrature did not converge: {exc}") from exc
    if abserr > max(1e-9 * abs(value), 1e-12):
        raise NumericFailure(
            f"mean-capacity quadrature error {abserr:g} above tolerance at snr={params.snr_db}"
        )
    return value


def mean_capacity_closed_form(params: ChannelParams) -> float:
    """Closed form e^(1/P) E1(1/P) / ln 2 for the unit-mean exponential gain."""
    power = params.power
    if params.fading is Fading.UNIT_GAIN:
        return math.log2(1.0 + power)
    inv = 1.0 / power
    return math.exp(inv) * exp1(inv) / _LN2


def window_decode_prob(params: ChannelParams, window: int, grid_size: int = 1 << 13) -> float:
    """Pr{sum of `window` consecutive block capacities >= rate}.

    Evaluated by self-convolving the single-block capacity density on a
    uniform grid (FFT); deterministic, no sampling.  For window == 1 this
    reduces to decode_success_prob.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    if params.fading is Fading.UNIT_GAIN:
        return 1.0 if window * math.log2(1.0 + params.power) >= params.rate else 0.0
    if window == 1:
        return decode_success_prob(params)
    power = params.power
    # Truncate the gain law where the survival function is ~1e-16.
    c_max = math.log2(1.0 + power * 37.0)
    dc = c_max / grid_size
    # Exact bin masses from the capacity CDF: F(c) = 1 - exp(-(2^c - 1)/P).
    edges = np.arange(grid_size + 1) * dc
    cdf = 1.0 - np.exp(-(np.exp2(edges) - 1.0) / power)
    mass = np.diff(cdf)
    mass[-1] += 1.0 - cdf[-1]
    # window-fold self-convolution by FFT powering
    out_len = window * (grid_size - 1) + 1
    spectrum = np.fft.rfft(mass, n=out_len)
    conv = np.fft.irfft(spectrum**window, n=out_len)
    conv = np.clip(conv, 0.0, None)
    # Mass at grid index k represents capacity sum near (k + window/2)*dc.
    sums = (np.arange(out_len) + window * 0.5) * dc
    prob = float(conv[sums >= params.rate].sum())
    return min(1.0, max(0.0, prob))
