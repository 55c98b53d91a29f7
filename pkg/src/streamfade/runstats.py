"""Distribution of the longest failure run in an i.i.d. Bernoulli decode sequence.

Pr{longest zero-run >= d} over M trials with per-trial success probability p
is computed three independent ways:

* exhaustive weighted enumeration over all 2^M sequences (small M oracle),
* absorbing Markov chain raised to the M-th power,
* closed form from the partial-fraction expansion of the run generating
  function ((1-p) z)^d / ((1-z) q_d(z)), where
  q_d(z) = 1 - p * sum_{j=1..d} z^j (1-p)^(j-1).

The z = 1 pole always has residue exactly 1 (q_d(1) = (1-p)^d), so it is
peeled off in closed form before any numerics; the remaining expansion only
involves the roots of q_d, which all lie outside the unit circle.  This keeps
the evaluation stable even when q_d's real root approaches 1 for large d.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _bits
from .errors import NumericFailure

_CLUSTER_RADIUS = 1e-7
_RESIDUAL_TOL = 1e-8
_CLAMP_TOL = 1e-6
_IMAG_TOL = 1e-9


def _validate(M: int, p: float, d: int) -> None:
    if not (1 <= d <= M):
        raise ValueError(f"need 1 <= d <= M, got d={d}, M={M}")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"success probability must lie in [0, 1], got {p}")


def run_transition_matrix(d: int, p: float) -> np.ndarray:
    """Absorbing chain over zero-run lengths 0..d.

    A success (probability p) resets the run to state 0, a failure extends
    it by one; state d absorbs.  Rows sum to one.
    """
    if d < 1:
        raise ValueError("run threshold d must be >= 1")
    if not (0.0 <= p <= 1.0):
        raise ValueError("success probability must lie in [0, 1]")
    H = np.zeros((d + 1, d + 1))
    for i in range(d):
        H[i, 0] = p
        H[i, i + 1] = 1.0 - p
    H[d, d] = 1.0
    return H


def run_tail_matrix_power(M: int, p: float, d: int) -> float:
    """Pr{longest zero-run >= d} as entry (0, d) of the chain's M-step matrix."""
    _validate(M, p, d)
    H = run_transition_matrix(d, p)
    result = np.eye(d + 1)
    base = H.copy()
    steps = M
    while steps:
        if steps & 1:
            result = result @ base
        steps >>= 1
        if steps:
            base = base @ base
    return float(min(1.0, max(0.0, result[0, d])))


def q_polynomial(d: int, p: float) -> np.ndarray:
    """Ascending coefficients of q_d(z) = 1 - p sum_{j=1..d} z^j (1-p)^(j-1)."""
    if d < 1:
        raise ValueError("d must be >= 1")
    coeffs = np.zeros(d + 1)
    coeffs[0] = 1.0
    coeffs[1:] = -p * (1.0 - p) ** np.arange(d)
    return coeffs


@dataclass(frozen=True)
class PartialFraction:
    """Expansion of ((1-p) z)^d / ((1-z) q_d(z)) in powers of (1 - z/root)^-r.

    roots[0] is always exactly 1 with multiplicity 1 and coefficient 1; the
    remaining entries are the clustered roots of q_d.  coefficients[i][r-1]
    multiplies (1 - z/roots[i])^-r.
    """

    run_length: int
    success_prob: float
    roots: np.ndarray
    multiplicities: np.ndarray
    coefficients: tuple

    def reconstruct(self, z: np.ndarray) -> np.ndarray:
        return self._reconstruct_with_mass(z)[0]

    def _reconstruct_with_mass(self, z):
        """Expansion value and the sum of term magnitudes (its roundoff scale)."""
        z = np.asarray(z, dtype=np.complex128)
        total = np.zeros_like(z)
        mass = np.zeros(z.shape, dtype=np.float64)
        for root, mult, coef in zip(self.roots, self.multiplicities, self.coefficients):
            base = 1.0 / (1.0 - z / root)
            for r in range(1, mult + 1):
                term = coef[r - 1] * base**r
                total = total + term
                mass += np.abs(term)
        return total, mass

    def direct(self, z: np.ndarray) -> np.ndarray:
        """The target rational function evaluated directly."""
        z = np.asarray(z, dtype=np.complex128)
        d, p = self.run_length, self.success_prob
        q = np.polyval(q_polynomial(d, p)[::-1], z)
        return ((1.0 - p) * z) ** d / ((1.0 - z) * q)

    def max_reconstruction_error(self, samples: int = 64) -> float:
        """Worst sample-point deviation of the expansion from the rational form.

        Relative to the larger of the direct value and the expansion's own
        term-magnitude sum: for large d the function is exponentially small
        inside the unit disk while the basis terms stay O(1) and cancel, so a
        plain relative error would only measure that inherent roundoff, not
        coefficient quality.  A wrong coefficient shows up at O(term mass),
        eight orders above the 1e-8 gate; correct ones sit at machine epsilon.
        """
        z = 0.5 * np.exp(2j * np.pi * (np.arange(samples) + 0.25) / samples)
        ref = self.direct(z)
        rebuilt, mass = self._reconstruct_with_mass(z)
        err = np.abs(rebuilt - ref)
        scale = np.maximum(np.abs(ref), np.maximum(mass, 1e-30))
        return float(np.max(err / scale))

    def tail(self, M: int) -> float:
        """Pr{longest zero-run >= d} over M trials, via the inverse transform."""
        if M < self.run_length:
            raise ValueError("need M >= d")
        total = 0.0 + 0.0j
        for root, mult, coef in zip(self.roots, self.multiplicities, self.coefficients):
            decay = root ** (-float(M))
            for r in range(1, mult + 1):
                total += coef[r - 1] * math.comb(M + r - 1, r - 1) * decay
        if abs(total.imag) > _IMAG_TOL:
            raise NumericFailure(
                f"imaginary residue {total.imag:g} in run-tail inverse transform"
            )
        value = total.real
        if value < -_CLAMP_TOL or value > 1.0 + _CLAMP_TOL:
            raise NumericFailure(f"run-tail value {value:g} outside [0, 1] beyond tolerance")
        return min(1.0, max(0.0, value))


def _cluster_roots(roots: np.ndarray) -> list[np.ndarray]:
    """Group roots whose pairwise distance is below the clustering radius."""
    remaining = list(roots)
    clusters: list[list[complex]] = []
    for root in sorted(remaining, key=lambda z: (z.real, z.imag)):
        for members in clusters:
            if abs(root - np.mean(members)) < _CLUSTER_RADIUS:
                members.append(root)
                break
        else:
            clusters.append([root])
    return [np.array(c) for c in clusters]


def _laurent_coefficients(g, center: complex, order: int, radius: float, samples: int = 256):
    """Coefficients a_1..a_order of sum a_r (1 - z/center)^-r for g near center.

    Contour extraction in the local variable w = 1 - z/center on |w| = radius.
    """
    theta = 2.0 * np.pi * np.arange(samples) / samples
    w = radius * np.exp(1j * theta)
    values = g(center * (1.0 - w))
    coeffs = []
    for r in range(1, order + 1):
        coeffs.append(complex(np.mean(values * w**r)))
    return np.array(coeffs)


def _build_partial_fraction(d: int, p: float) -> PartialFraction:
    q = q_polynomial(d, p)
    # Trailing coefficients may underflow for extreme p; drop exact zeros.
    d_eff = d
    while d_eff > 0 and q[d_eff] == 0.0:
        d_eff -= 1
    if d_eff == 0:
        raise NumericFailure(f"q_{d} degenerates to a constant at p={p}")
    q = q[: d_eff + 1]
    # q_d(1) telescopes to (1-p)^d exactly; the closed form avoids the
    # catastrophic cancellation of summing the coefficients in floats.
    q_at_one = (1.0 - p) ** d_eff
    if not q_at_one > 0.0:
        raise NumericFailure("q_d(1) = (1-p)^d must be positive; z=1 must stay a simple pole")

    # Numerator N(z) = ((1-p) z)^d restricted to the effective degree.
    numer = np.zeros(d_eff + 1)
    scale = (1.0 - p) ** d
    if d <= d_eff:
        numer[d] = scale
    # Peel the exact z=1 pole: residue N(1)/q(1); deflate (N - a*q) / (1 - z).
    residue_one = (scale if d <= d_eff else 0.0) / q_at_one
    deflated = numer - residue_one * q
    # Synthetic division by (1 - z): running prefix sums.
    h = np.cumsum(deflated[:d_eff])
    if abs(deflated[d_eff] + h[-1]) > 1e-9 * max(1.0, abs(deflated[d_eff])):
        raise NumericFailure("deflation by (1 - z) left a remainder")

    q_desc = np.poly1d(q[::-1])
    dq_desc = q_desc.deriv()
    h_desc = np.poly1d(h[::-1]) if h.size else np.poly1d([0.0])

    roots = np.roots(q[::-1]).astype(np.complex128)
    # One Newton polish per root.
    for _ in range(1):
        step = q_desc(roots) / dq_desc(roots)
        roots = roots - step
    resid = np.abs(q_desc(roots)) / max(1.0, np.max(np.abs(q)))
    if np.any(resid > 1e-10):
        raise NumericFailure("root-finding residual above tolerance")
    if np.any(np.abs(roots - 1.0) < 1e-12):
        # A root of q_d collapsing onto z=1 in floating point is tolerated:
        # its contribution stays finite because the z=1 pole was deflated.
        pass

    def g(z):
        return h_desc(z) / q_desc(z)

    clusters = _cluster_roots(roots)
    out_roots = [1.0 + 0.0j]
    out_mults = [1]
    out_coeffs = [np.array([residue_one + 0.0j])]
    for members in clusters:
        center = complex(np.mean(members))
        s = len(members)
        if s == 1:
            coef = np.array([-h_desc(center) / (dq_desc(center) * center)])
        else:
            others = np.array(
                [r for c in clusters if c is not members for r in c] + [1.0 + 0.0j]
            )
            spread = max(abs(m - center) for m in members)
            gap = float(np.min(np.abs(others - center))) if others.size else np.inf
            radius_w = max(1e-4, 50.0 * spread / abs(center))
            if radius_w * abs(center) > 0.25 * gap:
                raise NumericFailure("pole cluster too close to other poles to separate")
            coef = _laurent_coefficients(g, center, s, radius_w)
        out_roots.append(center)
        out_mults.append(s)
        out_coeffs.append(coef)

    pf = PartialFraction(
        run_length=d,
        success_prob=p,
        roots=np.array(out_roots),
        multiplicities=np.array(out_mults),
        coefficients=tuple(out_coeffs),
    )
    err = pf.max_reconstruction_error()
    if err > _RESIDUAL_TOL:
        raise NumericFailure(f"partial-fraction reconstruction residual {err:g}")
    return pf


@lru_cache(maxsize=4096)
def partial_fraction(d: int, p: float) -> PartialFraction:
    """Cached expansion for a given (run length, success probability)."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if not (0.0 < p < 1.0):
        raise ValueError("partial fractions require 0 < p < 1")
    return _build_partial_fraction(d, float(p))


def run_tail_partial_fraction(M: int, p: float, d: int) -> float:
    """Closed-form tail; raises NumericFailure instead of silently degrading."""
    _validate(M, p, d)
    if not (0.0 < p < 1.0):
        raise ValueError("partial fractions require 0 < p < 1")
    return partial_fraction(d, p).tail(M)


@dataclass(frozen=True)
class TailEstimate:
    value: float
    method: str  # "partial-fraction", "matrix-power" (fallback), or "degenerate"

    @property
    def degraded(self) -> bool:
        return self.method == "matrix-power"


def run_tail(M: int, p: float, d: int) -> TailEstimate:
    """Tail probability with the partial-fraction path preferred."""
    _validate(M, p, d)
    if p == 0.0:
        return TailEstimate(1.0, "degenerate")
    if p == 1.0:
        return TailEstimate(0.0, "degenerate")
    try:
        return TailEstimate(run_tail_partial_fraction(M, p, d), "partial-fraction")
    except NumericFailure:
        return TailEstimate(run_tail_matrix_power(M, p, d), "matrix-power")


def mt_mean_max_delay(M: int, p: float) -> float:
    """Mean longest zero-run over M Bernoulli(p) decode events.

    Sum of the tail probabilities for d = 1..M; this is the exact average
    maximum inter-decoding delay of per-block memoryless transmission.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if not (0.0 <= p <= 1.0):
        raise ValueError("success probability must lie in [0, 1]")
    if p == 0.0:
        return float(M)
    if p == 1.0:
        return 0.0
    return float(sum(run_tail(M, p, d).value for d in range(1, M + 1)))


@dataclass(frozen=True)
class DelayDistribution:
    """tail[d-1] = Pr{max zero-run >= d} for d = 1..M; mean is their sum."""

    tail: np.ndarray
    mean: float


def delay_distribution(M: int, p: float) -> DelayDistribution:
    if M < 1:
        raise ValueError("M must be >= 1")
    tails = np.array([run_tail(M, p, d).value for d in range(1, M + 1)])
    if np.any(np.diff(tails) > 1e-9):
        raise NumericFailure("tail probabilities must be nonincreasing in d")
    tails = np.minimum.accumulate(tails)
    return DelayDistribution(tail=tails, mean=float(tails.sum()))


@dataclass(frozen=True)
class WtsBounds:
    """Floor/ceil window-count bounds for windowed time-sharing.

    Delays are in window units: B times the mean longest run of consecutive
    failed windows; decoded message counts bound the raw expected number of
    decoded messages.
    """

    delay_lower: float
    delay_upper: float
    decoded_lower: float
    decoded_upper: float


def wts_delay_bounds(M: int, B: int, p_B: float) -> WtsBounds:
    if not (1 <= B <= M):
        raise ValueError(f"need 1 <= B <= M, got B={B}, M={M}")
    if not (0.0 <= p_B <= 1.0):
        raise ValueError("window decode probability must lie in [0, 1]")
    floor_w = M // B
    ceil_w = -(-M // B)
    return WtsBounds(
        delay_lower=B * mt_mean_max_delay(floor_w, p_B),
        delay_upper=B * mt_mean_max_delay(ceil_w, p_B),
        decoded_lower=floor_w * p_B,
        decoded_upper=ceil_w * p_B,
    )


def enumerate_run_tails(M: int, p: float) -> np.ndarray:
    """Exact tails for d = 1..M by weighted enumeration of all 2^M sequences."""
    if not (0.0 <= p <= 1.0):
        raise ValueError("success probability must lie in [0, 1]")
    runs = _bits.max_zero_run_table(M)
    ones = _bits.popcount_table(M)
    weights = p ** ones.astype(np.float64) * (1.0 - p) ** (M - ones).astype(np.float64)
    pmf = np.bincount(runs, weights=weights, minlength=M + 1)
    tails = np.cumsum(pmf[::-1])[::-1]
    return tails[1:].copy()
