import math

import numpy as np
import pytest
import scipy.special

from streamfade.channel import (
    ChannelParams,
    ChannelTrace,
    Fading,
    decode_success_prob,
    exp1,
    mean_capacity,
    mean_capacity_closed_form,
    sample_capacity_matrix,
    sample_gain_matrix,
    sample_trace,
    trace_from_capacities,
    trace_from_gains,
    window_decode_prob,
)

# Values computed ahead of the build with an independent high-resolution
# trapezoid rule (20M+ panels) over the unit-mean exponential density.
TRAPEZOID_MEAN_CAPACITY = {
    5.0: 1.715974185066,
    -5.0: 0.362149798877,
    0.0: 0.860347382270,
    10.0: 2.906514808410,
}
TRAPEZOID_DECODE_PROB = {5.0: 0.728893414110, -5.0: 0.042329219623}


def params(snr=5.0, rate=1.0, blocks=3, fading=Fading.RAYLEIGH_UNIT_MEAN):
    return ChannelParams(snr_db=snr, rate=rate, blocks=blocks, fading=fading)


class TestParams:
    def test_power_matches_snr(self):
        for snr in (-10.0, -5.0, 0.0, 5.0, 15.0):
            p = params(snr=snr)
            assert abs(p.power - 10.0 ** (snr / 10.0)) <= 1e-12 * p.power

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(snr_db=5.0, rate=0.0, blocks=3),
            dict(snr_db=5.0, rate=-1.0, blocks=3),
            dict(snr_db=5.0, rate=1.0, blocks=0),
            dict(snr_db=math.inf, rate=1.0, blocks=3),
        ],
    )
    def test_invalid_params_rejected(self, kwargs):
        with pytest.raises(ValueError):
            ChannelParams(**kwargs)

    def test_trace_shape_checked(self):
        with pytest.raises(ValueError):
            ChannelTrace(np.ones(3), np.ones(4))


class TestCapacities:
    def test_unit_gains_give_constant_capacity(self):
        # log2(1 + 10^0.5) for every block
        tr = trace_from_gains(params(), np.ones(3))
        expected = math.log2(1.0 + 10.0**0.5)
        assert np.allclose(tr.capacities, expected, rtol=0, atol=1e-12)
        assert abs(expected - 2.0574) < 5e-5

    def test_zero_gains_give_zero_capacity(self):
        tr = trace_from_gains(params(), np.zeros(3))
        assert np.all(tr.capacities == 0.0)

    def test_capacity_law_holds_on_samples(self):
        p = params(blocks=64)
        tr = sample_trace(p, 99, 7)
        assert np.array_equal(tr.capacities, np.log2(1.0 + p.power * tr.gains))
        assert np.all(tr.capacities >= 0.0)

    def test_capacity_roundtrip(self):
        p = params(blocks=4)
        tr = trace_from_capacities(p, [0.5, 1.0, 0.0, 2.0])
        assert np.allclose(np.log2(1.0 + p.power * tr.gains), tr.capacities, atol=1e-14)


class TestSampling:
    def test_deterministic_per_seed_and_trial(self):
        p = params(blocks=16)
        a = sample_trace(p, 1234, 5)
        b = sample_trace(p, 1234, 5)
        assert np.array_equal(a.gains, b.gains)
        c = sample_trace(p, 1234, 6)
        assert not np.array_equal(a.gains, c.gains)
        d = sample_trace(p, 1235, 5)
        assert not np.array_equal(a.gains, d.gains)

    def test_batch_matches_single(self):
        p = params(blocks=8)
        block = sample_gain_matrix(p, 7, 10, 20)
        for i in range(10):
            assert np.array_equal(block[i], sample_trace(p, 7, 10 + i).gains)

    def test_empirical_mean_capacity(self):
        # >= 1e6 blocks within four standard errors of the quadrature mean
        p = params(snr=5.0, blocks=40)
        caps = sample_capacity_matrix(p, 2024, 0, 25_000).ravel()
        se = caps.std(ddof=1) / math.sqrt(caps.size)
        assert abs(caps.mean() - mean_capacity(p)) < 4 * se

    def test_empirical_decode_frequency(self):
        p = params(snr=-5.0, rate=1.0, blocks=40)
        caps = sample_capacity_matrix(p, 77, 0, 25_000).ravel()
        freq = (caps >= p.rate).mean()
        prob = decode_success_prob(p)
        se = math.sqrt(prob * (1 - prob) / caps.size)
        assert abs(freq - prob) < 4 * se

    def test_substream_serial_correlation(self):
        p = params(blocks=50)
        g = sample_gain_matrix(p, 31337, 0, 20_000).ravel()
        x, y = g[:-1], g[1:]
        r = np.corrcoef(x, y)[0, 1]
        assert abs(r) < 0.01

    def test_unit_gain_law(self):
        p = params(fading=Fading.UNIT_GAIN, blocks=5)
        assert np.all(sample_gain_matrix(p, 1, 0, 4) == 1.0)


class TestDecodeProb:
    def test_frozen_values(self):
        for snr, expected in TRAPEZOID_DECODE_PROB.items():
            assert decode_success_prob(params(snr=snr, rate=1.0)) == pytest.approx(
                expected, abs=1e-10
            )

    def test_numerical_integration_oracle(self):
        # integrate the exponential pdf above the outage threshold
        for snr in (-5.0, 0.0, 5.0):
            p = params(snr=snr, rate=1.0)
            thr = (2.0**p.rate - 1.0) / p.power
            x = np.linspace(thr, thr + 50.0, 2_000_001)
            oracle = np.trapezoid(np.exp(-x), x)
            assert decode_success_prob(p) == pytest.approx(oracle, abs=1e-9)

    def test_vanishing_rate(self):
        assert decode_success_prob(params(rate=1e-12)) == pytest.approx(1.0, abs=1e-9)

    def test_unit_gain(self):
        assert decode_success_prob(params(rate=1.0, fading=Fading.UNIT_GAIN)) == 1.0
        assert decode_success_prob(params(snr=-20.0, rate=1.0, fading=Fading.UNIT_GAIN)) == 0.0


class TestMeanCapacity:
    def test_quadrature_matches_closed_form(self):
        for snr in np.arange(-10.0, 15.5, 2.5):
            p = params(snr=snr)
            assert mean_capacity(p) == pytest.approx(mean_capacity_closed_form(p), abs=1e-8)

    def test_frozen_trapezoid_values(self):
        for snr, expected in TRAPEZOID_MEAN_CAPACITY.items():
            assert mean_capacity(params(snr=snr)) == pytest.approx(expected, abs=1e-8)

    def test_vanishing_power(self):
        assert mean_capacity(params(snr=-80.0)) < 1e-7

    def test_point_mass_law(self):
        p = params(snr=5.0, fading=Fading.UNIT_GAIN)
        assert mean_capacity(p) == math.log2(1.0 + p.power)


class TestExp1:
    def test_against_scipy(self):
        xs = np.concatenate(
            [np.linspace(0.01, 1.0, 40), np.linspace(1.0, 40.0, 60), [0.5, 1.0, 2.0]]
        )
        for x in xs:
            assert exp1(float(x)) == pytest.approx(
                float(scipy.special.exp1(x)), rel=1e-13, abs=1e-300
            )

    def test_switchover_continuity(self):
        assert exp1(1.0 - 1e-12) == pytest.approx(exp1(1.0 + 1e-12), rel=1e-9)

    def test_domain(self):
        with pytest.raises(ValueError):
            exp1(0.0)
        with pytest.raises(ValueError):
            exp1(-1.0)


class TestWindowDecodeProb:
    def test_single_block_matches_closed_form(self):
        for snr in (-5.0, 0.0, 5.0):
            p = params(snr=snr, rate=1.0)
            assert window_decode_prob(p, 1) == decode_success_prob(p)

    def test_grid_refinement_stable(self):
        p = params(snr=-5.0, rate=1.0, blocks=10)
        coarse = window_decode_prob(p, 3, grid_size=1 << 12)
        fine = window_decode_prob(p, 3, grid_size=1 << 14)
        assert abs(coarse - fine) < 2e-4

    def test_against_monte_carlo(self):
        for snr, window in ((-5.0, 2), (-5.0, 5), (5.0, 3)):
            p = params(snr=snr, rate=1.0, blocks=window)
            sums = sample_capacity_matrix(p, 4242, 0, 400_000).sum(axis=1)
            freq = (sums >= p.rate).mean()
            se = math.sqrt(max(freq * (1 - freq), 1e-12) / sums.size)
            assert window_decode_prob(p, window) == pytest.approx(freq, abs=max(4 * se, 5e-4))

    def test_monotone_in_window(self):
        p = params(snr=-5.0, rate=1.0, blocks=10)
        probs = [window_decode_prob(p, b) for b in range(1, 8)]
        assert all(b >= a - 1e-12 for a, b in zip(probs, probs[1:]))
