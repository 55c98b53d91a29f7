import math

import numpy as np
import pytest

from streamfade.errors import NumericFailure
from streamfade import runstats
from streamfade.runstats import (
    delay_distribution,
    enumerate_run_tails,
    mt_mean_max_delay,
    partial_fraction,
    q_polynomial,
    run_tail,
    run_tail_matrix_power,
    run_tail_partial_fraction,
    run_transition_matrix,
    wts_delay_bounds,
    _laurent_coefficients,
)


class TestTransitionMatrix:
    def test_structure(self):
        H = run_transition_matrix(3, 0.7)
        assert H.shape == (4, 4)
        for i in range(3):
            assert H[i, 0] == pytest.approx(0.7)
            assert H[i, i + 1] == pytest.approx(0.3)
        assert H[3, 3] == 1.0
        assert np.allclose(H.sum(axis=1), 1.0, atol=1e-12)

    def test_row_stochastic_under_squaring(self):
        # squarings cover M = 10^4
        H = run_transition_matrix(12, 0.37)
        A = H.copy()
        for _ in range(math.ceil(math.log2(10_000))):
            A = A @ A
            assert np.allclose(A.sum(axis=1), 1.0, atol=1e-10)


class TestMatrixPowerTail:
    def test_degenerate_probabilities(self):
        assert run_tail_matrix_power(6, 1.0, 1) == 0.0
        assert run_tail_matrix_power(6, 1.0, 6) == 0.0
        assert run_tail_matrix_power(6, 0.0, 3) == 1.0

    def test_enumerated_example(self):
        # 8 coin-flip sequences of length 3; {000, 001, 100} contain a 00 run
        assert run_tail_matrix_power(3, 0.5, 2) == pytest.approx(0.375, abs=1e-15)

    def test_full_run(self):
        assert run_tail_matrix_power(4, 0.5, 4) == pytest.approx(0.0625, abs=1e-15)

    def test_validation(self):
        with pytest.raises(ValueError):
            run_tail_matrix_power(3, 0.5, 0)
        with pytest.raises(ValueError):
            run_tail_matrix_power(3, 0.5, 4)
        with pytest.raises(ValueError):
            run_tail_matrix_power(3, 1.5, 1)


class TestQPolynomial:
    def test_degree_one(self):
        assert np.allclose(q_polynomial(1, 0.3), [1.0, -0.3])

    def test_expanded_example(self):
        assert np.allclose(q_polynomial(2, 0.5), [1.0, -0.5, -0.25])

    def test_constant_term_always_one(self):
        for d in (1, 3, 9):
            for p in (0.05, 0.5, 0.95):
                assert q_polynomial(d, p)[0] == 1.0

    def test_value_at_one(self):
        # q_d(1) = (1-p)^d, which keeps z=1 a simple pole of the full function
        for d in (1, 4, 11):
            for p in (0.1, 0.6, 0.9):
                assert np.polyval(q_polynomial(d, p)[::-1], 1.0) == pytest.approx(
                    (1 - p) ** d, rel=1e-12
                )


class TestPartialFraction:
    def test_agreement_grid(self):
        for m in range(2, 11):
            enum = {p: enumerate_run_tails(m, p) for p in (0.1, 0.4, 0.65, 0.9)}
            for p, tails in enum.items():
                for d in range(1, m + 1):
                    pf = run_tail_partial_fraction(m, p, d)
                    mat = run_tail_matrix_power(m, p, d)
                    assert pf == pytest.approx(tails[d - 1], abs=1e-10)
                    assert mat == pytest.approx(tails[d - 1], abs=1e-10)

    def test_structure(self):
        pf = partial_fraction(5, 0.35)
        assert pf.roots[0] == 1.0 + 0.0j
        assert pf.multiplicities[0] == 1
        assert pf.coefficients[0][0] == pytest.approx(1.0, abs=1e-12)
        assert int(pf.multiplicities.sum()) == 6  # degree of (1-z) q_d
        # every root of q_d lies outside the unit circle
        assert np.all(np.abs(pf.roots[1:]) > 1.0)

    def test_reconstruction_residual(self):
        for d in (1, 2, 7, 14, 25):
            for p in (0.05, 0.5, 0.95):
                assert partial_fraction(d, p).max_reconstruction_error() < 1e-8

    def test_near_degenerate_root_regime(self):
        # q_d's real root approaches z=1 when (1-p)^d underflows the cluster
        # radius; the deflated evaluation must stay exact.
        for (m, p, d) in [(14, 0.6, 14), (14, 0.7, 14), (40, 0.7289, 40), (60, 0.9, 30)]:
            pf_val = run_tail_partial_fraction(m, p, d)
            assert pf_val == pytest.approx(run_tail_matrix_power(m, p, d), abs=1e-12)

    def test_requires_open_interval(self):
        with pytest.raises(ValueError):
            run_tail_partial_fraction(4, 0.0, 2)
        with pytest.raises(ValueError):
            run_tail_partial_fraction(4, 1.0, 2)

    def test_laurent_extraction_on_synthetic_double_pole(self):
        # g(z) = 3/(1 - z/c)^2 - 2/(1 - z/c) + analytic part
        c = 2.0 + 1.0j

        def g(z):
            w = 1.0 - z / c
            return 3.0 / w**2 - 2.0 / w + (1.0 + 0.25 * z)

        coeffs = _laurent_coefficients(g, c, 2, radius=1e-3)
        assert coeffs[0] == pytest.approx(-2.0, abs=1e-8)
        assert coeffs[1] == pytest.approx(3.0, abs=1e-8)


class TestRunTailDispatch:
    def test_prefers_partial_fraction(self):
        est = run_tail(12, 0.4, 3)
        assert est.method == "partial-fraction"
        assert not est.degraded

    def test_degenerate_shortcuts(self):
        assert run_tail(5, 0.0, 2).value == 1.0
        assert run_tail(5, 1.0, 2).value == 0.0
        assert run_tail(5, 0.0, 2).method == "degenerate"

    def test_fallback_flags_degraded(self, monkeypatch):
        def broken(M, p, d):
            raise NumericFailure("forced")

        monkeypatch.setattr(runstats, "run_tail_partial_fraction", broken)
        est = runstats.run_tail(12, 0.4, 3)
        assert est.method == "matrix-power"
        assert est.degraded
        assert est.value == pytest.approx(run_tail_matrix_power(12, 0.4, 3), abs=1e-15)


class TestMeanMaxDelay:
    def test_degenerate(self):
        assert mt_mean_max_delay(7, 1.0) == 0.0
        assert mt_mean_max_delay(7, 0.0) == 7.0

    def test_enumerated_spot_value(self):
        # tails 7/8, 3/8, 1/8
        assert mt_mean_max_delay(3, 0.5) == pytest.approx(1.375, abs=1e-12)

    def test_matches_enumeration(self):
        for m, p in [(6, 0.3), (9, 0.7), (11, 0.5)]:
            assert mt_mean_max_delay(m, p) == pytest.approx(
                float(enumerate_run_tails(m, p).sum()), abs=1e-10
            )


class TestDelayDistribution:
    def test_monotone_and_mean(self):
        dist = delay_distribution(12, 0.55)
        assert np.all(np.diff(dist.tail) <= 1e-15)
        assert dist.tail[0] <= 1.0 and dist.tail[-1] >= 0.0
        assert dist.mean == pytest.approx(float(dist.tail.sum()))

    def test_pmf_identity(self):
        # mean from tails equals mean from the pmf tail[d] - tail[d+1]
        dist = delay_distribution(10, 0.4)
        tails = np.append(dist.tail, 0.0)
        pmf = tails[:-1] - tails[1:]
        mean_from_pmf = float(np.dot(np.arange(1, 11), pmf))
        assert dist.mean == pytest.approx(mean_from_pmf, abs=1e-10)

    def test_tail_monotone_in_p(self):
        for d in (1, 3, 6):
            values = [run_tail(8, p, d).value for p in (0.1, 0.3, 0.5, 0.7, 0.9)]
            assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


class TestWtsBounds:
    def test_single_block_windows_reduce_to_per_block(self):
        b = wts_delay_bounds(12, 1, 0.42)
        exact = mt_mean_max_delay(12, 0.42)
        assert b.delay_lower == pytest.approx(exact)
        assert b.delay_upper == pytest.approx(exact)

    def test_whole_file_window(self):
        m, p_b = 9, 0.8
        b = wts_delay_bounds(m, m, p_b)
        # single Bernoulli window: tail(1) = 1 - p_B
        assert b.delay_lower == pytest.approx(m * (1 - p_b))
        assert b.delay_upper == pytest.approx(m * (1 - p_b))

    def test_decoded_bounds(self):
        b = wts_delay_bounds(10, 3, 0.6)
        assert b.decoded_lower == pytest.approx(3 * 0.6)
        assert b.decoded_upper == pytest.approx(4 * 0.6)
        assert b.delay_lower <= b.delay_upper + 1e-12

    def test_validation(self):
        with pytest.raises(ValueError):
            wts_delay_bounds(5, 6, 0.5)
        with pytest.raises(ValueError):
            wts_delay_bounds(5, 0, 0.5)


class TestEnumeration:
    def test_guard(self):
        with pytest.raises(ValueError):
            enumerate_run_tails(21, 0.5)

    def test_small_hand_case(self):
        # M=2, p=0.5: tails are Pr{>=1 zero} = 3/4, Pr{00} = 1/4
        tails = enumerate_run_tails(2, 0.5)
        assert np.allclose(tails, [0.75, 0.25])


class TestWideAgreement:
    def test_triangle_extends_to_sixteen(self):
        for m in (15, 16):
            for p in (0.1, 0.5, 0.9):
                enum = enumerate_run_tails(m, p)
                for d in range(1, m + 1):
                    assert run_tail_partial_fraction(m, p, d) == pytest.approx(
                        enum[d - 1], abs=1e-9
                    )
                    assert run_tail_matrix_power(m, p, d) == pytest.approx(
                        enum[d - 1], abs=1e-9
                    )

    def test_matrix_power_agreement_up_to_two_hundred(self):
        # the closed-form path must track the chain for every size up to 200
        cases = [
            (50, 0.3, 7),
            (120, 0.5, 20),
            (200, 0.2, 3),
            (200, 0.5, 60),
            (200, 0.7, 40),
            (200, 0.9, 100),
            (175, 0.05, 12),
        ]
        for m, p, d in cases:
            est = run_tail(m, p, d)
            assert abs(est.value - run_tail_matrix_power(m, p, d)) < 1e-9, (m, p, d)
        # the route stays genuinely dual (no fallback) on the moderate grid
        for m, p, d in cases:
            if d <= 60 and p <= 0.9:
                assert run_tail(m, p, d).method == "partial-fraction"
