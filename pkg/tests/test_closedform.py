"""Closed-form channel quantities against an independent high-precision oracle.

The oracle below evaluates the literal branch-overlap integral with mpmath:
for the HV dyad each lossy mode contributes

    d ln w / d tau = conj(b) a - |a|^2 / 2 - |b|^2 / 2

along the exact trajectories a(tau) = alpha e^{(i Gamma - 1/2) tau},
b(tau) = alpha e^{-tau/2}, whose time integral is evaluated symbolically.
No shared-bracket rearrangement from the implementation is reused here.
"""

import math

import mpmath as mp
import pytest

from catforge import (
    PoleError,
    big_g,
    cat_size,
    coherence_c,
    discrimination_efficiency,
    evaluate_point,
    log_coherence_c,
    pure_port,
)

from catforge.closedform import _series_switch


def oracle_log_c(alpha_sq, big_gamma, tau):
    with mp.workdps(50):
        g, t, a2 = mp.mpf(big_gamma), mp.mpf(tau), mp.mpf(alpha_sq)
        z = (1 - mp.e ** ((1j * g - 1) * t)) / (1 - 1j * g)
        return float(2 * a2 * (mp.re(z) + mp.e ** (-t) - 1))


def oracle_big_g(big_gamma, tau):
    with mp.workdps(50):
        g, t = mp.mpf(big_gamma), mp.mpf(tau)
        z = (1 - mp.e ** ((1j * g - 1) * t)) / (1 - 1j * g)
        logc = 2 * (mp.re(z) + mp.e ** (-t) - 1)
        size = 2 * mp.e ** (-t) * mp.sin(g * t / 2) ** 2
        return float(logc / size)


DIRECT_GAMMAS = (0.01, 0.5, 1.0, 2.0, 25.0, 100.0)
DIRECT_TAUS = (0.01, 0.1, 0.3, 1.0, 3.0)


class TestAgainstOracle:
    @pytest.mark.parametrize("big_gamma", DIRECT_GAMMAS)
    @pytest.mark.parametrize("tau", DIRECT_TAUS)
    def test_log_coherence_direct_region(self, big_gamma, tau):
        want = oracle_log_c(2.25, big_gamma, tau)
        assert log_coherence_c(2.25, big_gamma, tau) == pytest.approx(want, rel=1e-9)

    @pytest.mark.parametrize("big_gamma", DIRECT_GAMMAS)
    @pytest.mark.parametrize("tau", DIRECT_TAUS)
    def test_big_g_direct_region(self, big_gamma, tau):
        if abs(math.remainder(big_gamma * tau, 2.0 * math.pi)) < 1e-3:
            pytest.skip("grid point too close to a phase-matching pole")
        want = oracle_big_g(big_gamma, tau)
        assert big_g(big_gamma, tau) == pytest.approx(want, rel=1e-9)

    @pytest.mark.parametrize("big_gamma", (0.01, 1.0, 40.0))
    @pytest.mark.parametrize("tau", (1e-8, 1e-6, 3e-5))
    def test_series_region(self, big_gamma, tau):
        if tau >= _series_switch(big_gamma):
            pytest.skip("point is served by the direct branch")
        assert big_g(big_gamma, tau) == pytest.approx(
            oracle_big_g(big_gamma, tau), rel=1e-12
        )
        assert log_coherence_c(4.0, big_gamma, tau) == pytest.approx(
            oracle_log_c(4.0, big_gamma, tau), rel=1e-12
        )

    @pytest.mark.parametrize("big_gamma", (0.01, 1.0, 100.0))
    def test_series_crossover_is_seamless(self, big_gamma):
        edge = _series_switch(big_gamma)
        below = big_g(big_gamma, edge * (1.0 - 1e-9))
        above = big_g(big_gamma, edge * (1.0 + 1e-9))
        assert below == pytest.approx(above, rel=1e-6)
        assert big_g(big_gamma, edge * 0.999) == pytest.approx(
            oracle_big_g(big_gamma, edge * 0.999), rel=1e-10
        )


class TestFrozenValues:
    """High-precision spot values, frozen from the mpmath oracle."""

    def test_coherence_at_unit_point(self):
        assert coherence_c(1.0, 1.0, 1.0) == pytest.approx(
            0.85774592131680688, rel=1e-14
        )

    def test_coherence_at_moderate_point(self):
        assert coherence_c(2.25, 1.0, 0.2) == pytest.approx(
            0.99485526637342855, rel=1e-14
        )

    def test_big_g_at_unit_point(self):
        assert big_g(1.0, 1.0) == pytest.approx(-0.90736402388749675, rel=1e-13)


class TestLimitsAndInvariants:
    def test_zero_time_keeps_full_coherence(self):
        assert coherence_c(4.0e4, 3.0, 0.0) == 1.0

    def test_zero_intensity_keeps_full_coherence(self):
        assert coherence_c(0.0, 3.0, 0.7) == 1.0

    @pytest.mark.parametrize("big_gamma", (0.01, 5.0, 10.0))
    def test_small_time_slope_is_minus_two_thirds(self, big_gamma):
        tau = 1e-3
        assert big_g(big_gamma, tau) / tau == pytest.approx(-2.0 / 3.0, rel=0.01)

    @pytest.mark.parametrize("big_gamma", (0.2, 1.0, 30.0))
    def test_big_g_nonpositive_before_first_pole(self, big_gamma):
        pole = 2.0 * math.pi / big_gamma
        for i in range(1, 40):
            tau = pole * i / 41.0
            assert big_g(big_gamma, tau) <= 0.0

    def test_coherence_decreasing_in_time(self):
        taus = [0.05 * i for i in range(1, 20)]
        values = [coherence_c(100.0, 0.8, t) for t in taus]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_identity_log_c_equals_size_times_g(self):
        for big_gamma, tau in [(0.3, 0.8), (1.0, 1.0), (25.0, 0.0118), (100.0, 0.011)]:
            lhs = log_coherence_c(60.0, big_gamma, tau)
            rhs = cat_size(60.0, big_gamma, tau) * big_g(big_gamma, tau)
            assert lhs == pytest.approx(rhs, rel=1e-14)

    def test_cat_size_formula(self):
        a2, big_gamma, tau = 60.0, 25.0, 0.0118
        want = 2.0 * math.exp(-tau) * math.sin(big_gamma * tau / 2.0) ** 2 * a2
        assert cat_size(a2, big_gamma, tau) == pytest.approx(want, rel=1e-14)


class TestPoles:
    def test_exact_pole_raises(self):
        with pytest.raises(PoleError):
            big_g(1.0, 2.0 * math.pi)

    def test_higher_pole_raises(self):
        with pytest.raises(PoleError):
            big_g(2.0, 2.0 * math.pi)

    def test_near_pole_stays_finite(self):
        value = big_g(1.0, 2.0 * math.pi * (1.0 - 1e-6))
        assert math.isfinite(value)
        assert value < -1e8

    def test_zero_kerr_hits_the_origin_pole_guard(self):
        # Gamma = 0 never opens a cat; the direct branch divides by sin^2 = 0
        with pytest.raises(PoleError):
            big_g(0.0, 1.0)


class TestPurePort:
    @pytest.mark.parametrize("big_gamma,tau", [(1.0, 0.2), (25.0, 0.0118), (0.5, 1.3)])
    def test_closed_expression(self, big_gamma, tau):
        alpha = 1.4 - 0.3j
        import cmath

        want = (
            math.exp(-0.5 * tau)
            * (cmath.exp(1j * big_gamma * tau) + 1.0)
            * alpha
            / math.sqrt(2.0)
        )
        assert pure_port(alpha, big_gamma, tau) == pytest.approx(want, rel=1e-14)

    @pytest.mark.parametrize("big_gamma,tau", [(1.0, 0.2), (25.0, 0.0118), (3.0, 0.9)])
    def test_energy_split_with_cat_size(self, big_gamma, tau):
        alpha = 1.5
        bright = abs(pure_port(alpha, big_gamma, tau)) ** 2
        dark = cat_size(alpha * alpha, big_gamma, tau)
        assert bright + dark == pytest.approx(
            2.0 * math.exp(-tau) * alpha * alpha, rel=1e-13
        )


class TestDiscriminationEfficiency:
    def test_identical_amplitudes_are_indistinguishable(self):
        assert discrimination_efficiency(1.3 + 0.2j, 1.3 + 0.2j) == 0.0

    def test_unit_separation(self):
        assert discrimination_efficiency(1.0, 0.0) == pytest.approx(
            -math.expm1(-0.5), rel=1e-15
        )

    def test_complex_pair(self):
        a, b = 1.0 + 0.0j, 0.5 + 0.2j
        want = -math.expm1(-0.5 * abs(a - b) ** 2)
        assert discrimination_efficiency(a, b) == pytest.approx(want, rel=1e-14)

    def test_saturates_toward_one(self):
        assert discrimination_efficiency(6.0, -6.0) == pytest.approx(1.0, abs=1e-12)


class TestEvaluatePoint:
    def test_fields_are_mutually_consistent(self):
        point = evaluate_point(1.5 + 0.5j, 2.0, 0.4)
        assert point.alpha_sq == pytest.approx(2.5, rel=1e-15)
        assert point.coherence == pytest.approx(math.exp(point.log_coherence), rel=1e-15)
        assert point.even_fidelity == pytest.approx(0.5 * (1.0 + point.coherence))
        assert point.log_coherence == pytest.approx(
            point.cat_size * point.big_g, rel=1e-13
        )
        assert point.gamma_out == pure_port(1.5 + 0.5j, 2.0, 0.4)

    def test_pole_propagates(self):
        with pytest.raises(PoleError):
            evaluate_point(1.0, 1.0, 2.0 * math.pi)
