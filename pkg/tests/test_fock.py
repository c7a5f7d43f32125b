"""Number-basis oracle: truncation handling, integration accuracy, extraction."""

import cmath
import math

import numpy as np
import pytest

from catforge import (
    Channel,
    ChannelConfig,
    CutoffError,
    XpmParams,
    coherence_c,
    coherent_vector,
    dyad_to_fock,
    evolve_sliced,
    extract_coherence,
    integrate,
    product_density,
    qubit_coherence,
    trace_distance,
    xpm_input_density,
    xpm_input_state,
)
from catforge.fock import FockDensity


def _config(big_gamma=1.0, tau=0.2):
    return ChannelConfig(
        channels=(
            Channel(mode=0, qubit="H", chi=big_gamma, gamma=1.0, duration=tau),
            Channel(mode=1, qubit="V", chi=big_gamma, gamma=1.0, duration=tau),
        )
    )


class TestCoherentVector:
    def test_components_match_poisson_amplitudes(self):
        alpha = 0.9 + 0.4j
        vec = coherent_vector(alpha, 12)
        # ratios cancel the renormalization applied after truncation
        for n in (1, 2, 5):
            want = alpha**n / math.sqrt(math.factorial(n))
            assert vec[n] / vec[0] == pytest.approx(want, rel=1e-12)
        pref = math.exp(-0.5 * abs(alpha) ** 2)
        assert vec[0] == pytest.approx(pref, rel=1e-8)

    def test_vector_is_normalized(self):
        vec = coherent_vector(1.2, 20)
        assert np.vdot(vec, vec).real == pytest.approx(1.0, rel=1e-12)

    def test_insufficient_cutoff_raises(self):
        with pytest.raises(CutoffError):
            coherent_vector(2.2, 6)

    def test_vacuum(self):
        vec = coherent_vector(0.0, 4)
        assert vec[0] == 1.0
        assert np.all(vec[1:] == 0.0)


class TestDensityConstruction:
    def test_input_density_has_unit_trace(self):
        rho = xpm_input_density(1.0, (12, 12))
        assert rho.trace() == pytest.approx(1.0, rel=1e-10)

    def test_input_density_is_hermitian(self):
        rho = xpm_input_density(1.0, (12, 12))
        assert rho.hermiticity_defect() < 1e-14

    def test_qubit_label_validated(self):
        with pytest.raises(ValueError):
            product_density(1.0, 1.0, "diagonal", (12, 12))

    def test_dyad_round_trip_matches_direct_construction(self):
        rho_direct = xpm_input_density(0.8, (10, 10))
        rho_from_dyads = dyad_to_fock(xpm_input_state(0.8), (10, 10))
        assert trace_distance(rho_direct, rho_from_dyads) < 1e-12


class TestIntegrate:
    def test_pure_loss_keeps_a_coherent_state(self):
        tau = 0.3
        config = ChannelConfig(
            channels=(Channel(mode=0, qubit="H", chi=0.0, gamma=1.0, duration=tau),)
        )
        rho = integrate(product_density(1.0, 0.0, "H", (12, 2)), config, tau)
        psi = np.kron(
            np.kron(coherent_vector(math.exp(-0.5 * tau), 12), coherent_vector(0.0, 2)),
            np.array([1.0, 0.0], dtype=np.complex128),
        )
        fid = np.vdot(psi, rho.matrix @ psi).real
        assert fid > 1.0 - 1e-6

    def test_pure_kerr_rotates_the_coupled_component(self):
        chi, t = 1.3, 0.4
        config = ChannelConfig(
            channels=(Channel(mode=0, qubit="H", chi=chi, gamma=0.0, duration=t),)
        )
        rho = integrate(product_density(1.0, 0.0, "H", (12, 2)), config, t)
        psi = np.kron(
            np.kron(coherent_vector(cmath.exp(1j * chi * t), 12), coherent_vector(0.0, 2)),
            np.array([1.0, 0.0], dtype=np.complex128),
        )
        fid = np.vdot(psi, rho.matrix @ psi).real
        assert fid > 1.0 - 1e-6

    def test_trace_is_conserved(self):
        rho = integrate(xpm_input_density(1.0, (12, 12)), _config(), 0.2)
        assert abs(rho.trace() - 1.0) < 1e-9

    def test_state_stays_positive(self):
        rho = integrate(xpm_input_density(1.0, (12, 12)), _config(), 0.2)
        eigs = np.linalg.eigvalsh(rho.matrix)
        assert eigs.min() > -1e-10

    def test_zero_time_is_identity(self):
        rho0 = xpm_input_density(1.0, (12, 12))
        rho = integrate(rho0, _config(), 0.0)
        assert np.array_equal(rho.tensor, rho0.tensor)

    def test_population_escaping_the_cutoff_raises(self):
        d = 5
        tensor = np.zeros((d, d, 2, d, d, 2), dtype=np.complex128)
        tensor[d - 1, 0, 0, d - 1, 0, 0] = 1.0
        top_heavy = FockDensity((d, d), tensor)
        with pytest.raises(CutoffError):
            integrate(top_heavy, _config(), 0.2)

    def test_bad_step_rejected(self):
        rho0 = xpm_input_density(0.5, (8, 8))
        with pytest.raises(ValueError):
            integrate(rho0, _config(), 0.2, dt=-0.01)
        with pytest.raises(ValueError):
            integrate(rho0, _config(), 0.2, dt=math.nan)


class TestCoherenceExtraction:
    def test_matches_closed_form_at_small_amplitude(self):
        alpha, big_gamma, tau = 1.0, 1.0, 0.2
        rho = integrate(xpm_input_density(alpha, (14, 14)), _config(big_gamma, tau), tau)
        c = extract_coherence(rho)
        assert c.real == pytest.approx(coherence_c(alpha**2, big_gamma, tau), abs=1e-8)
        assert abs(c.imag) < 1e-10

    def test_matches_the_dyad_engine(self):
        alpha, tau = 1.0, 0.2
        config = _config(1.0, tau)
        rho = integrate(xpm_input_density(alpha, (14, 14)), config, tau)
        evolved = evolve_sliced(xpm_input_state(alpha), config, 2000)
        assert extract_coherence(rho).real == pytest.approx(
            qubit_coherence(evolved).real, abs=1e-5
        )

    def test_stable_under_cutoff_doubling(self):
        tau = 0.2
        config = _config(1.0, tau)
        c_small = extract_coherence(integrate(xpm_input_density(1.0, (14, 14)), config, tau))
        c_large = extract_coherence(integrate(xpm_input_density(1.0, (20, 20)), config, tau))
        assert abs(c_small - c_large) < 1e-8

    def test_input_state_has_unit_coherence(self):
        rho = xpm_input_density(1.0, (12, 12))
        assert extract_coherence(rho) == pytest.approx(1.0 + 0.0j, abs=1e-10)


class TestTraceDistance:
    def test_identical_states(self):
        rho = xpm_input_density(0.7, (10, 10))
        assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-14)

    def test_orthogonal_pure_states(self):
        a = product_density(0.0, 0.0, "H", (4, 4))
        b = product_density(0.0, 0.0, "V", (4, 4))
        assert trace_distance(a, b) == pytest.approx(1.0, rel=1e-12)

    def test_engine_and_integrator_agree_on_the_full_state(self):
        alpha, tau = 1.0, 0.2
        config = _config(1.0, tau)
        rho = integrate(xpm_input_density(alpha, (14, 14)), config, tau)
        evolved = evolve_sliced(xpm_input_state(alpha), config, 2000)
        assert trace_distance(rho, dyad_to_fock(evolved, (14, 14))) < 1e-5
