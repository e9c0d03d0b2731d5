import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvmdips.channel import displacement_gain_sq, effective_channel, equivalent_excess_noise_general, transmittance
from cvmdips.data import LinkParams
from cvmdips.errors import DomainError, PhysicalityError


class TestLinks:

    @pytest.mark.parametrize("L, expected", [(0.0, 1.0), (30.0, 0.2511886), (50.0, 0.1)])
    def test_transmittance(self, L, expected):
        np.testing.assert_allclose(transmittance(L), expected, rtol=1e-7)

    def test_negative_length(self):
        with pytest.raises(DomainError):
            transmittance(-1.0)

    def test_gain(self):
        np.testing.assert_allclose(displacement_gain_sq(15.0, 1.0), 1.75, rtol=1e-15)
        np.testing.assert_allclose(displacement_gain_sq(15.0, 0.5), 3.5, rtol=1e-15)

    def test_gain_needs_squeezing(self):
        with pytest.raises(DomainError):
            displacement_gain_sq(1.0, 1.0)


class TestEffectiveChannel:

    def test_relay_at_bob(self):
        ch = effective_channel(LinkParams(L_AC=30.0))
        np.testing.assert_allclose(ch.T, 0.875 * 0.2511886, rtol=1e-7)
        np.testing.assert_allclose(ch.eps_th, 0.0498107, rtol=1e-6)
        np.testing.assert_allclose(ch.chi_hom, 0.0358974, rtol=1e-6)
        np.testing.assert_allclose(ch.chi_line, (1 - ch.T) / ch.T + ch.eps_th, rtol=1e-12)
        np.testing.assert_allclose(ch.chi_t, ch.chi_line + 2 * ch.chi_hom / ch.T, rtol=1e-12)

    def test_ideal_detectors_add_no_noise(self):
        ch = effective_channel(LinkParams(L_AC=10.0, eta=1.0, v_el=0.0))
        assert ch.chi_hom == 0.0
        assert ch.chi_t == ch.chi_line

    def test_symmetric_relay_keeps_transmittance(self):
        # with T_A = T_B the gain cancels the loss
        ch = effective_channel(LinkParams(L_AC=10.0, L_BC=10.0))
        np.testing.assert_allclose(ch.T, 0.875, rtol=1e-12)

    def test_relay_near_alice_is_rejected(self):
        with pytest.raises(PhysicalityError):
            effective_channel(LinkParams(L_AC=0.0, L_BC=20.0, V_B=100.0))

    @given(st.floats(0.0, 100.0), st.floats(0.0, 20.0), st.floats(1.5, 200.0), st.floats(0.0, 0.1), st.floats(0.0, 0.1))
    @settings(max_examples=100, deadline=None)
    def test_general_form_agrees_at_optimal_gain(self, L_AC, L_BC, V_B, eps_A, eps_B):
        link = LinkParams(L_AC=L_AC, L_BC=L_BC, V_B=V_B, eps_A=eps_A, eps_B=eps_B)
        T_A, T_B = transmittance(L_AC), transmittance(L_BC)
        g = math.sqrt(displacement_gain_sq(V_B, T_B))
        general = equivalent_excess_noise_general(V_B, g, T_A, T_B, eps_A, eps_B)
        expected = (T_B / T_A) * (eps_B - 2) + eps_A + 2 / T_A
        np.testing.assert_allclose(general, expected, rtol=1e-9, atol=1e-9 * (T_B / T_A))
        try:
            np.testing.assert_allclose(effective_channel(link).eps_th, expected, rtol=1e-12)
        except PhysicalityError:
            pass

    @pytest.mark.parametrize("factor", [0.8, 1.25])
    def test_gain_mismatch_adds_noise(self, factor):
        T_A, T_B = transmittance(20.0), transmittance(5.0)
        g = math.sqrt(displacement_gain_sq(15.0, T_B))
        optimal = equivalent_excess_noise_general(15.0, g, T_A, T_B, 0.01, 0.01)
        assert equivalent_excess_noise_general(15.0, factor * g, T_A, T_B, 0.01, 0.01) > optimal


class TestNoiseOrdering:

    @given(st.floats(0.0, 100.0), st.floats(0.0, 1.0), st.floats(0.5, 1.0), st.floats(0.0, 0.2))
    @settings(max_examples=100, deadline=None)
    def test_detection_only_adds_noise(self, L_AC, fraction, eta, v_el):
        # relay no further from Alice than from Bob
        ch = effective_channel(LinkParams(L_AC=L_AC, L_BC=fraction * L_AC, eta=eta, v_el=v_el))
        assert ch.chi_hom >= 0.0
        assert ch.chi_t >= ch.chi_line

    @pytest.mark.parametrize("L_BC", [0.0, 5.0])
    def test_thermal_noise_grows_with_alices_link(self, L_BC):
        eps_th = [effective_channel(LinkParams(L_AC=L, L_BC=L_BC)).eps_th for L in np.linspace(L_BC, 100.0, 201)]
        assert np.all(np.diff(eps_th) >= 0.0)
