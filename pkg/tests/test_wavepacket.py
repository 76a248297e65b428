import logging
import math

import numpy as np
import pytest

from larmor.errors import DomainError, EvanescentChannelError
from larmor.precession import CALIBRATED_WIDTH, detection_probability_standard, standard_phase
from larmor.scattering import FieldRegion
from larmor.units import NEUTRON, beam_from_wavenumber
from larmor.wavepacket import (
    GaussianPacket,
    KGrid,
    build_density_table,
    default_grid,
    integrate_density,
    packet_from_velocity,
    propagating_cutoff,
    spectral_amplitude,
    spin_x_density_modified,
    spin_x_density_standard,
)


def field(B: float) -> FieldRegion:
    return FieldRegion(B=B, width_a=CALIBRATED_WIDTH)


def l2_at(v0: float, B: float) -> float:
    packet = packet_from_velocity(NEUTRON, v0)
    return build_density_table(packet, NEUTRON, field(B)).l2_distance()


class TestGaussianPacket:
    def test_sigma_k(self):
        """sigma_k = 1 / (2 delta)."""
        assert GaussianPacket(x0=0.0, k0=1e8, delta=2e-7).sigma_k == pytest.approx(2.5e6)

    @pytest.mark.parametrize("kwargs", [
        {"k0": 0.0},
        {"k0": -1e8},
        {"delta": 0.0},
        {"x0": math.inf},
    ])
    def test_validation(self, kwargs):
        """Non-positive k0 or delta and non-finite x0 are rejected."""
        args = {"x0": 0.0, "k0": 1e8, "delta": 1e-7} | kwargs
        with pytest.raises(DomainError):
            GaussianPacket(**args)

    def test_from_velocity(self):
        """k0 = m v0 / hbar and sigma_k = sigma_rel * k0."""
        packet = packet_from_velocity(NEUTRON, 10.0, sigma_rel=0.05)
        assert packet.k0 == pytest.approx(NEUTRON.mass * 10.0 / NEUTRON.hbar)
        assert packet.sigma_k == pytest.approx(0.05 * packet.k0)


class TestSpectralAmplitude:
    def test_peak_modulus(self):
        """|g(k0)| = (2 delta^2 / pi)^(1/4)."""
        packet = GaussianPacket(x0=1e-6, k0=1e8, delta=1e-7)
        assert abs(spectral_amplitude(packet, 1e8)) == pytest.approx((2e-14 / math.pi) ** 0.25, rel=1e-14)

    def test_modulus_is_even(self):
        """|g(k0 + d)| = |g(k0 - d)|."""
        packet = GaussianPacket(x0=3e-6, k0=1e8, delta=1e-7)
        for d in (1e5, 1e6, 7e6):
            assert abs(spectral_amplitude(packet, 1e8 + d)) == pytest.approx(abs(spectral_amplitude(packet, 1e8 - d)), rel=1e-12)

    def test_normalized_on_default_grid(self):
        """Simpson on the default grid integrates |g|^2 to 1 +/- 1e-6."""
        packet = packet_from_velocity(NEUTRON, 10.0)
        grid = default_grid(packet)
        result = integrate_density(grid, np.abs(spectral_amplitude(packet, grid.points)) ** 2)
        assert result.value == pytest.approx(1.0, abs=1e-6)
        assert result.error_estimate < 1e-6


class TestKGrid:
    def test_default_grid_layout(self):
        """Default grid spans k0 +/- 6 sigma_k with 2001 points."""
        packet = packet_from_velocity(NEUTRON, 25.0)
        grid = default_grid(packet)
        assert grid.n_points == 2001
        assert grid.k_min == pytest.approx(packet.k0 - 6 * packet.sigma_k)
        assert grid.k_max == pytest.approx(packet.k0 + 6 * packet.sigma_k)
        assert grid.spacing == pytest.approx(12 * packet.sigma_k / 2000)

    @pytest.mark.parametrize("k_min,k_max,n", [(1.0, 2.0, 4), (1.0, 2.0, 1), (2.0, 1.0, 5), (0.0, 1.0, 5)])
    def test_validation(self, k_min, k_max, n):
        """Simpson grids need 0 < k_min < k_max and an odd count >= 3."""
        with pytest.raises(DomainError):
            KGrid(k_min, k_max, n)


class TestIntegrateDensity:
    def test_constant_density(self):
        """A constant c integrates to c * (k_max - k_min)."""
        grid = KGrid(1.0e8, 1.2e8, 101)
        result = integrate_density(grid, np.full(101, 3.5))
        assert result.value == pytest.approx(3.5 * 0.2e8, rel=1e-13)
        assert result.error_estimate == pytest.approx(0.0, abs=1e-6)

    def test_fourth_order_convergence(self):
        """Halving the spacing cuts the error by at least 8x for smooth integrands."""
        exact = math.exp(2.1) - math.exp(0.1)
        errors = []
        for n in (9, 17, 33):
            grid = KGrid(0.1, 2.1, n)
            errors.append(abs(integrate_density(grid, np.exp(grid.points)).value - exact))
        assert errors[0] / errors[1] >= 8.0
        assert errors[1] / errors[2] >= 8.0

    def test_richardson_estimate_tracks_error(self):
        """The error estimate has the size of the true error."""
        grid = KGrid(0.1, 2.1, 17)
        result = integrate_density(grid, np.exp(grid.points))
        error = abs(result.value - (math.exp(2.1) - math.exp(0.1)))
        assert 0.2 * error < result.error_estimate < 5 * error

    def test_length_mismatch(self):
        """Sample count must match the grid."""
        with pytest.raises(DomainError, match="density"):
            integrate_density(KGrid(1.0, 2.0, 5), np.ones(7))


class TestDensities:
    def test_zero_field_curves_coincide(self):
        """B = 0: both densities equal |g|^2 and integrate to 1."""
        packet = packet_from_velocity(NEUTRON, 10.0)
        table = build_density_table(packet, NEUTRON, field(0.0))
        assert np.max(np.abs(table.density_modified - table.spectral)) <= 1e-12 * table.spectral.max()
        assert np.max(np.abs(table.density_standard - table.density_modified)) <= 1e-12 * table.spectral.max()
        integrated = table.integrated()
        assert integrated["standard"].value == pytest.approx(1.0, abs=1e-6)
        assert integrated["modified"].value == pytest.approx(1.0, abs=1e-6)

    def test_pointwise_bounds(self):
        """0 <= density <= |g|^2 for both treatments."""
        packet = packet_from_velocity(NEUTRON, 10.0)
        table = build_density_table(packet, NEUTRON, field(0.15))
        slack = 1.0 + 1e-12
        assert np.all(table.density_modified >= 0) and np.all(table.density_standard >= 0)
        assert np.all(table.density_modified <= table.spectral * slack)
        assert np.all(table.density_standard <= table.spectral * slack)
        assert table.integrated()["modified"].value <= 1.0 + 1e-6

    def test_table_matches_pointwise_functions(self):
        """Table columns equal the per-k density functions."""
        packet = packet_from_velocity(NEUTRON, 25.0)
        table = build_density_table(packet, NEUTRON, field(0.03))
        k = table.k[::400]
        np.testing.assert_allclose(spin_x_density_modified(packet, NEUTRON, field(0.03), k), table.density_modified[::400], rtol=1e-13)
        np.testing.assert_allclose(spin_x_density_standard(packet, NEUTRON, field(0.03), k), table.density_standard[::400], rtol=1e-13)
        np.testing.assert_allclose(table.density_modified, table.spectral * table.p_modified_raw, rtol=1e-15)

    def test_standard_phase_per_component(self):
        """Each component precesses with its own velocity hbar k / m."""
        packet = packet_from_velocity(NEUTRON, 10.0)
        table = build_density_table(packet, NEUTRON, field(0.15))
        for index in (0, 1000, 2000):
            k = float(table.k[index])
            phi = standard_phase(NEUTRON, field(0.15), beam_from_wavenumber(NEUTRON, k)).phi
            assert table.p_standard[index] == pytest.approx(detection_probability_standard(phi, 0.0), abs=1e-12)

    def test_scalar_input(self):
        """Scalar k gives a float density."""
        packet = packet_from_velocity(NEUTRON, 10.0)
        assert isinstance(spin_x_density_modified(packet, NEUTRON, field(0.1), packet.k0), float)
        assert isinstance(spin_x_density_standard(packet, NEUTRON, field(0.1), packet.k0), float)

    def test_workers_do_not_change_results(self):
        """Chunked evaluation on threads matches the serial table."""
        packet = packet_from_velocity(NEUTRON, 10.0)
        serial = build_density_table(packet, NEUTRON, field(0.15))
        threaded = build_density_table(packet, NEUTRON, field(0.15), workers=4)
        np.testing.assert_allclose(threaded.density_modified, serial.density_modified, rtol=1e-14)


class TestTrends:
    def test_departure_grows_with_field(self):
        """At v0 = 10 m/s the L2 distance grows over B = 0.001, 0.03, 0.15 T."""
        distances = [l2_at(10.0, B) for B in (0.001, 0.03, 0.15)]
        assert distances[0] < distances[1] < distances[2]
        assert distances[2] > 10 * distances[0]

    def test_departure_grows_as_packet_slows(self):
        """At B = 0.15 T the L2 distance grows over v0 = 100, 25, 10 m/s."""
        distances = [l2_at(v0, 0.15) for v0 in (100.0, 25.0, 10.0)]
        assert distances[0] < distances[1] < distances[2]

    def test_fast_packet_overlaps(self):
        """v0 = 100 m/s, B = 0.15 T: max gap below 1e-3 of the peak density."""
        packet = packet_from_velocity(NEUTRON, 100.0)
        table = build_density_table(packet, NEUTRON, field(0.15))
        assert table.max_gap() < 1e-3 * table.spectral.max()


class TestEvanescentGrid:
    def slow_packet(self):
        return packet_from_velocity(NEUTRON, 5.0)

    def test_fails_fast_with_cutoff(self):
        """Grid points below the barrier top are reported with the cutoff k."""
        with pytest.raises(EvanescentChannelError) as excinfo:
            build_density_table(self.slow_packet(), NEUTRON, field(2.0))
        assert excinfo.value.cutoff_k == pytest.approx(propagating_cutoff(NEUTRON, field(2.0)))
        assert excinfo.value.k is not None

    def test_truncation(self, caplog):
        """Truncation keeps only propagating points, an odd count, and warns."""
        with caplog.at_level(logging.WARNING, logger="larmor.wavepacket"):
            table = build_density_table(self.slow_packet(), NEUTRON, field(2.0), truncate_evanescent=True)
        assert table.grid.k_min > propagating_cutoff(NEUTRON, field(2.0))
        assert table.grid.n_points % 2 == 1
        assert "evanescent" in caplog.text

    def test_continuation(self):
        """With continuation every grid point is evaluated."""
        table = build_density_table(self.slow_packet(), NEUTRON, field(2.0), allow_evanescent=True)
        assert table.grid.n_points == 2001
        assert np.all(np.isfinite(table.density_modified))
        assert np.all(table.density_modified <= table.spectral * (1.0 + 1e-12))
