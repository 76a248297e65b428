import math

import numpy as np
import pytest

from larmor.phases import exact_product, phase_of, phasor, wrap_phase


class TestWrapPhase:
    @pytest.mark.parametrize("phase,expected", [
        (0.0, 0.0),
        (math.pi, math.pi),
        (-math.pi, math.pi),
        (3 * math.pi, math.pi),
        (2 * math.pi + 0.5, 0.5),
        (-2 * math.pi - 0.5, -0.5),
    ])
    def test_maps_into_half_open_interval(self, phase, expected):
        """Phases land in (-pi, pi]."""
        assert wrap_phase(phase) == pytest.approx(expected, abs=1e-12)

    def test_array_input(self):
        """Arrays are wrapped elementwise."""
        wrapped = wrap_phase(np.array([0.1, 7.0, -7.0]))
        assert wrapped.shape == (3,)
        assert np.all(wrapped > -math.pi) and np.all(wrapped <= math.pi)

    def test_scalar_stays_scalar(self):
        """Scalars come back as Python floats."""
        assert isinstance(wrap_phase(1.0), float)


def test_phase_of_all_quadrants():
    """Full-quadrant phase of complex amplitudes."""
    assert phase_of(1j) == pytest.approx(math.pi / 2)
    assert phase_of(-1 - 1e-300j) == pytest.approx(math.pi)
    assert phase_of(-1 + 0j) == math.pi
    assert phase_of(-1j) == pytest.approx(-math.pi / 2)


def test_exact_product_is_error_free():
    """hi + lo recovers the exact product of two doubles."""
    x, y = 1.0 + 2.0**-30, 1.0 + 2.0**-29
    hi, lo = exact_product(x, y)
    assert hi == x * y
    assert lo == 2.0**-59


class TestPhasor:
    def test_unit_modulus(self):
        """Real phases give unit-modulus phasors."""
        values = phasor(np.array([1e3, 1e8, 1e11]), 1e-2)
        assert np.allclose(np.abs(values), 1.0, atol=1e-15)

    def test_matches_plain_exponent_for_small_phases(self):
        """Small products agree with exp(i k a)."""
        assert phasor(3.0, 0.25) == pytest.approx(np.exp(0.75j), abs=1e-15)

    def test_evanescent_wavenumber_decays(self):
        """i*kappa gives exp(-kappa a)."""
        assert phasor(2j, 1.5) == pytest.approx(math.exp(-3.0), abs=1e-15)

    def test_carries_low_bits_of_large_products(self):
        """phasor(k, a) * phasor(-k, a) is exactly unity up to rounding of the exponentials."""
        k, a = 1.5882237e11, 2.4697775e-05
        assert phasor(k, a) * phasor(-k, a) == pytest.approx(1.0, abs=1e-15)
