"""Invariant suite run by `larmor selftest`.

Every check is deterministic: randomized inputs come from a seeded
numpy Generator.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from larmor.phases import phase_of, wrap_phase
from larmor.precession import (
    CALIBRATED_WIDTH,
    TransmittedSpinor,
    detection_probability_modified,
    detection_probability_standard,
    high_energy_limit_phases,
)
from larmor.scattering import reflection_amplitude, transmission_amplitude, transmission_re_im_closed_form
from larmor.transfer_matrix import transfer_matrix_amplitudes
from larmor.units import NEUTRON, ParticleSpec, channel_wavenumbers_array, zeeman_wavenumber_sq
from larmor.wavepacket import KGrid, default_grid, integrate_density, packet_from_velocity, spectral_amplitude

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240101
UNITARITY_SAMPLES = 10_000
ORACLE_SAMPLES = 1_000

UNITARITY_TOLERANCE = 1e-12
CLOSED_FORM_TOLERANCE = 1e-10
ORACLE_TOLERANCE = 1e-10
REDUCTION_TOLERANCE = 1e-14
NORMALIZATION_TOLERANCE = 1e-6
LIMIT_VELOCITIES = (200.0, 2000.0, 20000.0)
LIMIT_FIELD = 2.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


@dataclass(frozen=True)
class ChannelSamples:
    """Random propagating inputs, one row per sample, for both spin channels."""
    v: np.ndarray
    B: np.ndarray
    a: np.ndarray
    k: np.ndarray
    k_barrier: np.ndarray
    k_well: np.ndarray

    def channels(self):
        """(k, k_chan, a) for the barrier rows followed by the well rows."""
        return (
            np.concatenate([self.k, self.k]),
            np.concatenate([self.k_barrier, self.k_well]),
            np.concatenate([self.a, self.a]),
        )


def _log_uniform(rng: np.random.Generator, lo: float, hi: float, n: int) -> np.ndarray:
    return np.exp(rng.uniform(math.log(lo), math.log(hi), n))


def sample_propagating_inputs(
    rng: np.random.Generator,
    n: int,
    particle: ParticleSpec = NEUTRON,
) -> ChannelSamples:
    """Log-uniform v in [1, 1e4] m/s, B in [1e-4, 5] T, a in [1e-6, 1e-2] m with E > mu*B."""
    v = np.empty(0)
    B = np.empty(0)
    a = np.empty(0)
    while v.size < n:
        batch = 2 * (n - v.size)
        v_try = _log_uniform(rng, 1.0, 1e4, batch)
        B_try = _log_uniform(rng, 1e-4, 5.0, batch)
        a_try = _log_uniform(rng, 1e-6, 1e-2, batch)
        k_try = particle.mass * v_try / particle.hbar
        keep = k_try * k_try > zeeman_wavenumber_sq(particle, B_try)
        v = np.concatenate([v, v_try[keep]])
        B = np.concatenate([B, B_try[keep]])
        a = np.concatenate([a, a_try[keep]])
    v, B, a = v[:n], B[:n], a[:n]

    k = particle.mass * v / particle.hbar
    q2 = zeeman_wavenumber_sq(particle, B)
    k_barrier = np.sqrt(k * k - q2)
    k_well = np.sqrt(k * k + q2)
    return ChannelSamples(v=v, B=B, a=a, k=k, k_barrier=k_barrier, k_well=k_well)


def check_unitarity(samples: ChannelSamples) -> CheckResult:
    k, k_chan, a = samples.channels()
    t = transmission_amplitude(k, k_chan, a)
    r = reflection_amplitude(k, k_chan, a)
    worst = float(np.max(np.abs(np.abs(t) ** 2 + np.abs(r) ** 2 - 1.0)))
    return CheckResult(
        "unitarity",
        worst <= UNITARITY_TOLERANCE,
        f"max ||t|^2+|r|^2-1| = {worst:.3e} over {k.size} channels",
    )


def check_closed_form(samples: ChannelSamples) -> CheckResult:
    k, k_chan, a = samples.channels()
    t = transmission_amplitude(k, k_chan, a)
    re, im = transmission_re_im_closed_form(k, k_chan, a)
    worst = float(np.max(np.abs((re + 1j * im) - t) / np.abs(t)))
    return CheckResult(
        "closed form",
        worst <= CLOSED_FORM_TOLERANCE,
        f"max relative |t_closed - t| = {worst:.3e}",
    )


def check_transfer_matrix(samples: ChannelSamples) -> CheckResult:
    """Errors are relative to sqrt(|t|^2 + |r|^2), since either amplitude may be tiny alone."""
    k, k_chan, a = samples.channels()
    t = transmission_amplitude(k, k_chan, a)
    r = reflection_amplitude(k, k_chan, a)
    t_tm, r_tm = transfer_matrix_amplitudes(k, k_chan, a)
    scale = np.sqrt(np.abs(t) ** 2 + np.abs(r) ** 2)
    worst = float(np.max(np.maximum(np.abs(t_tm - t), np.abs(r_tm - r)) / scale))
    return CheckResult(
        "transfer matrix",
        worst <= ORACLE_TOLERANCE,
        f"max relative amplitude mismatch = {worst:.3e} over {k.size} channels",
    )


def limit_recovery_errors(
    particle: ParticleSpec = NEUTRON,
    B: float = LIMIT_FIELD,
    width: float = CALIBRATED_WIDTH,
    velocities=LIMIT_VELOCITIES,
) -> dict[str, list[float]]:
    """Departures from the high-energy limit phases and unit moduli, per velocity."""
    errors: dict[str, list[float]] = {"phi1": [], "phi2": [], "a": [], "b": []}
    for v in velocities:
        k = particle.mass * v / particle.hbar
        k1, k2 = (float(x) for x in channel_wavenumbers_array(k, particle, B))
        t_up = transmission_amplitude(k, k2, width)
        t_down = transmission_amplitude(k, k1, width)
        phi1_limit, phi2_limit = high_energy_limit_phases(k, k1, k2, width)
        errors["phi1"].append(abs(wrap_phase(phase_of(t_up) - phi1_limit)))
        errors["phi2"].append(abs(wrap_phase(phase_of(t_down) - phi2_limit)))
        errors["a"].append(abs(abs(t_up) - 1.0))
        errors["b"].append(abs(abs(t_down) - 1.0))
    return errors


def check_limit_recovery() -> CheckResult:
    errors = limit_recovery_errors()
    failing = [
        name
        for name, series in errors.items()
        if any(later > earlier / 10.0 for earlier, later in zip(series, series[1:]))
    ]
    detail = "; ".join(f"{name}: " + ", ".join(f"{e:.2e}" for e in series) for name, series in errors.items())
    return CheckResult("limit recovery", not failing, detail if not failing else f"not 10x per decade: {failing}; {detail}")


def check_quadrature() -> CheckResult:
    packet = packet_from_velocity(NEUTRON, 10.0)
    grid = default_grid(packet)
    norm = integrate_density(grid, np.abs(spectral_amplitude(packet, grid.points)) ** 2)

    reference = math.exp(2.1) - math.exp(0.1)
    deviations = []
    for n in (9, 17, 33):
        small = KGrid(0.1, 2.1, n)
        deviations.append(abs(integrate_density(small, np.exp(small.points)).value - reference))
    ratios = [coarse / fine for coarse, fine in zip(deviations, deviations[1:])]

    passed = abs(norm.value - 1.0) <= NORMALIZATION_TOLERANCE and all(ratio >= 8.0 for ratio in ratios)
    return CheckResult(
        "quadrature",
        passed,
        f"norm = {norm.value:.12f} (est. err {norm.error_estimate:.1e}); "
        f"halving ratios {', '.join(f'{r:.1f}' for r in ratios)}",
    )


def check_algebraic_reduction() -> CheckResult:
    theta = np.linspace(-math.pi, math.pi, 1000)
    worst = 0.0
    for phi in (0.0, 0.3, 1.7, 4.0, 11.0):
        spinor = TransmittedSpinor(amp_up=1.0, amp_down=1.0, phase_up=-0.5 * phi, phase_down=0.5 * phi)
        diff = detection_probability_modified(spinor, theta) - detection_probability_standard(phi, theta)
        worst = max(worst, float(np.max(np.abs(diff))))
    return CheckResult(
        "algebraic reduction",
        worst <= REDUCTION_TOLERANCE,
        f"max |p_mod - p_std| with a = b = 1 = {worst:.3e}",
    )


def run_selftest(seed: int = DEFAULT_SEED, samples: int = UNITARITY_SAMPLES) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    channel_samples = sample_propagating_inputs(rng, samples)
    oracle_samples = sample_propagating_inputs(rng, ORACLE_SAMPLES)

    checks: list[tuple[str, Callable[[], CheckResult]]] = [
        ("unitarity", lambda: check_unitarity(channel_samples)),
        ("closed form", lambda: check_closed_form(channel_samples)),
        ("transfer matrix", lambda: check_transfer_matrix(oracle_samples)),
        ("limit recovery", check_limit_recovery),
        ("quadrature", check_quadrature),
        ("algebraic reduction", check_algebraic_reduction),
    ]
    results = []
    for name, check in checks:
        start = time.perf_counter()
        result = check()
        elapsed = time.perf_counter() - start
        result = CheckResult(result.name, result.passed, result.detail, elapsed)
        logger.debug("%s: %s in %.3fs", name, "ok" if result.passed else "FAILED", elapsed)
        results.append(result)
    return results
