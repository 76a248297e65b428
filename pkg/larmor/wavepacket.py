"""Gaussian wave packets through the rotator, one plane-wave component at a time.

Each wavenumber of the packet's spectrum is rotated independently with the
plane-wave machinery; the +x spin projection weighted by |g(k)|^2 gives the
spectral spin density, integrated here with composite Simpson quadrature.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from larmor.errors import DomainError
from larmor.phases import phasor
from larmor.scattering import FieldRegion, transmission_amplitude
from larmor.units import ParticleSpec, channel_wavenumbers_array, zeeman_wavenumber_sq

logger = logging.getLogger(__name__)

DEFAULT_GRID_POINTS = 2001
DEFAULT_GRID_SIGMAS = 6.0
DEFAULT_SIGMA_REL = 0.05


@dataclass(frozen=True)
class GaussianPacket:
    """psi(x) ~ exp(-(x - x0)^2 / (4 delta^2)) exp(i k0 x)."""
    x0: float
    k0: float
    delta: float

    def __post_init__(self):
        if not math.isfinite(self.x0):
            raise DomainError("x0", f"must be finite, got {self.x0!r}")
        if not math.isfinite(self.k0) or self.k0 <= 0:
            raise DomainError("k0", f"must be positive, got {self.k0!r}")
        if not math.isfinite(self.delta) or self.delta <= 0:
            raise DomainError("delta", f"must be positive, got {self.delta!r}")

    @property
    def sigma_k(self) -> float:
        """Standard deviation of |g(k)|^2."""
        return 1.0 / (2.0 * self.delta)


@dataclass(frozen=True)
class KGrid:
    k_min: float
    k_max: float
    n_points: int

    def __post_init__(self):
        if not (math.isfinite(self.k_min) and math.isfinite(self.k_max)) or not (0 < self.k_min < self.k_max):
            raise DomainError("k_grid", f"need 0 < k_min < k_max, got [{self.k_min!r}, {self.k_max!r}]")
        if self.n_points < 3 or self.n_points % 2 == 0:
            raise DomainError("n_points", f"Simpson needs an odd count >= 3, got {self.n_points!r}")

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.k_min, self.k_max, self.n_points)

    @property
    def spacing(self) -> float:
        return (self.k_max - self.k_min) / (self.n_points - 1)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float


@dataclass(frozen=True)
class SpinDensityTable:
    grid: KGrid
    k: np.ndarray
    spectral: np.ndarray
    p_standard: np.ndarray
    p_modified_raw: np.ndarray
    p_modified_normalized: np.ndarray
    density_standard: np.ndarray
    density_modified: np.ndarray

    def integrated(self) -> dict[str, QuadratureResult]:
        return {
            "spectral": integrate_density(self.grid, self.spectral),
            "standard": integrate_density(self.grid, self.density_standard),
            "modified": integrate_density(self.grid, self.density_modified),
        }

    def l2_distance(self) -> float:
        return l2_distance(self.k, self.density_standard, self.density_modified)

    def max_gap(self) -> float:
        return max_gap(self.density_standard, self.density_modified)


def packet_from_velocity(particle: ParticleSpec, v0: float, sigma_rel: float = DEFAULT_SIGMA_REL, x0: float = 0.0) -> GaussianPacket:
    """Packet centred on k0 = m v0/hbar with spectral width sigma_k = sigma_rel * k0."""
    if not math.isfinite(v0) or v0 <= 0:
        raise DomainError("v0", f"must be positive, got {v0!r}")
    if not math.isfinite(sigma_rel) or sigma_rel <= 0:
        raise DomainError("sigma_rel", f"must be positive, got {sigma_rel!r}")
    k0 = particle.mass * v0 / particle.hbar
    return GaussianPacket(x0=x0, k0=k0, delta=1.0 / (2.0 * sigma_rel * k0))


def default_grid(packet: GaussianPacket, n_points: int = DEFAULT_GRID_POINTS, n_sigmas: float = DEFAULT_GRID_SIGMAS) -> KGrid:
    """k0 +/- n_sigmas * sigma_k, clipped to positive k."""
    half = n_sigmas * packet.sigma_k
    k_min = packet.k0 - half
    if k_min <= 0:
        logger.warning("packet spectrum reaches k <= 0; grid clipped at k0/1e3")
        k_min = packet.k0 * 1e-3
    return KGrid(k_min=k_min, k_max=packet.k0 + half, n_points=n_points)


def spectral_amplitude(packet: GaussianPacket, k):
    """g(k) = (2 delta^2/pi)^{1/4} exp(-delta^2 (k - k0)^2) exp(i k x0)."""
    k = np.asarray(k, dtype=float)
    norm = (2.0 * packet.delta**2 / math.pi) ** 0.25
    g = norm * np.exp(-(packet.delta * (k - packet.k0)) ** 2) * phasor(k, packet.x0)
    return complex(g) if g.ndim == 0 else g


def _spectral_weight(packet: GaussianPacket, k: np.ndarray) -> np.ndarray:
    return np.abs(spectral_amplitude(packet, k)) ** 2


def _transmissions(particle: ParticleSpec, field: FieldRegion, k: np.ndarray, allow_evanescent: bool):
    k_barrier, k_well = channel_wavenumbers_array(k, particle, field.B, allow_evanescent)
    t_up = np.asarray(transmission_amplitude(k, k_well, field.width_a))
    t_down = np.asarray(transmission_amplitude(k, k_barrier, field.width_a))
    return t_up, t_down


def _standard_phase_of_k(particle: ParticleSpec, field: FieldRegion, k: np.ndarray) -> np.ndarray:
    """phi(k) = 2 mu B a m / (hbar^2 k), i.e. v = hbar k / m per component."""
    return 2.0 * particle.mu * field.B * field.width_a * particle.mass / (particle.hbar**2 * k)


def spin_x_density_modified(
    packet: GaussianPacket,
    particle: ParticleSpec,
    field: FieldRegion,
    k,
    allow_evanescent: bool = False,
):
    """|g(k)|^2 * 1/4 |a e^{i phi1} + b e^{i phi2}|^2, the +x projected spectral density."""
    k = np.asarray(k, dtype=float)
    t_up, t_down = _transmissions(particle, field, k, allow_evanescent)
    density = _spectral_weight(packet, k) * 0.25 * np.abs(t_up + t_down) ** 2
    return float(density) if density.ndim == 0 else density


def spin_x_density_standard(packet: GaussianPacket, particle: ParticleSpec, field: FieldRegion, k):
    """|g(k)|^2 * cos^2(phi(k)/2) with the textbook phase of each component."""
    k = np.asarray(k, dtype=float)
    density = _spectral_weight(packet, k) * np.cos(0.5 * _standard_phase_of_k(particle, field, k)) ** 2
    return float(density) if density.ndim == 0 else density


def integrate_density(grid: KGrid, density) -> QuadratureResult:
    """Composite Simpson integral with a Richardson error estimate.

    The estimate compares against the same rule on every second point:
    |S_h - S_2h| / 15.
    """
    density = np.asarray(density, dtype=float)
    if density.shape != (grid.n_points,):
        raise DomainError("density", f"expected {grid.n_points} samples, got shape {density.shape}")
    k = grid.points
    fine = float(simpson(density, x=k))
    coarse = float(simpson(density[::2], x=k[::2]))
    return QuadratureResult(value=fine, error_estimate=abs(fine - coarse) / 15.0)


def l2_distance(k, first, second) -> float:
    """sqrt(integral (first - second)^2 dk) on the sample grid."""
    diff = np.asarray(first, dtype=float) - np.asarray(second, dtype=float)
    return float(math.sqrt(max(simpson(diff * diff, x=np.asarray(k, dtype=float)), 0.0)))


def max_gap(first, second) -> float:
    return float(np.max(np.abs(np.asarray(first) - np.asarray(second))))


def propagating_cutoff(particle: ParticleSpec, field: FieldRegion) -> float:
    """Smallest free wavenumber whose barrier channel still propagates."""
    return math.sqrt(zeeman_wavenumber_sq(particle, field.B))


def truncate_to_propagating(grid: KGrid, particle: ParticleSpec, field: FieldRegion) -> KGrid:
    """Drop grid points at or below the barrier cutoff, keeping spacing and an odd count."""
    cutoff = propagating_cutoff(particle, field)
    k = grid.points
    keep = np.flatnonzero(k > cutoff)
    if keep.size < 3:
        raise DomainError("k_grid", f"fewer than 3 propagating points above cutoff k={cutoff:.6e}")
    first = int(keep[0])
    if (grid.n_points - first) % 2 == 0:
        first += 1
    if first == 0:
        return grid
    logger.warning(
        "dropping %d evanescent grid points below k=%.6e (%.3g%% of spectral range)",
        first, cutoff, 100.0 * first / (grid.n_points - 1),
    )
    return KGrid(k_min=float(k[first]), k_max=grid.k_max, n_points=grid.n_points - first)


def _chunked(fn, k: np.ndarray, workers: int) -> np.ndarray:
    if workers <= 1 or k.size < 2 * workers:
        return fn(k)
    chunks = np.array_split(k, workers)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        parts = list(executor.map(fn, chunks))
    return np.concatenate(parts)


def build_density_table(
    packet: GaussianPacket,
    particle: ParticleSpec,
    field: FieldRegion,
    grid: KGrid | None = None,
    allow_evanescent: bool = False,
    truncate_evanescent: bool = False,
    workers: int = 1,
) -> SpinDensityTable:
    """Evaluate every per-k quantity of the +x spin distribution on a grid."""
    grid = grid or default_grid(packet)
    if truncate_evanescent and not allow_evanescent:
        grid = truncate_to_propagating(grid, particle, field)
    k = grid.points
    logger.debug("density table on %d points in [%.6e, %.6e]", grid.n_points, grid.k_min, grid.k_max)

    def evaluate(chunk: np.ndarray) -> np.ndarray:
        t_up, t_down = _transmissions(particle, field, chunk, allow_evanescent)
        return np.stack([t_up, t_down])

    t_up, t_down = _chunked(lambda chunk: evaluate(chunk).T, k, workers).T
    spectral = _spectral_weight(packet, k)
    p_standard = np.cos(0.5 * _standard_phase_of_k(particle, field, k)) ** 2
    p_raw = 0.25 * np.abs(t_up + t_down) ** 2
    weight = 0.5 * (np.abs(t_up) ** 2 + np.abs(t_down) ** 2)
    return SpinDensityTable(
        grid=grid,
        k=k,
        spectral=spectral,
        p_standard=p_standard,
        p_modified_raw=p_raw,
        p_modified_normalized=p_raw / weight,
        density_standard=spectral * p_standard,
        density_modified=spectral * p_raw,
    )
