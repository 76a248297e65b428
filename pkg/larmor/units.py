"""Physical constants, particle specifications and beam kinematics.

All values are SI. Electron-volts only appear at I/O boundaries through
`energy_ev` / `ev_to_joule`.
"""

import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np
from scipy import constants

from larmor.errors import DomainError, EvanescentChannelError

# CODATA 2018
NEUTRON_MASS_KG = 1.67492749804e-27
NEUTRON_MOMENT_J_PER_T = -9.6623651e-27
HBAR_J_S = 1.054571817e-34

BeamQuantity = Literal["velocity", "energy", "wavenumber"]


def _require_positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise DomainError(name, f"must be a positive finite number, got {value!r}")
    return value


@dataclass(frozen=True)
class ParticleSpec:
    """Probe particle: mass, magnetic moment and the hbar used for kinematics."""
    label: str
    mass: float
    magnetic_moment: float
    hbar: float = HBAR_J_S

    def __post_init__(self):
        _require_positive("mass", self.mass)
        _require_positive("hbar", self.hbar)
        if not math.isfinite(self.magnetic_moment) or self.magnetic_moment == 0:
            raise DomainError("magnetic_moment", f"must be nonzero and finite, got {self.magnetic_moment!r}")

    @property
    def mu(self) -> float:
        """|magnetic_moment|; the spin-up channel always sees -mu*B."""
        return abs(self.magnetic_moment)

    def with_overrides(
        self,
        mass: float | None = None,
        magnetic_moment: float | None = None,
        hbar: float | None = None,
        label: str | None = None,
    ) -> "ParticleSpec":
        """Return a copy with the given constants replaced (None keeps the current value)."""
        changes = {
            "mass": mass,
            "magnetic_moment": magnetic_moment,
            "hbar": hbar,
            "label": label,
        }
        return replace(self, **{key: value for key, value in changes.items() if value is not None})


NEUTRON = ParticleSpec(label="neutron", mass=NEUTRON_MASS_KG, magnetic_moment=NEUTRON_MOMENT_J_PER_T)


def ev_to_joule(value_ev: float) -> float:
    return value_ev * constants.eV


def energy_ev(value_joule: float) -> float:
    return value_joule / constants.eV


@dataclass(frozen=True)
class Beam:
    """Incident plane wave described by exactly one authoritative quantity.

    The other two views are derived on demand from the particle's mass and hbar.
    """
    particle: ParticleSpec
    quantity: BeamQuantity
    value: float

    def __post_init__(self):
        if self.quantity not in ("velocity", "energy", "wavenumber"):
            raise DomainError("beam", f"unknown beam quantity {self.quantity!r}")
        _require_positive(self.quantity, self.value)

    @property
    def velocity(self) -> float:
        p = self.particle
        if self.quantity == "velocity":
            return self.value
        if self.quantity == "energy":
            return math.sqrt(2.0 * self.value / p.mass)
        return p.hbar * self.value / p.mass

    @property
    def energy(self) -> float:
        p = self.particle
        if self.quantity == "energy":
            return self.value
        if self.quantity == "velocity":
            return 0.5 * p.mass * self.value**2
        return (p.hbar * self.value) ** 2 / (2.0 * p.mass)

    @property
    def wavenumber(self) -> float:
        p = self.particle
        if self.quantity == "wavenumber":
            return self.value
        if self.quantity == "velocity":
            return p.mass * self.value / p.hbar
        return math.sqrt(2.0 * p.mass * self.value) / p.hbar

    def describe(self) -> dict[str, float]:
        return {
            "v_mps": self.velocity,
            "E_J": self.energy,
            "E_eV": energy_ev(self.energy),
            "k": self.wavenumber,
        }


def beam_from_velocity(particle: ParticleSpec, v: float) -> Beam:
    return Beam(particle, "velocity", _require_positive("v", v))


def beam_from_energy(particle: ParticleSpec, energy: float) -> Beam:
    return Beam(particle, "energy", _require_positive("E", energy))


def beam_from_wavenumber(particle: ParticleSpec, k: float) -> Beam:
    return Beam(particle, "wavenumber", _require_positive("k", k))


def zeeman_wavenumber_sq(particle: ParticleSpec, B: float) -> float:
    """2*m*mu*B/hbar^2, the shift of k^2 in either channel."""
    return 2.0 * particle.mass * particle.mu * B / particle.hbar**2


def channel_wavenumbers_array(
    k: np.ndarray | float,
    particle: ParticleSpec,
    B: float,
    allow_evanescent: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (k_barrier, k_well) for free-space wavenumbers k.

    Evanescent barrier points come back as i*kappa when allowed; otherwise the
    first one raises EvanescentChannelError.
    """
    k = np.asarray(k, dtype=float)
    q2 = zeeman_wavenumber_sq(particle, B)
    if q2 == 0:
        return k.copy(), k.copy()
    k_well = np.sqrt(k * k + q2)
    gap = k * k - q2
    propagating = gap > 0
    if np.all(propagating):
        return np.sqrt(gap), k_well
    if not allow_evanescent:
        first = np.flatnonzero(~propagating.ravel())[0]
        kappa = math.sqrt(-float(gap.ravel()[first]))
        raise EvanescentChannelError(kappa, k=float(k.ravel()[first]), cutoff_k=math.sqrt(q2))
    k_barrier = np.where(propagating, np.sqrt(np.abs(gap)) + 0j, 1j * np.sqrt(np.abs(gap)))
    return k_barrier, k_well


def channel_wavenumbers(
    beam: Beam,
    particle: ParticleSpec,
    B: float,
    allow_evanescent: bool = False,
) -> tuple[float, float | complex, float]:
    """Return (k, k_barrier, k_well) for a beam entering a field B.

    k_barrier = sqrt(2m(E - mu*B))/hbar and k_well = sqrt(2m(E + mu*B))/hbar,
    computed from k^2 -/+ 2*m*mu*B/hbar^2 so both shifts are identical.

    Raises:
        DomainError: B negative or non-finite, or beam built for another particle
        EvanescentChannelError: E <= mu*B without allow_evanescent
    """
    if not math.isfinite(B) or B < 0:
        raise DomainError("B", f"must be a finite non-negative field, got {B!r}")
    if beam.particle != particle:
        raise DomainError("particle", "beam was constructed for a different particle")
    k = beam.wavenumber
    if B == 0:
        return k, k, k
    k_barrier, k_well = channel_wavenumbers_array(k, particle, B, allow_evanescent)
    k_barrier = k_barrier.item()
    if isinstance(k_barrier, complex) and k_barrier.imag == 0:
        k_barrier = k_barrier.real
    return k, k_barrier, float(k_well)
