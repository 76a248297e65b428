"""Plane-wave scattering on a rectangular well or barrier of width a.

Amplitudes are those of a unit incident wave e^{ikx}: the transmitted wave
beyond the rotator is t e^{ikx} and the reflected one r e^{-ikx}. Evanescent
barrier channels enter as k_chan = i*kappa; the same expressions then hold
with hyperbolic functions implied.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from larmor.errors import DomainError
from larmor.phases import phasor
from larmor.units import Beam, ParticleSpec, channel_wavenumbers

# Below this mismatch |k - k_chan|*a the expanded closed-form denominator is
# replaced by the modulus of the factored one.
FACTORED_DENOMINATOR_MISMATCH = 1e-4


@dataclass(frozen=True)
class FieldRegion:
    """Uniform field B filling 0 <= x <= width_a."""
    B: float
    width_a: float

    def __post_init__(self):
        if not math.isfinite(self.B) or self.B < 0:
            raise DomainError("B", f"must be a finite non-negative field, got {self.B!r}")
        if not math.isfinite(self.width_a) or self.width_a <= 0:
            raise DomainError("width", f"must be a positive finite length, got {self.width_a!r}")


class ChannelKind(enum.Enum):
    """Which spin component is scattered; spin-down sees +mu*B, spin-up -mu*B."""
    BARRIER = "barrier"
    WELL = "well"


@dataclass(frozen=True)
class ChannelAmplitudes:
    kind: ChannelKind
    t: complex
    r: complex
    channel_k: float | complex

    @property
    def evanescent(self) -> bool:
        return isinstance(self.channel_k, complex) and self.channel_k.imag != 0

    @property
    def transmittance(self) -> float:
        return abs(self.t) ** 2

    @property
    def reflectance(self) -> float:
        return abs(self.r) ** 2


def _check_inputs(k, k_chan, a):
    k = np.asarray(k, dtype=float)
    a = np.asarray(a, dtype=float)
    k_chan = np.asarray(k_chan)
    if not (np.all(np.isfinite(k)) and np.all(np.isfinite(k_chan)) and np.all(np.isfinite(a))):
        raise DomainError("k", "wavenumbers and width must be finite")
    if np.any(k <= 0):
        raise DomainError("k", "must be positive")
    if np.any(a <= 0):
        raise DomainError("width", "must be positive")
    if not np.iscomplexobj(k_chan) and np.any(k_chan < 0):
        raise DomainError("k_chan", "real channel wavenumbers must be non-negative")
    return k, k_chan, a


def _scalar(value):
    return complex(value) if np.ndim(value) == 0 else value


def _denominator(k, k_chan, a):
    den = (k + k_chan) ** 2 - (k - k_chan) ** 2 * phasor(2.0 * k_chan, a)
    assert np.all(den != 0), "vanishing denominator for a propagating channel"
    return den


def transmission_amplitude(k, k_chan, a):
    """t = 4 k kc e^{-ika} e^{i kc a} / [(k+kc)^2 - (k-kc)^2 e^{2 i kc a}].

    The two exit phasors are combined into e^{i(kc-k)a}; kc - k is exact for
    nearby floats, which keeps the precession phase clean at high energy.
    At the barrier threshold (kc = 0) the finite limit e^{-ika}/(1 - ika/2)
    is returned. A matched channel (kc = k) transmits with t = 1 exactly.
    """
    k, k_chan, a = _check_inputs(k, k_chan, a)
    threshold = k_chan == 0
    safe_k_chan = np.where(threshold, 1.0, k_chan)
    t = 4.0 * k * safe_k_chan * phasor(safe_k_chan - k, a) / _denominator(k, safe_k_chan, a)
    if np.any(threshold):
        t = np.where(threshold, phasor(-k, a) / (1.0 - 0.5j * k * a), t)
    t = np.where(k_chan == k, 1.0 + 0j, t)
    return _scalar(t)


def reflection_amplitude(k, k_chan, a):
    """r = (k^2 - kc^2)(1 - e^{2 i kc a}) / [(k+kc)^2 - (k-kc)^2 e^{2 i kc a}]."""
    k, k_chan, a = _check_inputs(k, k_chan, a)
    threshold = k_chan == 0
    safe_k_chan = np.where(threshold, 1.0, k_chan)
    numerator = (k - safe_k_chan) * (k + safe_k_chan) * (1.0 - phasor(2.0 * safe_k_chan, a))
    r = numerator / _denominator(k, safe_k_chan, a)
    if np.any(threshold):
        r = np.where(threshold, -0.5j * k * a / (1.0 - 0.5j * k * a), r)
    r = np.where(k_chan == k, 0j, r)
    return _scalar(r)


def transmission_re_im_closed_form(k, k_chan, a):
    """Real and imaginary parts of t from the explicit trigonometric expressions.

    Re = [8 k kc (k^2+kc^2) sin(ka) sin(kc a) + 16 k^2 kc^2 cos(ka) cos(kc a)] / D
    Im = [8 k kc (k^2+kc^2) cos(ka) sin(kc a) - 16 k^2 kc^2 sin(ka) cos(kc a)] / D
    D  = (k+kc)^4 + (k-kc)^4 - 2 (k+kc)^2 (k-kc)^2 cos(2 kc a)

    Only defined for real, propagating channels.
    """
    k, k_chan, a = _check_inputs(k, k_chan, a)
    if np.iscomplexobj(k_chan) or np.any(k_chan <= 0):
        raise DomainError("k_chan", "closed form needs a real propagating channel")

    free = phasor(k, a)
    inside = phasor(k_chan, a)
    sin_ka, cos_ka = free.imag, free.real
    sin_kca, cos_kca = inside.imag, inside.real

    plus = (k + k_chan) ** 2
    minus = (k - k_chan) ** 2
    round_trip = phasor(2.0 * k_chan, a)
    expanded = plus**2 + minus**2 - 2.0 * plus * minus * round_trip.real
    factored = np.abs(plus - minus * round_trip) ** 2
    D = np.where(np.abs(k - k_chan) * a < FACTORED_DENOMINATOR_MISMATCH, factored, expanded)

    cross = 8.0 * k * k_chan * (k**2 + k_chan**2)
    direct = 16.0 * k**2 * k_chan**2
    re = (cross * sin_ka * sin_kca + direct * cos_ka * cos_kca) / D
    im = (cross * cos_ka * sin_kca - direct * sin_ka * cos_kca) / D
    if np.ndim(re) == 0:
        return float(re), float(im)
    return re, im


def scatter_channel(
    beam: Beam,
    particle: ParticleSpec,
    field: FieldRegion,
    which: ChannelKind,
    allow_evanescent: bool = False,
) -> ChannelAmplitudes:
    """Solve one spin channel of the rotator for the given beam."""
    k, k_barrier, k_well = channel_wavenumbers(beam, particle, field.B, allow_evanescent)
    k_chan = k_well if which is ChannelKind.WELL else k_barrier
    return ChannelAmplitudes(
        kind=which,
        t=transmission_amplitude(k, k_chan, field.width_a),
        r=reflection_amplitude(k, k_chan, field.width_a),
        channel_k=k_chan,
    )
