"""Textbook Larmor precession versus the spin state obtained from scattering.

The textbook treatment rotates the spin by phi = 2*omega*tau with
omega = mu*B/hbar and tau = a/v. The scattering treatment replaces the
unit-modulus spinor by (a e^{i phi1}, b e^{i phi2}) built from the
transmission amplitudes of the well (spin-up) and barrier (spin-down)
channels. Detection probabilities refer to a Stern-Gerlach analyzer whose
axis lies at angle theta from +x in the x-y plane.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from larmor.errors import DegenerateSpinorError, DomainError
from larmor.phases import phase_of, wrap_phase
from larmor.scattering import ChannelAmplitudes, ChannelKind, FieldRegion, scatter_channel
from larmor.units import Beam, ParticleSpec

logger = logging.getLogger(__name__)

# Width reproducing every published standard-formula entry with the CODATA
# neutron constants; see fit_width_to_anchors(NEUTRON, TABLE_ANCHORS).
CALIBRATED_WIDTH = 2.4697775e-05
WIDTH_PROVENANCE_NOTE = (
    "rotator width not given in the source tables; "
    "calibrated from their standard-formula column"
)

# Squared-probability slack within which width branches count as equally good.
BRANCH_TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class StandardPrecession:
    omega: float
    tau: float
    phi: float


@dataclass(frozen=True)
class TransmittedSpinor:
    """Post-selected transmitted spin state (a e^{i phi1}, b e^{i phi2})/sqrt(2)."""
    amp_up: float
    amp_down: float
    phase_up: float
    phase_down: float

    def __post_init__(self):
        for name in ("amp_up", "amp_down"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise DomainError(name, f"must be a non-negative modulus, got {value!r}")
        object.__setattr__(self, "phase_up", wrap_phase(self.phase_up))
        object.__setattr__(self, "phase_down", wrap_phase(self.phase_down))

    @classmethod
    def from_channels(cls, well: ChannelAmplitudes, barrier: ChannelAmplitudes) -> "TransmittedSpinor":
        return cls(
            amp_up=abs(well.t),
            amp_down=abs(barrier.t),
            phase_up=phase_of(well.t),
            phase_down=phase_of(barrier.t),
        )

    @property
    def transmitted_weight(self) -> float:
        """(a^2 + b^2)/2, the transmitted fraction of an equal-weight spin superposition."""
        return 0.5 * (self.amp_up**2 + self.amp_down**2)

    @property
    def relative_phase(self) -> float:
        """phi1 - phi2 wrapped to (-pi, pi]."""
        return wrap_phase(self.phase_up - self.phase_down)


@dataclass(frozen=True)
class AnalyzerSetting:
    """Analyzer orientation in the x-y plane, measured from +x."""
    theta: float

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise DomainError("theta", f"must be finite, got {self.theta!r}")
        object.__setattr__(self, "theta", wrap_phase(self.theta))


@dataclass(frozen=True)
class CalibrationAnchor:
    """A published standard-formula probability at field B, velocity v and angle theta."""
    B: float
    v: float
    theta: float
    p: float


# Standard-formula column of the published comparison tables (theta = 0):
# a 2 T velocity scan followed by a 10 m/s field scan.
TABLE_ANCHORS = (
    CalibrationAnchor(B=2.0, v=2000.0, theta=0.0, p=0.40725),
    CalibrationAnchor(B=2.0, v=200.0, theta=0.0, p=0.645427),
    CalibrationAnchor(B=2.0, v=50.0, theta=0.0, p=0.690242),
    CalibrationAnchor(B=2.0, v=10.0, theta=0.0, p=0.964184),
    CalibrationAnchor(B=0.5, v=10.0, theta=0.0, p=0.997736),
    CalibrationAnchor(B=0.1, v=10.0, theta=0.0, p=0.645427),
    CalibrationAnchor(B=0.01, v=10.0, theta=0.0, p=0.407245),
    CalibrationAnchor(B=0.001, v=10.0, theta=0.0, p=0.949661),
)


@dataclass(frozen=True)
class WidthFit:
    width: float
    rms_residual: float
    branch: int


def standard_phase(particle: ParticleSpec, field: FieldRegion, beam: Beam) -> StandardPrecession:
    """phi = 2*mu*B*a/(hbar*v); not reduced modulo 2*pi."""
    omega = particle.mu * field.B / particle.hbar
    tau = field.width_a / beam.velocity
    return StandardPrecession(omega=omega, tau=tau, phi=2.0 * omega * tau)


def modified_spinor(
    particle: ParticleSpec,
    field: FieldRegion,
    beam: Beam,
    allow_evanescent: bool = False,
) -> TransmittedSpinor:
    well = scatter_channel(beam, particle, field, ChannelKind.WELL, allow_evanescent)
    barrier = scatter_channel(beam, particle, field, ChannelKind.BARRIER, allow_evanescent)
    return TransmittedSpinor.from_channels(well, barrier)


def phase_departure(spinor: TransmittedSpinor, standard: StandardPrecession) -> float:
    """Wrapped difference between the scattering relative phase phi1 - phi2 and phi.

    Tends to zero when E >> mu*B.
    """
    return wrap_phase(spinor.relative_phase - standard.phi)


def detection_probability_standard(phi, theta):
    """cos^2((theta - phi)/2) for the textbook precessed spinor."""
    p = np.cos(0.5 * (np.asarray(theta) - np.asarray(phi))) ** 2
    return float(p) if np.ndim(p) == 0 else p


def detection_probability_modified(spinor: TransmittedSpinor, theta, normalized: bool = False):
    """Probability of passing an analyzer at theta for the transmitted spinor.

    Raw mode is 1/4 (a^2 + b^2 + 2ab cos(phi1 - phi2 + theta)), so that
    p(theta) + p(theta + pi) equals the transmitted weight (a^2 + b^2)/2.
    Normalized mode divides by that weight.
    """
    a, b = spinor.amp_up, spinor.amp_down
    raw = 0.25 * (a * a + b * b + 2.0 * a * b * np.cos(spinor.phase_up - spinor.phase_down + np.asarray(theta)))
    if normalized:
        weight = spinor.transmitted_weight
        if weight == 0:
            raise DegenerateSpinorError()
        raw = raw / weight
    return float(raw) if np.ndim(raw) == 0 else raw


def high_energy_limit_phases(k, k1, k2, a) -> tuple[float, float]:
    """((k2 - k) a, (k1 - k) a): the spinor phases once k ~ k1 ~ k2."""
    return (k2 - k) * a, (k1 - k) * a


def _phase_rate(particle: ParticleSpec, B: float, v: float) -> float:
    """d(phi)/d(a) = 2 mu B / (hbar v)."""
    return 2.0 * particle.mu * B / (particle.hbar * v)


def calibrate_width(
    particle: ParticleSpec,
    B: float,
    v: float,
    theta: float,
    target_p: float,
    branch: int = 0,
) -> float:
    """Invert cos^2((theta - phi(a))/2) = target_p for the branch-th smallest a > 0.

    Raises:
        DomainError: target_p outside [0, 1], B or v not positive, negative branch
    """
    if not (0.0 <= target_p <= 1.0):
        raise DomainError("target_p", f"must lie in [0, 1], got {target_p!r}")
    if not math.isfinite(B) or B <= 0:
        raise DomainError("B", "calibration needs a positive field")
    if not math.isfinite(v) or v <= 0:
        raise DomainError("v", "calibration needs a positive velocity")
    if branch < 0:
        raise DomainError("branch", f"must be non-negative, got {branch!r}")

    # phi = theta -/+ alpha + 2*pi*n with alpha = 2 arccos(sqrt(p))
    alpha = 2.0 * math.acos(math.sqrt(target_p))
    two_pi = 2.0 * math.pi
    roots: list[float] = []
    for base in (theta + alpha, theta - alpha):
        n0 = math.floor(-base / two_pi) + 1
        for j in range(branch + 2):
            phi = base + two_pi * (n0 + j)
            if phi > 0:
                roots.append(phi)
    roots.sort()
    distinct: list[float] = []
    for phi in roots:
        if not distinct or phi - distinct[-1] > 1e-12 * two_pi:
            distinct.append(phi)

    phi = distinct[branch]
    width = phi / _phase_rate(particle, B, v)
    logger.debug("calibrate_width branch=%d phi=%.12g a=%.12g", branch, phi, width)
    return width


def _anchor_residuals(particle: ParticleSpec, anchors, width: float) -> np.ndarray:
    return np.array([
        detection_probability_standard(_phase_rate(particle, anchor.B, anchor.v) * width, anchor.theta) - anchor.p
        for anchor in anchors
    ])


def fit_width_to_anchors(
    particle: ParticleSpec,
    anchors=TABLE_ANCHORS,
    max_branches: int = 64,
) -> WidthFit:
    """Least-squares rotator width consistent with several standard-formula anchors.

    Candidate widths come from the slowest-oscillating anchor's inversion
    branches; the best candidate is polished inside a quarter period of the
    fastest anchor.
    """
    anchors = list(anchors)
    if not anchors:
        raise DomainError("anchors", "at least one anchor is required")
    rates = [_phase_rate(particle, anchor.B, anchor.v) for anchor in anchors]
    primary = anchors[int(np.argmin(rates))]

    candidates = [
        calibrate_width(particle, primary.B, primary.v, primary.theta, primary.p, branch)
        for branch in range(max_branches)
    ]
    sse = [float(np.sum(_anchor_residuals(particle, anchors, width) ** 2)) for width in candidates]
    # Anchors whose rates are integer multiples of the primary one cannot tell
    # these branches apart; ties go to the smallest width.
    branch = next(i for i, value in enumerate(sse) if value <= min(sse) + BRANCH_TIE_TOLERANCE)
    start = candidates[branch]

    half_window = 0.25 * math.pi / max(rates)
    result = least_squares(
        lambda x: _anchor_residuals(particle, anchors, float(x[0])),
        x0=[start],
        bounds=([start - half_window], [start + half_window]),
        x_scale=[half_window],
        xtol=1e-14,
        ftol=1e-14,
        gtol=1e-14,
    )
    width = float(result.x[0])
    rms = float(np.sqrt(np.mean(result.fun**2)))
    logger.debug("fit_width_to_anchors branch=%d a=%.10g rms=%.3g", branch, width, rms)
    return WidthFit(width=width, rms_residual=rms, branch=branch)
