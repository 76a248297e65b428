"""Single-point scans and parameter sweeps producing flat output records."""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, fields

from larmor.config import RunConfig, SweepSpec
from larmor.errors import InvariantViolation, LarmorError
from larmor.precession import (
    CALIBRATED_WIDTH,
    AnalyzerSetting,
    TransmittedSpinor,
    detection_probability_modified,
    detection_probability_standard,
    phase_departure,
    standard_phase,
)
from larmor.scattering import ChannelKind, FieldRegion, scatter_channel
from larmor.units import Beam, ParticleSpec, channel_wavenumbers

logger = logging.getLogger(__name__)

UNITARITY_TOLERANCE = 1e-12

_SWEEP_FIELDS = {
    "B": "B_T",
    "v": "v_mps",
    "a": "width_m",
    "theta": "theta_rad",
}


@dataclass(frozen=True)
class ScanRecord:
    """One output row. Column order is the serialization order.

    An evanescent barrier channel reports k1 as -kappa. dphi is phi1 - phi2 - phi_std,
    wrapped.
    """
    param: str
    v_mps: float
    E_J: float
    B_T: float
    a_m: float
    theta_rad: float
    k: float
    k1: float
    k2: float
    t2_up: float
    t2_down: float
    r2_up: float
    r2_down: float
    amp_a: float
    amp_b: float
    phi1: float
    phi2: float
    phi_std: float
    p_std: float
    p_mod_raw: float
    p_mod_norm: float
    mu_B_over_E: float
    dphi: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def values(self) -> list:
        return [getattr(self, name) for name in self.columns()]


class SweepFailure(LarmorError):
    """A sweep row failed; carries the rows completed before it, in sweep order."""

    def __init__(self, index: int, value: float, cause: LarmorError, partial: list[ScanRecord]):
        self.index = index
        self.value = value
        self.cause = cause
        self.partial = partial
        self.exit_code = cause.exit_code
        super().__init__(f"row {index} ({value!r}) failed: {cause}")


def _reported_k(k_chan: float | complex) -> float:
    if isinstance(k_chan, complex):
        return -k_chan.imag if k_chan.imag != 0 else k_chan.real
    return float(k_chan)


def check_unitarity(kind: ChannelKind, transmittance: float, reflectance: float) -> None:
    """Raises InvariantViolation if |t|^2 + |r|^2 departs from 1."""
    total = transmittance + reflectance
    if abs(total - 1.0) > UNITARITY_TOLERANCE:
        raise InvariantViolation(f"{kind.value} channel: |t|^2 + |r|^2 = {total!r}")


def scan_point(
    particle: ParticleSpec,
    field: FieldRegion,
    beam: Beam,
    theta: float,
    allow_evanescent: bool = False,
    param: str = "scan",
) -> ScanRecord:
    """Evaluate both treatments at one (B, a, beam, theta) point.

    Raises:
        DomainError: invalid inputs
        EvanescentChannelError: E <= mu*B without allow_evanescent
        InvariantViolation: a channel violates flux conservation
    """
    k, k_barrier, k_well = channel_wavenumbers(beam, particle, field.B, allow_evanescent)
    well = scatter_channel(beam, particle, field, ChannelKind.WELL, allow_evanescent)
    barrier = scatter_channel(beam, particle, field, ChannelKind.BARRIER, allow_evanescent)
    for channel in (well, barrier):
        check_unitarity(channel.kind, channel.transmittance, channel.reflectance)

    spinor = TransmittedSpinor.from_channels(well, barrier)
    standard = standard_phase(particle, field, beam)
    theta = AnalyzerSetting(theta).theta
    energy = beam.energy
    return ScanRecord(
        param=param,
        v_mps=beam.velocity,
        E_J=energy,
        B_T=field.B,
        a_m=field.width_a,
        theta_rad=theta,
        k=k,
        k1=_reported_k(k_barrier),
        k2=float(k_well),
        t2_up=well.transmittance,
        t2_down=barrier.transmittance,
        r2_up=well.reflectance,
        r2_down=barrier.reflectance,
        amp_a=spinor.amp_up,
        amp_b=spinor.amp_down,
        phi1=spinor.phase_up,
        phi2=spinor.phase_down,
        phi_std=standard.phi,
        p_std=detection_probability_standard(standard.phi, theta),
        p_mod_raw=detection_probability_modified(spinor, theta),
        p_mod_norm=detection_probability_modified(spinor, theta, normalized=True),
        mu_B_over_E=particle.mu * field.B / energy,
        dphi=phase_departure(spinor, standard),
    )


def field_for(run: RunConfig) -> FieldRegion:
    return FieldRegion(B=run.B_T, width_a=run.width_m if run.width_m is not None else CALIBRATED_WIDTH)


def scan_config(run: RunConfig, particle: ParticleSpec, param: str = "scan") -> ScanRecord:
    """scan_point driven by a validated RunConfig."""
    return scan_point(
        particle,
        field_for(run),
        run.beam(particle),
        run.theta_rad,
        allow_evanescent=run.allow_evanescent,
        param=param,
    )


def point_config(run: RunConfig, parameter: str, value: float) -> RunConfig:
    """The RunConfig of one sweep row: `parameter` set to `value`, the rest unchanged."""
    update = {_SWEEP_FIELDS[parameter]: value}
    if parameter == "v":
        update |= {"E_eV": None, "k_per_m": None}
    return RunConfig.model_validate(run.model_dump() | update)


def run_sweep(
    sweep: SweepSpec,
    run: RunConfig,
    particle: ParticleSpec,
    workers: int = 1,
) -> list[ScanRecord]:
    """One scan record per swept value, returned in sweep order.

    Rows may be evaluated concurrently. The first failing row (by index)
    aborts the sweep with SweepFailure carrying the rows before it.
    """
    configs = [point_config(run, sweep.parameter, value) for value in sweep.values]
    results: dict[int, ScanRecord | LarmorError] = {}

    def evaluate(index: int):
        try:
            return index, scan_config(configs[index], particle, param=sweep.parameter)
        except LarmorError as e:
            return index, e

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        futures = {executor.submit(evaluate, i): i for i in range(len(configs))}
        for future in as_completed(futures):
            index, outcome = future.result()
            results[index] = outcome

    records: list[ScanRecord] = []
    for index, value in enumerate(sweep.values):
        outcome = results[index]
        if isinstance(outcome, LarmorError):
            logger.debug("sweep aborted at row %d after %d rows", index, len(records))
            raise SweepFailure(index, value, outcome, records)
        records.append(outcome)
    return records
