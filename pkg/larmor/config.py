"""Configuration: optional JSON/YAML config file plus validated run settings."""

import math
import os
import re
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_yaml import parse_yaml_raw_as

from larmor.errors import DomainError
from larmor.units import NEUTRON, Beam, ParticleSpec, beam_from_energy, beam_from_velocity, beam_from_wavenumber, ev_to_joule

CONFIG_ENV_VAR = "LARMOR_CONFIG"

_config_cache: dict[Path, "ConfigFile"] = {}


class ParticleConfig(BaseModel):
    """Overrides for the probe particle (neutron by default)."""
    model_config = ConfigDict(extra="forbid")

    label: str | None = None
    mass_kg: float | None = Field(default=None, gt=0)
    moment_J_per_T: float | None = None

    @field_validator("moment_J_per_T")
    @classmethod
    def _nonzero_moment(cls, value: float | None) -> float | None:
        if value is not None and (value == 0 or not math.isfinite(value)):
            raise ValueError("magnetic moment must be nonzero and finite")
        return value


class RunDefaults(BaseModel):
    """Run settings a config file may preset; CLI flags override them."""
    model_config = ConfigDict(extra="forbid")

    B_T: float | None = Field(default=None, ge=0)
    width_m: float | None = Field(default=None, gt=0)
    theta_rad: float | None = None
    sigma_rel: float | None = Field(default=None, gt=0)
    format: Literal["csv", "json"] | None = None
    normalized: bool | None = None
    allow_evanescent: bool | None = None


class ConfigFile(BaseModel):
    """Root of a larmor config file."""
    model_config = ConfigDict(extra="forbid")

    particle: ParticleConfig = ParticleConfig()
    hbar_J_s: float | None = Field(default=None, gt=0)
    run: RunDefaults = RunDefaults()

    def particle_spec(self) -> ParticleSpec:
        return NEUTRON.with_overrides(
            mass=self.particle.mass_kg,
            magnetic_moment=self.particle.moment_J_per_T,
            hbar=self.hbar_J_s,
            label=self.particle.label,
        )


def clear_config_cache() -> None:
    """Clear the config cache. Useful for testing."""
    _config_cache.clear()


def expand_env_vars(value: str | None) -> str | None:
    """Expand ${VAR} references in a string value.

    Returns None if the value is None or any referenced env var is undefined.
    """
    if value is None:
        return None

    pattern = r'\$\{([^}]+)\}'
    matches = list(re.finditer(pattern, value))
    if not matches:
        return value

    result = value
    for match in reversed(matches):  # Reverse to preserve positions during replacement
        env_value = os.environ.get(match.group(1))
        if env_value is None:
            return None
        result = result[:match.start()] + env_value + result[match.end():]

    return result


def resolve_config_path(flag_value: str | None = None) -> Path | None:
    """--config flag first, then $LARMOR_CONFIG, else no config file."""
    raw = flag_value or os.environ.get(CONFIG_ENV_VAR)
    if not raw:
        return None
    return Path(raw)


def load_config(path: Path | None) -> ConfigFile:
    """Load and validate a JSON or YAML config file.

    A missing path (None) yields the built-in defaults. Results are cached
    per resolved path for the duration of the process.
    """
    if path is None:
        return ConfigFile()

    resolved = path.resolve()
    if resolved in _config_cache:
        return _config_cache[resolved]

    if not resolved.exists():
        raise DomainError("config", f"config file not found: {path}")

    text = expand_env_vars(resolved.read_text())
    if text is None:
        raise DomainError("config", f"{path} references an undefined environment variable")

    try:
        if resolved.suffix.lower() == ".json":
            config = ConfigFile.model_validate_json(text)
        else:
            config = parse_yaml_raw_as(ConfigFile, text) if text.strip() else ConfigFile()
    except ValidationError as e:
        raise DomainError("config", f"invalid config {path}: {e}") from e

    _config_cache[resolved] = config
    return config


class RunConfig(BaseModel):
    """Validated inputs of a single scan, or the fixed part of a sweep."""
    model_config = ConfigDict(extra="forbid")

    B_T: float = Field(default=2.0, ge=0)
    width_m: float | None = Field(default=None, gt=0)
    v_mps: float | None = Field(default=None, gt=0)
    E_eV: float | None = Field(default=None, gt=0)
    k_per_m: float | None = Field(default=None, gt=0)
    theta_rad: float = 0.0
    sigma_rel: float = Field(default=0.05, gt=0)
    x0_m: float = 0.0
    format: Literal["csv", "json"] = "csv"
    out: Path | None = None
    normalized: bool = False
    allow_evanescent: bool = False
    truncate_evanescent: bool = False
    workers: int = Field(default=1, ge=1)
    gnuplot: bool = False

    @model_validator(mode="after")
    def _at_most_one_beam_quantity(self) -> "RunConfig":
        given = [name for name in ("v_mps", "E_eV", "k_per_m") if getattr(self, name) is not None]
        if len(given) > 1:
            raise ValueError(f"give exactly one of --v, --E-eV, --k (got {', '.join(given)})")
        return self

    @property
    def width_is_calibrated(self) -> bool:
        return self.width_m is None

    def beam(self, particle: ParticleSpec) -> Beam:
        if self.v_mps is not None:
            return beam_from_velocity(particle, self.v_mps)
        if self.E_eV is not None:
            return beam_from_energy(particle, ev_to_joule(self.E_eV))
        if self.k_per_m is not None:
            return beam_from_wavenumber(particle, self.k_per_m)
        raise DomainError("beam", "give exactly one of --v, --E-eV, --k")


SweepParameter = Literal["B", "v", "a", "theta"]


class SweepSpec(BaseModel):
    """One swept parameter with explicit values; everything else stays fixed."""
    model_config = ConfigDict(extra="forbid")

    parameter: SweepParameter
    values: list[float] = Field(min_length=1)

    @field_validator("values")
    @classmethod
    def _finite(cls, values: list[float]) -> list[float]:
        if not all(math.isfinite(value) for value in values):
            raise ValueError("sweep values must be finite")
        return values

    @classmethod
    def from_values_text(cls, parameter: str, text: str) -> "SweepSpec":
        """Parse a comma-separated list such as '2000,200,50,10'."""
        try:
            values = [float(item) for item in text.split(",") if item.strip()]
        except ValueError as e:
            raise DomainError("values", f"not a comma-separated number list: {text!r}") from e
        return cls(parameter=parameter, values=values)

    @classmethod
    def from_range_text(cls, parameter: str, text: str) -> "SweepSpec":
        """Parse 'lo:hi:n' (linear) or 'lo:hi:n:log' (logarithmic)."""
        parts = text.split(":")
        if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] not in ("log", "lin")):
            raise DomainError("range", f"expected lo:hi:n[:log], got {text!r}")
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as e:
            raise DomainError("range", f"expected lo:hi:n[:log], got {text!r}") from e
        if n < 1:
            raise DomainError("range", "needs at least one point")
        if n > 1 and lo == hi:
            raise DomainError("range", "bounds must differ so the range is strictly monotone")
        logarithmic = len(parts) == 4 and parts[3] == "log"
        if n == 1:
            values = [lo]
        elif logarithmic:
            if lo <= 0 or hi <= 0:
                raise DomainError("range", "log ranges need positive bounds")
            values = [lo * (hi / lo) ** (i / (n - 1)) for i in range(n)]
        else:
            values = [lo + (hi - lo) * i / (n - 1) for i in range(n)]
        return cls(parameter=parameter, values=values)
