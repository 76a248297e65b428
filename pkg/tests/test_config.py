import os
from pathlib import Path
from unittest.mock import patch

import pytest
from pydantic import ValidationError

from larmor.config import (
    CONFIG_ENV_VAR,
    ConfigFile,
    RunConfig,
    SweepSpec,
    clear_config_cache,
    expand_env_vars,
    load_config,
    resolve_config_path,
)
from larmor.errors import DomainError
from larmor.units import NEUTRON

FIXTURES = Path(__file__).parent / "fixtures" / "larmor"


class TestExpandEnvVars:
    def test_no_env_vars(self):
        """Literal string returned unchanged."""
        assert expand_env_vars("B_T: 2.0") == "B_T: 2.0"

    def test_single_env_var(self):
        """Single ${VAR} is expanded."""
        with patch.dict(os.environ, {"LARMOR_FIELD": "0.5"}):
            assert expand_env_vars("B_T: ${LARMOR_FIELD}") == "B_T: 0.5"

    def test_multiple_env_vars(self):
        """Every reference is expanded."""
        with patch.dict(os.environ, {"A": "1", "B": "2"}):
            assert expand_env_vars("${A}:${B}") == "1:2"

    def test_missing_env_var_returns_none(self):
        """Missing env var returns None."""
        with patch.dict(os.environ, {}, clear=True):
            assert expand_env_vars("${MISSING_VAR}") is None

    def test_none_input(self):
        """None input returns None."""
        assert expand_env_vars(None) is None


class TestResolveConfigPath:
    def test_flag_wins(self):
        """--config takes precedence over the environment."""
        with patch.dict(os.environ, {CONFIG_ENV_VAR: "/from/env.yml"}):
            assert resolve_config_path("flag.yml") == Path("flag.yml")

    def test_env_var(self):
        """$LARMOR_CONFIG is used when no flag is given."""
        with patch.dict(os.environ, {CONFIG_ENV_VAR: "/from/env.yml"}):
            assert resolve_config_path(None) == Path("/from/env.yml")

    def test_nothing_configured(self):
        """No flag and no env var means no config file."""
        with patch.dict(os.environ, {}, clear=True):
            assert resolve_config_path(None) is None


class TestLoadConfig:
    def setup_method(self):
        """Clear cache before each test."""
        clear_config_cache()

    def test_none_gives_defaults(self):
        """No path yields the built-in neutron."""
        config = load_config(None)
        assert config == ConfigFile()
        assert config.particle_spec() == NEUTRON

    def test_loads_yaml_fixture(self):
        """YAML files are parsed into the config model."""
        config = load_config(FIXTURES / "config.yml")
        assert config.run.B_T == 0.5
        assert config.run.theta_rad == 0.25
        assert config.run.format == "json"
        assert config.particle_spec().mass == pytest.approx(1.67492750056e-27)

    def test_loads_json_fixture(self):
        """JSON files are parsed into the config model."""
        config = load_config(FIXTURES / "config.json")
        spec = config.particle_spec()
        assert spec.label == "heavy-neutron"
        assert spec.mass == pytest.approx(2 * 1.67492750056e-27)
        assert spec.magnetic_moment == NEUTRON.magnetic_moment
        assert config.run.allow_evanescent is True

    def test_empty_file_gives_defaults(self, tmp_path):
        """Empty YAML file is the default config."""
        config_file = tmp_path / "larmor.yml"
        config_file.write_text("")
        assert load_config(config_file) == ConfigFile()

    def test_config_is_cached(self, tmp_path):
        """Config is loaded once and cached."""
        config_file = tmp_path / "larmor.yml"
        config_file.write_text("run:\n  B_T: 1.0\n")
        first = load_config(config_file)
        config_file.write_text("run:\n  B_T: 3.0\n")
        second = load_config(config_file)

        assert first.run.B_T == 1.0
        assert second.run.B_T == 1.0  # Still cached

        clear_config_cache()
        assert load_config(config_file).run.B_T == 3.0

    def test_env_var_expansion(self, tmp_path, monkeypatch):
        """${VAR} references are expanded before parsing."""
        config_file = tmp_path / "larmor.yml"
        config_file.write_text("run:\n  B_T: ${LARMOR_FIELD}\n")
        monkeypatch.setenv("LARMOR_FIELD", "0.15")
        assert load_config(config_file).run.B_T == 0.15

    def test_undefined_env_var(self, tmp_path, monkeypatch):
        """An undefined reference is a config error."""
        config_file = tmp_path / "larmor.yml"
        config_file.write_text("run:\n  B_T: ${MISSING_VAR}\n")
        monkeypatch.delenv("MISSING_VAR", raising=False)
        with pytest.raises(DomainError, match="^config:"):
            load_config(config_file)

    def test_missing_file(self, tmp_path):
        """A configured path that does not exist is an error."""
        with pytest.raises(DomainError, match="not found"):
            load_config(tmp_path / "missing.yml")

    @pytest.mark.parametrize("body", [
        "run:\n  B_T: -1\n",
        "run:\n  color: blue\n",
        "particle:\n  mass_kg: 0\n",
        "particle:\n  moment_J_per_T: 0\n",
        "hbar_J_s: -1\n",
    ])
    def test_invalid_content(self, tmp_path, body):
        """Unknown keys and out-of-domain values are rejected."""
        config_file = tmp_path / "larmor.yml"
        config_file.write_text(body)
        with pytest.raises(DomainError, match="invalid config"):
            load_config(config_file)


class TestRunConfig:
    def test_defaults(self):
        """B = 2 T, calibrated width, CSV output."""
        run = RunConfig()
        assert run.B_T == 2.0
        assert run.width_is_calibrated
        assert run.format == "csv"
        assert run.workers == 1

    def test_beam_from_each_quantity(self):
        """v, E and k flags select the authoritative beam quantity."""
        assert RunConfig(v_mps=10.0).beam(NEUTRON).quantity == "velocity"
        assert RunConfig(E_eV=1e-3).beam(NEUTRON).quantity == "energy"
        assert RunConfig(k_per_m=1e9).beam(NEUTRON).quantity == "wavenumber"

    def test_energy_is_converted_from_ev(self):
        """E_eV is converted to joules for the beam."""
        beam = RunConfig(E_eV=1.0).beam(NEUTRON)
        assert beam.energy == pytest.approx(1.602176634e-19)

    def test_missing_beam(self):
        """A scan without v, E or k is a domain error."""
        with pytest.raises(DomainError, match="^beam:"):
            RunConfig().beam(NEUTRON)

    def test_two_beam_quantities(self):
        """v and E together are rejected."""
        with pytest.raises(ValidationError):
            RunConfig(v_mps=10.0, E_eV=1e-3)

    @pytest.mark.parametrize("kwargs", [
        {"B_T": -0.1},
        {"width_m": 0.0},
        {"v_mps": -10.0},
        {"workers": 0},
        {"format": "xml"},
        {"colour": "red"},
    ])
    def test_validation(self, kwargs):
        """Out-of-domain settings fail validation."""
        with pytest.raises(ValidationError):
            RunConfig(**kwargs)


class TestSweepSpec:
    def test_values_text(self):
        """Comma-separated values keep their order."""
        sweep = SweepSpec.from_values_text("v", "2000,200,50,10")
        assert sweep.parameter == "v"
        assert sweep.values == [2000.0, 200.0, 50.0, 10.0]

    def test_values_text_rejects_garbage(self):
        """Non-numeric entries are a domain error."""
        with pytest.raises(DomainError, match="^values:"):
            SweepSpec.from_values_text("B", "1,two,3")

    def test_linear_range(self):
        """lo:hi:n gives n evenly spaced values including both ends."""
        assert SweepSpec.from_range_text("B", "0:2:5").values == pytest.approx([0.0, 0.5, 1.0, 1.5, 2.0])

    def test_log_range(self):
        """lo:hi:n:log gives a geometric progression."""
        assert SweepSpec.from_range_text("v", "10:1000:3:log").values == pytest.approx([10.0, 100.0, 1000.0])

    def test_single_point_range(self):
        """n = 1 is the lower bound alone."""
        assert SweepSpec.from_range_text("B", "0.5:0.5:1").values == [0.5]

    @pytest.mark.parametrize("text", ["1:2", "1:2:0", "1:1:3", "0:10:3:log", "1:2:3:cubic", "a:b:c"])
    def test_invalid_ranges(self, text):
        """Malformed or degenerate ranges raise DomainError."""
        with pytest.raises(DomainError, match="^range:"):
            SweepSpec.from_range_text("v", text)

    def test_unknown_parameter(self):
        """Only B, v, a and theta can be swept."""
        with pytest.raises(ValidationError):
            SweepSpec(parameter="mass", values=[1.0])

    def test_values_must_be_finite(self):
        """NaN and infinities are rejected."""
        with pytest.raises(ValidationError):
            SweepSpec(parameter="B", values=[1.0, float("nan")])

    def test_empty_values(self):
        """At least one value is required."""
        with pytest.raises(ValidationError):
            SweepSpec(parameter="B", values=[])
