from pathlib import Path

import pytest

from larmor.__main__ import build_cli
from larmor.cli import CLI, UsageError
from larmor.errors import EXIT_USAGE, DomainError


@pytest.fixture
def cli() -> CLI:
    return build_cli()


class TestParseArgs:
    def test_command_and_typed_options(self, cli):
        """Values are converted and stored under their dest"""
        command, opts = cli.parse_args(["scan", "--v", "2000", "--B", "2", "--out", "dist/scan.csv"])
        assert command == "scan"
        assert opts == {"v_mps": 2000.0, "B_T": 2.0, "out": Path("dist/scan.csv")}

    def test_flags_take_no_value(self, cli):
        """Boolean flags are set to True"""
        _, opts = cli.parse_args(["scan", "--normalized", "--allow-evanescent", "--v", "10"])
        assert opts == {"normalized": True, "allow_evanescent": True, "v_mps": 10.0}

    def test_dashed_names_become_underscored(self, cli):
        """--sigma-rel and --target-p map to python identifiers"""
        _, opts = cli.parse_args(["calibrate", "--target-p", "0.5", "--branch", "2", "--sigma-rel", "0.1"])
        assert opts == {"target_p": 0.5, "branch": 2, "sigma_rel": 0.1}

    def test_v0_is_velocity(self, cli):
        """--v0 feeds the same setting as --v"""
        _, opts = cli.parse_args(["packet", "--v0", "10"])
        assert opts == {"v_mps": 10.0}

    def test_sweep_alias(self, cli):
        """sweep is an alias of table"""
        command, _ = cli.parse_args(["sweep", "--param", "v", "--values", "10,20"])
        assert command == "table"

    def test_unknown_command(self, cli):
        """Unknown commands are usage errors"""
        with pytest.raises(UsageError, match="Unknown command"):
            cli.parse_args(["rotate"])

    def test_unknown_option(self, cli):
        """Unknown options are usage errors"""
        with pytest.raises(UsageError, match="--velocity"):
            cli.parse_args(["scan", "--velocity", "10"])

    def test_missing_value(self, cli):
        """An option at the end without its value is a usage error"""
        with pytest.raises(UsageError, match="requires a value"):
            cli.parse_args(["scan", "--B"])

    def test_positional_argument(self, cli):
        """Bare words after the command are rejected"""
        with pytest.raises(UsageError, match="Unexpected"):
            cli.parse_args(["scan", "10"])

    def test_unparseable_value_names_option(self, cli):
        """A non-numeric value is a domain error for that option"""
        with pytest.raises(DomainError, match="^B:"):
            cli.parse_args(["scan", "--B", "strong"])

    def test_usage_error_exit_code(self):
        """Usage errors exit with 1"""
        assert UsageError("x").exit_code == EXIT_USAGE


def test_print_usage(cli, capsys):
    """Usage lists commands, options and examples"""
    cli.print_usage()
    captured = capsys.readouterr()
    assert "Usage: larmor <command> [options]" in captured.err
    assert "selftest" in captured.out
    assert "--allow-evanescent" in captured.out
    assert "larmor scan --v 2000 --B 2" in captured.out
