"""Unified CLI for larmor."""

import logging
import math
import sys
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from larmor.cli import CLI, UsageError
from larmor.config import ConfigFile, RunConfig, SweepSpec, load_config, resolve_config_path
from larmor.errors import EXIT_DOMAIN, EXIT_INVARIANT, EXIT_OK, EXIT_USAGE, LarmorError
from larmor.merger import Merger
from larmor.precession import calibrate_width, fit_width_to_anchors
from larmor.rendering import (
    SUMMARY_COLUMNS,
    build_metadata,
    density_gnuplot,
    records_gnuplot,
    render_csv,
    render_density_table,
    render_records,
    summary_row,
)
from larmor.scan import SweepFailure, field_for, point_config, run_sweep, scan_config
from larmor.selftest import DEFAULT_SEED, UNITARITY_SAMPLES, run_selftest
from larmor.units import ParticleSpec
from larmor.wavepacket import build_density_table, packet_from_velocity

logger = logging.getLogger("larmor")

DEFAULT_PACKET_DIR = Path("dist/packet")

# Output column holding each swept parameter, for gnuplot companions.
SWEEP_COLUMNS = {"B": "B_T", "v": "v_mps", "a": "a_m", "theta": "theta_rad"}


def build_cli() -> CLI:
    cli = CLI(
        name="larmor",
        description="Exact spin rotation of spin-1/2 particles through a uniform field region.",
        aliases={"sweep": "table"},
    )
    (
        cli.add_command("scan", "Evaluate one (B, a, beam, theta) point")
        .add_command("table", "One scan row per swept value (alias: sweep)")
        .add_command("packet", "Gaussian wave-packet spin densities per swept B or v0")
        .add_command("calibrate", "Rotator width reproducing a standard-formula probability")
        .add_command("selftest", "Run the invariant suite")
    )
    (
        cli.add_option("B", "Field strength in tesla (default 2)", dest="B_T", convert=float, metavar="TESLA")
        .add_option("v", "Beam velocity in m/s", dest="v_mps", convert=float, metavar="M/S")
        .add_option("E-eV", "Beam kinetic energy in eV", dest="E_eV", convert=float, metavar="EV")
        .add_option("k", "Beam wavenumber in 1/m", dest="k_per_m", convert=float, metavar="1/M")
        .add_option("v0", "Packet peak velocity in m/s (same as --v)", dest="v_mps", convert=float, metavar="M/S")
        .add_option("width", "Rotator width in m (default: calibrated)", dest="width_m", convert=float, metavar="M")
        .add_option("theta", "Analyzer angle from +x in rad", dest="theta_rad", convert=float, metavar="RAD")
        .add_option("param", "Swept parameter: B, v, a or theta", metavar="NAME")
        .add_option("values", "Comma-separated sweep values", metavar="LIST")
        .add_option("range", "Sweep range lo:hi:n[:log]", metavar="RANGE")
        .add_option("sigma-rel", "Packet spectral width sigma_k/k0 (default 0.05)", convert=float, metavar="X")
        .add_option("x0", "Packet initial peak position in m", dest="x0_m", convert=float, metavar="M")
        .add_option("target-p", "Standard probability to calibrate against", convert=float, metavar="P")
        .add_option("branch", "Calibration root index, 0 = smallest width", convert=int, metavar="N")
        .add_option("fit-tables", "Calibrate against all published table anchors", takes_value=False)
        .add_option("normalized", "Report modified probability divided by transmitted weight", takes_value=False)
        .add_option("allow-evanescent", "Continue the barrier channel analytically below threshold", takes_value=False)
        .add_option("truncate-evanescent", "Drop evanescent packet grid points with a warning", takes_value=False)
        .add_option("format", "Output format: csv or json", metavar="FMT")
        .add_option("out", "Output file (packet: directory)", convert=Path, metavar="PATH")
        .add_option("gnuplot", "Also write a gnuplot companion script", takes_value=False)
        .add_option("workers", "Concurrent workers for sweeps and packet grids", convert=int, metavar="N")
        .add_option("seed", "Selftest random seed", convert=int, metavar="N")
        .add_option("samples", "Selftest unitarity sample count", convert=int, metavar="N")
        .add_option("config", "JSON/YAML config file (fallback: $LARMOR_CONFIG)", metavar="PATH")
        .add_option("verbose", "Debug logging on stderr", takes_value=False)
    )
    (
        cli.add_example("scan --v 2000 --B 2")
        .add_example("table --param v --values 2000,200,50,10 --B 2")
        .add_example("sweep --param B --range 0.001:0.5:20:log --v 10")
        .add_example("packet --param B --values 0.001,0.03,0.15 --v0 10 --gnuplot")
        .add_example("calibrate --B 2 --v 2000 --target-p 0.40725")
        .add_example("selftest")
    )
    return cli


def print_usage() -> None:
    """Print main usage information."""
    build_cli().print_usage()


def load_settings(opts: dict[str, Any]) -> tuple[ParticleSpec, RunConfig, ConfigFile]:
    """Layer built-in defaults, the config file and CLI flags into a RunConfig."""
    config = load_config(resolve_config_path(opts.get("config")))
    run_keys = set(RunConfig.model_fields)
    flags = {key: value for key, value in opts.items() if key in run_keys}
    run = RunConfig.model_validate(Merger.merge(config.run.model_dump(), flags))
    return config.particle_spec(), run, config


def sweep_from_opts(opts: dict[str, Any], default_param: str) -> SweepSpec | None:
    parameter = opts.get("param", default_param)
    if "values" in opts and "range" in opts:
        raise UsageError("give either --values or --range, not both")
    if "values" in opts:
        return SweepSpec.from_values_text(parameter, opts["values"])
    if "range" in opts:
        return SweepSpec.from_range_text(parameter, opts["range"])
    return None


def write_output(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    print(f"Wrote {out}", file=sys.stderr)


def cmd_scan(opts: dict[str, Any]) -> int:
    """Single point: both treatments, one record."""
    particle, run, _ = load_settings(opts)
    record = scan_config(run, particle)
    context = build_metadata("scan", run, particle)
    write_output(render_records(context, [record], run.format), run.out)
    return EXIT_OK


def cmd_table(opts: dict[str, Any]) -> int:
    """One scan record per swept value; a failing row aborts with partial output."""
    particle, run, _ = load_settings(opts)
    sweep = sweep_from_opts(opts, default_param="v")
    if sweep is None:
        raise UsageError("table needs --values or --range")

    context = build_metadata("table", run, particle, swept=sweep.parameter)
    try:
        records = run_sweep(sweep, run, particle, workers=run.workers)
    except SweepFailure as e:
        context.metadata["partial"] = f"aborted at row {e.index} ({e.value!r}): {e.cause}"
        write_output(render_records(context, e.partial, run.format), run.out)
        print(f"Error: {e}", file=sys.stderr)
        print(f"Wrote {len(e.partial)} of {len(sweep.values)} rows before the failure.", file=sys.stderr)
        return e.exit_code

    write_output(render_records(context, records, run.format), run.out)
    if run.gnuplot:
        if run.out is None:
            print("Warning: --gnuplot needs --out; no script written", file=sys.stderr)
        else:
            log_x = len(sweep.values) > 1 and all(value > 0 for value in sweep.values) and (
                max(sweep.values) / min(sweep.values) > 100
            )
            write_output(records_gnuplot(str(run.out), SWEEP_COLUMNS[sweep.parameter], log_x, run.normalized), run.out.with_suffix(".gp"))
    return EXIT_OK


def cmd_packet(opts: dict[str, Any]) -> int:
    """Per-value density tables plus a summary of integrated probabilities and distances."""
    particle, run, _ = load_settings(opts)
    sweep = sweep_from_opts(opts, default_param="B")
    if sweep is not None and sweep.parameter not in ("B", "v"):
        raise UsageError("packet sweeps over B or v only")
    if sweep is None:
        sweep = SweepSpec(parameter="B", values=[run.B_T])

    out_dir = run.out or DEFAULT_PACKET_DIR
    out_dir.mkdir(parents=True, exist_ok=True)

    summary = []
    for index, value in enumerate(sweep.values):
        point = point_config(run, sweep.parameter, value)
        v0 = point.beam(particle).velocity
        packet = packet_from_velocity(particle, v0, point.sigma_rel, point.x0_m)
        table = build_density_table(
            packet,
            particle,
            field_for(point),
            allow_evanescent=point.allow_evanescent,
            truncate_evanescent=point.truncate_evanescent,
            workers=point.workers,
        )
        context = build_metadata("packet", point, particle, {"k0": packet.k0, "delta": packet.delta})
        data_file = out_dir / f"density_{sweep.parameter}_{index:03d}.csv"
        write_output(render_density_table(context, table), data_file)
        if point.gnuplot:
            write_output(density_gnuplot(str(data_file)), data_file.with_suffix(".gp"))
        row = summary_row(sweep.parameter, value, packet, table)
        logger.info("%s=%g: L2 distance %.6e", sweep.parameter, value, row[-2])
        summary.append(row)

    context = build_metadata("packet", run, particle, swept=sweep.parameter)
    write_output(render_csv(context, SUMMARY_COLUMNS, summary), out_dir / "summary.csv")
    return EXIT_OK


def cmd_calibrate(opts: dict[str, Any]) -> int:
    """Print the rotator width (and implied phase) matching a standard probability."""
    particle, run, _ = load_settings(opts)
    if opts.get("fit_tables"):
        fit = fit_width_to_anchors(particle)
        print(f"a = {fit.width:.11e} m")
        print(f"rms residual = {fit.rms_residual:.3e} (branch {fit.branch})")
        return EXIT_OK

    if "target_p" not in opts:
        raise UsageError("calibrate needs --target-p (or --fit-tables)")
    v = run.beam(particle).velocity
    width = calibrate_width(particle, run.B_T, v, run.theta_rad, opts["target_p"], opts.get("branch", 0))
    phi = 2.0 * particle.mu * run.B_T * width / (particle.hbar * v)
    print(f"a = {width:.11e} m")
    print(f"phi = {phi:.11e} rad ({phi % (2.0 * math.pi):.6f} mod 2pi)")
    return EXIT_OK


def cmd_selftest(opts: dict[str, Any]) -> int:
    """Run the invariant suite; exit 0 iff every check passes."""
    results = run_selftest(seed=opts.get("seed", DEFAULT_SEED), samples=opts.get("samples", UNITARITY_SAMPLES))
    for result in results:
        status = "ok" if result.passed else "FAIL"
        print(f"[{status:>4}] {result.name} ({result.seconds:.2f}s): {result.detail}")
    failed = [result.name for result in results if not result.passed]
    print()
    if failed:
        print(f"{len(failed)} of {len(results)} checks failed: {', '.join(failed)}")
        return EXIT_INVARIANT
    print(f"All {len(results)} checks passed.")
    return EXIT_OK


def run(argv: list[str]) -> int:
    """Parse argv, dispatch and map errors to exit codes."""
    cli = build_cli()
    if not argv or argv[0] in ("--help", "-h"):
        cli.print_usage()
        return EXIT_OK if argv else EXIT_USAGE

    try:
        command, opts = cli.parse_args(argv)
    except UsageError as e:
        print(f"Error: {e}", file=sys.stderr)
        cli.print_usage()
        return e.exit_code
    except LarmorError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code

    logging.basicConfig(
        level=logging.DEBUG if opts.get("verbose") else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )

    try:
        if command == "scan":
            return cmd_scan(opts)
        elif command == "table":
            return cmd_table(opts)
        elif command == "packet":
            return cmd_packet(opts)
        elif command == "calibrate":
            return cmd_calibrate(opts)
        elif command == "selftest":
            return cmd_selftest(opts)
        else:
            print(f"Unknown command: {command}", file=sys.stderr)
            return EXIT_USAGE
    except ValidationError as e:
        for error in e.errors():
            location = ".".join(str(part) for part in error["loc"]) or "input"
            print(f"Error: {location}: {error['msg']}", file=sys.stderr)
        return EXIT_DOMAIN
    except LarmorError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
