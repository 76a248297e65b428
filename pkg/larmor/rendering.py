"""Serialization of scan records and density tables, plus gnuplot companions.

Numbers are written in scientific notation with 12 significant digits so
identical inputs always produce identical files.
"""

import json
from pathlib import Path
from typing import Any, Iterable

from jinja2 import Environment
from pydantic import dataclasses

from larmor.config import RunConfig
from larmor.precession import CALIBRATED_WIDTH, WIDTH_PROVENANCE_NOTE
from larmor.scan import ScanRecord
from larmor.units import ParticleSpec
from larmor.wavepacket import GaussianPacket, SpinDensityTable

DENSITY_COLUMNS = ["k", "spectral", "p_std", "p_mod_raw", "p_mod_norm", "density_std", "density_mod"]

# Header keys whose fixed run value does not hold on the rows of a sweep.
SWEPT_METADATA_KEYS = {
    "B": ("B_T",),
    "v": ("v_mps", "E_eV", "k_per_m"),
    "a": ("width_m", "width_provenance"),
    "theta": ("theta_rad",),
}

ROTATION_SENSE_NOTE = (
    "off-axis analyzer: the scattering phase phi1 - phi2 tends to +phi, "
    "so for fast particles p_mod(theta) approaches p_std(-theta)"
)

SUMMARY_COLUMNS = [
    "param", "value", "k0", "delta", "n_points", "k_min", "k_max",
    "P_spectral", "P_spectral_err", "P_std", "P_std_err", "P_mod", "P_mod_err",
    "l2_distance", "max_gap",
]

GNUPLOT_TEMPLATE = """\
# gnuplot companion for {{ data_file }}
set datafile separator ","
set key autotitle columnhead
set xlabel "{{ x_label }}"
set ylabel "{{ y_label }}"
{% if log_x %}set logscale x
{% endif %}\
set terminal pngcairo size 900,600
set output "{{ image_file }}"
plot {% for series in series %}"{{ data_file }}" using {{ x_column }}:{{ series.column }} with {{ style }} title "{{ series.title }}"{% if not loop.last %}, \\
     {% endif %}{% endfor %}
"""


def format_number(value: Any) -> str:
    """12 significant digits in scientific notation; other values as text."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{float(value):.11e}"
    return str(value)


@dataclasses.dataclass(frozen=True)
class RenderContext:
    command: str
    metadata: dict[str, str]


def build_metadata(
    command: str,
    run: RunConfig,
    particle: ParticleSpec,
    extra: dict[str, Any] | None = None,
    swept: str | None = None,
) -> RenderContext:
    """Inputs, constants and width provenance recorded at the top of every output file.

    A swept parameter is recorded as `swept` in place of its fixed run value.
    """
    width = run.width_m if run.width_m is not None else CALIBRATED_WIDTH
    metadata = {
        "command": command,
        "particle": particle.label,
        "mass_kg": format_number(particle.mass),
        "moment_J_per_T": format_number(particle.magnetic_moment),
        "hbar_J_s": format_number(particle.hbar),
        "B_T": format_number(run.B_T),
        "width_m": format_number(width),
        "width_provenance": f"calibrated ({WIDTH_PROVENANCE_NOTE})" if run.width_is_calibrated else "user supplied",
        "theta_rad": format_number(run.theta_rad),
        "normalized": format_number(run.normalized),
        "allow_evanescent": format_number(run.allow_evanescent),
    }
    for name, label in (("v_mps", "v_mps"), ("E_eV", "E_eV"), ("k_per_m", "k_per_m")):
        value = getattr(run, name)
        if value is not None:
            metadata[label] = format_number(value)
    if swept is not None:
        first, *rest = SWEPT_METADATA_KEYS[swept]
        metadata[first] = "swept"
        for key in rest:
            metadata.pop(key, None)
        metadata["swept"] = swept
    if run.theta_rad != 0 or swept == "theta":
        metadata["rotation_sense"] = ROTATION_SENSE_NOTE
    for key, value in (extra or {}).items():
        metadata[key] = format_number(value)
    return RenderContext(command=command, metadata=metadata)


def _header(context: RenderContext) -> list[str]:
    return [f"# {key}: {value}" for key, value in context.metadata.items()]


def render_csv(context: RenderContext, columns: list[str], rows: Iterable[Iterable[Any]]) -> str:
    lines = _header(context)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_number(value) for value in row))
    return "\n".join(lines) + "\n"


def _json_value(value: Any) -> Any:
    if not isinstance(value, float):
        return value
    return float(format_number(value))


def render_json(context: RenderContext, columns: list[str], rows: Iterable[Iterable[Any]]) -> str:
    document = {
        "metadata": context.metadata,
        "records": [
            {column: _json_value(value) for column, value in zip(columns, row)}
            for row in rows
        ],
    }
    return json.dumps(document, indent=2) + "\n"


def render_records(context: RenderContext, records: list[ScanRecord], output_format: str = "csv") -> str:
    """Scan/table output in the requested format."""
    columns = ScanRecord.columns()
    rows = [record.values() for record in records]
    if output_format == "json":
        return render_json(context, columns, rows)
    return render_csv(context, columns, rows)


def density_rows(table: SpinDensityTable) -> list[list[float]]:
    return [
        [float(value) for value in row]
        for row in zip(
            table.k,
            table.spectral,
            table.p_standard,
            table.p_modified_raw,
            table.p_modified_normalized,
            table.density_standard,
            table.density_modified,
        )
    ]


def render_density_table(context: RenderContext, table: SpinDensityTable) -> str:
    return render_csv(context, DENSITY_COLUMNS, density_rows(table))


def summary_row(parameter: str, value: float, packet: GaussianPacket, table: SpinDensityTable) -> list[Any]:
    integrated = table.integrated()
    return [
        parameter,
        value,
        packet.k0,
        packet.delta,
        table.grid.n_points,
        table.grid.k_min,
        table.grid.k_max,
        integrated["spectral"].value,
        integrated["spectral"].error_estimate,
        integrated["standard"].value,
        integrated["standard"].error_estimate,
        integrated["modified"].value,
        integrated["modified"].error_estimate,
        table.l2_distance(),
        table.max_gap(),
    ]


def render_gnuplot(
    data_file: str,
    x_column: str,
    columns: list[str],
    series: list[tuple[str, str]],
    x_label: str,
    y_label: str,
    log_x: bool = False,
    style: str = "linespoints",
) -> str:
    """gnuplot script plotting `series` ((column, title) pairs) against `x_column`.

    Columns are referenced by 1-based position in the CSV.
    """
    env = Environment(keep_trailing_newline=True)
    tpl = env.from_string(GNUPLOT_TEMPLATE)
    return tpl.render(
        data_file=data_file,
        image_file=str(Path(data_file).with_suffix(".png")),
        x_column=columns.index(x_column) + 1,
        series=[{"column": columns.index(column) + 1, "title": title} for column, title in series],
        x_label=x_label,
        y_label=y_label,
        log_x=log_x,
        style=style,
    )


def records_gnuplot(data_file: str, x_column: str, log_x: bool = False, normalized: bool = False) -> str:
    modified = "p_mod_norm" if normalized else "p_mod_raw"
    return render_gnuplot(
        data_file,
        x_column,
        ScanRecord.columns(),
        [("p_std", "standard"), (modified, "scattering")],
        x_label=x_column,
        y_label="detection probability",
        log_x=log_x,
    )


def density_gnuplot(data_file: str) -> str:
    return render_gnuplot(
        data_file,
        "k",
        DENSITY_COLUMNS,
        [("density_std", "standard"), ("density_mod", "scattering")],
        x_label="k (1/m)",
        y_label="spin-x spectral density (m)",
        style="lines",
    )
