"""Render sweep CSVs into radar-SINR line charts, one curve per scheme.

Consumes the result CSV written by the simulation harness; the schema is
the ten-column format with the header below.  Means are taken over
converged rows in the dB domain, matching the harness summary convention.
Output is deterministic: fixed style, no timestamps, so re-rendering the
same CSV reproduces the file byte for byte.
"""

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV_HEADER = ("drop_id,scheme,P_dBm,Gamma_dB,radar_sinr_dB,min_comm_sinr_dB,"
              "outer_iters,converged,wall_ms,seed")

AXIS_LABELS = {
    "P_dBm": "transmit power (dBm)",
    "Gamma_dB": "communication SINR target (dB)",
}

# fixed palette and marker per scheme so every rendering looks the same
STYLE = {
    "radar_only": {"color": "#333333", "marker": "^", "ls": "--"},
    "proposed": {"color": "#c0392b", "marker": "o", "ls": "-"},
    "spatial_bf": {"color": "#2471a3", "marker": "s", "ls": "-"},
    "no_rbf": {"color": "#1e8449", "marker": "v", "ls": "-"},
}
FALLBACK_STYLE = {"color": "#7d3c98", "marker": "d", "ls": "-"}


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class PlotSpec:
    csv_path: str
    x_field: str                 # "P_dBm" or "Gamma_dB"
    output_path: str
    group_field: str = "scheme"
    title: str = "Radar output SINR"
    ylabel: str = "radar SINR (dB)"

    def __post_init__(self):
        if self.x_field not in AXIS_LABELS:
            raise SchemaError(f"x axis must be one of {sorted(AXIS_LABELS)}")


def read_rows(csv_path):
    with open(csv_path) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{csv_path}: empty file") from None
        if ",".join(header) != CSV_HEADER:
            raise SchemaError(f"{csv_path}: unexpected header")
        names = header
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(names):
                raise SchemaError(f"{csv_path}: line {lineno}: field count")
            rows.append(dict(zip(names, rec)))
    if not rows:
        raise SchemaError(f"{csv_path}: no data rows")
    return rows


def curve_data(rows, x_field, group_field="scheme"):
    """Mean radar SINR over converged rows, keyed by group then x value."""
    acc = {}
    for row in rows:
        if row["converged"] != "true":
            continue
        try:
            x = float(row[x_field])
            y = float(row["radar_sinr_dB"])
        except KeyError as exc:
            raise SchemaError(f"missing column {exc}") from None
        acc.setdefault(row[group_field], {}).setdefault(x, []).append(y)
    curves = {}
    for group, pts in sorted(acc.items()):
        xs = sorted(pts)
        curves[group] = (xs, [sum(pts[x]) / len(pts[x]) for x in xs])
    return curves


def render_curves(spec):
    """Draw one mean curve per scheme and write the image; returns the data."""
    rows = read_rows(spec.csv_path)
    curves = curve_data(rows, spec.x_field, spec.group_field)
    if not curves:
        raise SchemaError(f"{spec.csv_path}: no converged rows to plot")

    plt.rcParams["svg.hashsalt"] = "cfisac-plots"
    fig, ax = plt.subplots(figsize=(6.0, 4.2), dpi=120)
    for name, (xs, ys) in curves.items():
        style = STYLE.get(name, FALLBACK_STYLE)
        ax.plot(xs, ys, label=name, color=style["color"],
                marker=style["marker"], linestyle=style["ls"],
                markersize=5.5, linewidth=1.4)
    ax.set_xlabel(AXIS_LABELS[spec.x_field])
    ax.set_ylabel(spec.ylabel)
    ax.set_title(spec.title)
    ax.grid(True, alpha=0.35)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(spec.output_path, metadata=_no_timestamp(spec.output_path))
    plt.close(fig)
    return curves


def _no_timestamp(path):
    if str(path).lower().endswith(".svg"):
        return {"Date": None}
    if str(path).lower().endswith(".png"):
        return {"Software": "cfisac-plots"}
    return None
