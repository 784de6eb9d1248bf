"""Report rendering: warp-factor boxplots, bias bar charts, shaded tables.

Figures are rendered with matplotlib's SVG backend only (no raster output)
and are byte-deterministic: a fixed hashsalt and no embedded timestamps mean
identical inputs always produce identical files.
"""

from __future__ import annotations

import csv
import io

import matplotlib

matplotlib.use("Agg", force=False)

import matplotlib as mpl
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from .errors import DataError

SVG_HASHSALT = "asrbias"
ACCENT_RGB = (230, 124, 115)  # full-shade red used for maximal bias cells

_MODEL_COLORS = (
    "#4472c4",
    "#d9534f",
    "#f0ad4e",
    "#5cb85c",
    "#8064a2",
    "#4bacc6",
    "#7f7f7f",
    "#b8860b",
)


def render_svg(fig: Figure) -> str:
    """Serialize a figure as a standalone SVG string, deterministically."""
    FigureCanvasSVG(fig)
    buf = io.StringIO()
    with mpl.rc_context({"svg.hashsalt": SVG_HASHSALT}):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()


def build_warp_boxplot(
    stats: dict[str, dict[str, float]], title: str = "Estimated warp factors"
) -> Figure:
    """One box per speaker group from five-number summaries, with a dashed
    reference line at alpha = 1.0. Groups keep their input order."""
    if not stats:
        raise DataError("no groups to plot")
    fig = Figure(figsize=(6.0, 3.6))
    ax = fig.add_subplot(111)
    boxes = [
        {
            "label": group,
            "whislo": s["min"],
            "q1": s["q1"],
            "med": s["median"],
            "q3": s["q3"],
            "whishi": s["max"],
        }
        for group, s in stats.items()
    ]
    ax.bxp(boxes, showfliers=False)
    ax.axhline(1.0, color="red", linestyle="--", linewidth=1.0, label="reference (1.0)")
    ax.set_ylabel("warp factor")
    ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    return fig


def plot_warp_boxplot(stats: dict[str, dict[str, float]], title: str = "Estimated warp factors") -> str:
    return render_svg(build_warp_boxplot(stats, title))


def build_bias_bars(
    biases: dict[str, dict[str, float]],
    group_order: list[str] | None = None,
    title: str = "Bias per speaker group",
) -> Figure:
    """Grouped bar chart: one cluster per speaker group, one bar per model.

    biases maps model label -> {group -> bias}; legend entries keep the
    model labels (conventionally "augmentation | normalization")."""
    if not biases:
        raise DataError("no bias values to plot")
    models = list(biases.keys())
    if group_order is None:
        group_order = list(next(iter(biases.values())).keys())
    fig = Figure(figsize=(6.4, 3.6))
    ax = fig.add_subplot(111)
    n_models = len(models)
    width = 0.8 / n_models
    for m_idx, model in enumerate(models):
        xs = [g_idx + (m_idx - (n_models - 1) / 2.0) * width for g_idx in range(len(group_order))]
        ys = [biases[model].get(g, 0.0) for g in group_order]
        ax.bar(xs, ys, width=width, label=model, color=_MODEL_COLORS[m_idx % len(_MODEL_COLORS)])
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xticks(range(len(group_order)))
    ax.set_xticklabels(group_order)
    ax.set_ylabel("bias (percentage points)")
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    return fig


def plot_bias_bars(
    biases: dict[str, dict[str, float]],
    group_order: list[str] | None = None,
    title: str = "Bias per speaker group",
) -> str:
    return render_svg(build_bias_bars(biases, group_order, title))


def shade_hex(value: float, col_min: float, col_max: float) -> str:
    """Linear white-to-accent shade within a column; equal columns stay white."""
    if col_max <= col_min:
        t = 0.0
    else:
        t = (value - col_min) / (col_max - col_min)
    channels = (round(255 + t * (c - 255)) for c in ACCENT_RGB)
    return "#{:02X}{:02X}{:02X}".format(*channels)


def render_shaded_table(
    values: list[list[float]],
    row_labels: list[str],
    col_labels: list[str],
    corner_label: str = "",
) -> tuple[str, str]:
    """Render a numeric matrix as (HTML with shaded cells, CSV with raw values).

    Cells are shaded per column from white at the column minimum to the full
    accent color at the column maximum. The CSV carries full-precision values
    and round-trips to the same matrix.
    """
    n_rows = len(values)
    if n_rows == 0 or any(len(row) != len(col_labels) for row in values):
        raise DataError("table shape does not match labels")
    for row in values:
        for v in row:
            if not (v == v and abs(v) != float("inf")):
                raise DataError("table values must be finite")

    col_mins = [min(row[c] for row in values) for c in range(len(col_labels))]
    col_maxs = [max(row[c] for row in values) for c in range(len(col_labels))]

    html = ["<table>", "  <tr>"]
    html.append(f"    <th>{corner_label}</th>")
    for label in col_labels:
        html.append(f"    <th>{label}</th>")
    html.append("  </tr>")
    for r, row in enumerate(values):
        html.append("  <tr>")
        html.append(f"    <th>{row_labels[r]}</th>")
        for c, v in enumerate(row):
            color = shade_hex(v, col_mins[c], col_maxs[c])
            html.append(f'    <td style="background-color: {color}">{v:.2f}</td>')
        html.append("  </tr>")
    html.append("</table>")

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([corner_label] + list(col_labels))
    for r, row in enumerate(values):
        writer.writerow([row_labels[r]] + [repr(float(v)) for v in row])
    return "\n".join(html) + "\n", buf.getvalue()


def parse_shaded_table_csv(text: str) -> tuple[list[list[float]], list[str], list[str]]:
    """Invert render_shaded_table's CSV: returns (values, row_labels, col_labels)."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise DataError("empty table CSV")
    col_labels = rows[0][1:]
    row_labels = [r[0] for r in rows[1:]]
    values = [[float(v) for v in r[1:]] for r in rows[1:]]
    return values, row_labels, col_labels
