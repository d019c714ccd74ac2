"""Report emission: theorem-report JSON, plot-data CSVs, and rendered figures.

Reports are batch artifacts: the delimited series data is the primary
output, and each report is additionally rendered to a PNG so a run
directory is inspectable without further tooling.  Figures are drawn on an
explicit Agg canvas (no global pyplot state).
"""

from __future__ import annotations

import math
import os

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .serialize import write_json, write_series_csv
from .verify import TheoremReport

_SERIES_STYLE = dict(marker="o", markersize=3.5, lw=1.2, color="#1f4e8c")
_PRED_STYLE = dict(lw=1.2, ls="--", color="#b2432f")


def report_basename(report: TheoremReport) -> str:
    return report.fixture_prefix.replace(".", "_") or report.theorem


def new_figure(width: float = 5.2, height: float = 3.4) -> Figure:
    fig = Figure(figsize=(width, height), dpi=150)
    FigureCanvasAgg(fig)
    return fig


def render_report_figure(report: TheoremReport, path: str):
    """Line plot of the statistic series against n with the prediction overlaid."""
    rows = [r for r in report.series if r.get("n")]
    ns = [r["n"] for r in rows]
    stat = [r.get("statistic", math.nan) for r in rows]
    pred = [r.get("prediction", math.nan) for r in rows]

    fig = new_figure()
    ax = fig.add_subplot(111)
    ax.set_xscale("log")
    ax.plot(ns, stat, label="statistic", **_SERIES_STYLE)
    if any(not math.isnan(p) for p in pred):
        ax.plot(ns, pred, label="prediction", **_PRED_STYLE)
    lo = report.predicted.get("interval_lo")
    hi = report.predicted.get("interval_hi")
    if lo is not None and hi is not None:
        ax.axhspan(lo, hi, color="#b2432f", alpha=0.12, label="predicted interval")
    if report.theorem in ("clt", "saddle", "classical"):
        positive = [s for s in stat if s and s > 0 and not math.isnan(s)]
        if len(positive) == len([s for s in stat if not math.isnan(s)]):
            ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel(report.theorem)
    title = f"{report.theorem}: {report.metadata.get('model', '')}"
    if report.passed is not None:
        title += "  [PASS]" if report.passed else "  [FAIL]"
    ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8, frameon=False)
    ax.grid(True, which="both", alpha=0.25, lw=0.4)
    fig.tight_layout()
    fig.savefig(path)


def write_report(
    report: TheoremReport, out_dir, figures: bool = True, basename: str | None = None
) -> dict:
    """Write <base>.json, <base>_series.csv and (optionally) <base>.png.

    Returns the paths written, keyed by kind.
    """
    os.makedirs(out_dir, exist_ok=True)
    base = basename or report_basename(report)
    paths = {}
    json_path = os.path.join(out_dir, f"{base}.json")
    write_json(report.to_json(), json_path)
    paths["json"] = json_path
    csv_path = os.path.join(out_dir, f"{base}_series.csv")
    write_series_csv(csv_path, report.series_rows())
    paths["csv"] = csv_path
    if figures:
        png_path = os.path.join(out_dir, f"{base}.png")
        render_report_figure(report, png_path)
        paths["png"] = png_path
    return paths


def load_report(path) -> TheoremReport:
    import json

    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    return TheoremReport(
        theorem=obj["theorem"],
        metadata=obj.get("metadata", {}),
        series=obj.get("series", []),
        predicted=obj.get("predicted", {}),
        checks=obj.get("checks", {}),
        fixture_prefix=obj.get("fixture_prefix", ""),
        passed=obj.get("passed"),
        thresholds=obj.get("thresholds"),
    )


def render_profile_figure(snapshot, model_name: str, path: str):
    """Profile bar plot with the level counts on a log count scale."""
    fig = new_figure()
    ax = fig.add_subplot(111)
    levels = snapshot.levels
    counts = snapshot.counts
    mask = counts > 0
    ax.bar(levels[mask], counts[mask], width=0.9, color="#1f4e8c", alpha=0.85)
    ax.set_xlabel("level k")
    ax.set_ylabel("count")
    ax.set_title(f"{model_name}: profile at n = {snapshot.n}", fontsize=10)
    ax.grid(True, axis="y", alpha=0.25, lw=0.4)
    fig.tight_layout()
    fig.savefig(path)
