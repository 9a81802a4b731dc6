"""Figure jobs over the sptgame CSV schemas.

Four figure ids:
  phase           heatmap of the minimum string order parameter over the
                  (J_X, J_ZZ) grid with the red 7/8 winning-probability
                  contour (phase_diagram.csv)
  thermal_surface minimum winning probability over the (T, n) plane with
                  the red 7/8 contour (cluster_exact.csv)
  axis_compare    exact axis curves P_min(T) with Monte-Carlo estimates
                  overlaid as points with error bars (axis.csv + metts.csv)
  geometry        P_min(T) curves from several axis sweeps overlaid,
                  labeled by chain length (one axis.csv per input)

Rendering is deterministic: the style is pinned and nothing is computed
beyond the interpolation matplotlib performs for contouring.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

CLASSICAL_BOUND = 7.0 / 8.0
CONTOUR_COLOR = "red"

_SCHEMAS = {
    "phase_diagram": ["J_X", "J_ZZ", "min_sop", "P_min", "degenerate"],
    "cluster_exact": ["n", "T", "P_min", "T_c"],
    "axis": ["axis", "J", "n", "T", "g", "h", "U_g", "U_h", "U_gh",
             "T_twist", "UgT", "P", "P_min"],
    "metts": ["J_X", "J_ZZ", "T", "n", "observable", "mean", "stderr",
              "tau", "N_I", "seed"],
}

FIGURE_IDS = ("phase", "thermal_surface", "axis_compare", "geometry")

_STYLE = {
    "figure.figsize": (6.0, 4.5),
    "figure.dpi": 130,
    "savefig.dpi": 130,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "image.cmap": "viridis",  # keeps pure red free for the contour
}


class SchemaError(ValueError):
    """A CSV is missing, empty, or does not match its documented schema."""


@dataclass(frozen=True)
class FigureJob:
    figure_id: str
    inputs: tuple[str, ...]
    output: str

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise SchemaError(
                f"unknown figure id {self.figure_id!r}; choose from {FIGURE_IDS}"
            )
        if not self.inputs:
            raise SchemaError("figure job needs at least one input CSV")


@dataclass
class RenderSummary:
    """What got drawn, for tests and callers."""

    output: str
    contour_drawn: bool = False
    errorbar_points: int = 0
    curves: int = 0
    notes: list[str] = field(default_factory=list)


def _read_rows(path: str, schema: str) -> list[dict]:
    file_path = Path(path)
    if not file_path.exists():
        raise SchemaError(f"input CSV {path} does not exist")
    with open(file_path) as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [col for col in _SCHEMAS[schema] if col not in header]
        if missing:
            raise SchemaError(f"{path} lacks column(s) {missing} of the {schema} schema")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path} holds an empty grid; refusing to draw a blank figure")
    return rows


def _pivot(rows: list[dict], xcol: str, ycol: str, vcol: str):
    """Rectangular grid pivot; duplicates and holes are schema errors."""
    xs = sorted({float(r[xcol]) for r in rows})
    ys = sorted({float(r[ycol]) for r in rows})
    grid = np.full((len(ys), len(xs)), np.nan)
    xi = {v: i for i, v in enumerate(xs)}
    yi = {v: i for i, v in enumerate(ys)}
    for r in rows:
        grid[yi[float(r[ycol])], xi[float(r[xcol])]] = float(r[vcol])
    if np.isnan(grid).any():
        raise SchemaError(f"({xcol}, {ycol}) grid has holes; cannot contour")
    return np.array(xs), np.array(ys), grid


def render(job: FigureJob) -> RenderSummary:
    """Draw the requested figure and write it to job.output."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        summary = RenderSummary(output=job.output)
        try:
            if job.figure_id == "phase":
                _render_phase(ax, job, summary)
            elif job.figure_id == "thermal_surface":
                _render_thermal_surface(ax, fig, job, summary)
            elif job.figure_id == "axis_compare":
                _render_axis_compare(ax, job, summary)
            else:
                _render_geometry(ax, job, summary)
            fig.tight_layout()
            fig.savefig(job.output, metadata={"Software": "sptfigures"})
        finally:
            plt.close(fig)
    return summary


def _render_phase(ax, job: FigureJob, summary: RenderSummary):
    rows = _read_rows(job.inputs[0], "phase_diagram")
    xs, ys, sop = _pivot(rows, "J_X", "J_ZZ", "min_sop")
    _, _, p_min = _pivot(rows, "J_X", "J_ZZ", "P_min")
    mesh = ax.pcolormesh(xs, ys, sop, shading="nearest",
                         vmin=min(0.0, float(sop.min())), vmax=1.0)
    plt.colorbar(mesh, ax=ax, label="minimum string order parameter")
    if p_min.min() < CLASSICAL_BOUND < p_min.max():
        ax.contour(xs, ys, p_min, levels=[CLASSICAL_BOUND],
                   colors=CONTOUR_COLOR, linewidths=1.6)
        summary.contour_drawn = True
    else:
        summary.notes.append("winning probability never crosses 7/8 on this grid")
    ax.set_xlabel(r"$J_X$")
    ax.set_ylabel(r"$J_{ZZ}$")
    ax.set_title("ground-state string order with the 7/8 winning contour")


def _render_thermal_surface(ax, fig, job: FigureJob, summary: RenderSummary):
    rows = _read_rows(job.inputs[0], "cluster_exact")
    ts, ns, p_min = _pivot(rows, "T", "n", "P_min")
    mesh = ax.pcolormesh(ts, ns, p_min, shading="nearest", vmin=3.0 / 8.0, vmax=1.0)
    fig.colorbar(mesh, ax=ax, label=r"minimum winning probability")
    if p_min.min() < CLASSICAL_BOUND < p_min.max():
        ax.contour(ts, ns, p_min, levels=[CLASSICAL_BOUND],
                   colors=CONTOUR_COLOR, linewidths=1.6)
        summary.contour_drawn = True
    else:
        summary.notes.append("winning probability never crosses 7/8 on this grid")
    ax.set_xlabel("temperature $T$")
    ax.set_ylabel("chain length $n$")
    ax.set_title("thermal cluster state: quantum advantage region")


def _render_axis_compare(ax, job: FigureJob, summary: RenderSummary):
    if len(job.inputs) < 2:
        raise SchemaError("axis_compare needs an axis CSV and a metts CSV")
    axis_rows = _read_rows(job.inputs[0], "axis")
    metts_rows = _read_rows(job.inputs[1], "metts")
    by_j: dict[float, list[tuple[float, float]]] = {}
    for r in axis_rows:
        by_j.setdefault(float(r["J"]), []).append((float(r["T"]), float(r["P_min"])))
    for j, pts in sorted(by_j.items()):
        pts = sorted(set(pts))
        ax.plot([t for t, _ in pts], [p for _, p in pts], "-",
                label=f"exact, $J$ = {j:g}")
        summary.curves += 1
    estimates = [r for r in metts_rows if r["observable"] == "P_min"]
    if not estimates:
        raise SchemaError("metts CSV holds no P_min rows to overlay")
    ax.errorbar(
        [float(r["T"]) for r in estimates],
        [float(r["mean"]) for r in estimates],
        yerr=[float(r["stderr"]) for r in estimates],
        fmt="o", ms=4, capsize=3, color="black", label="Monte-Carlo estimate",
    )
    summary.errorbar_points = len(estimates)
    ax.axhline(CLASSICAL_BOUND, color=CONTOUR_COLOR, lw=1.0, ls="--",
               label="classical bound 7/8")
    summary.contour_drawn = True
    ax.set_xlabel("temperature $T$")
    ax.set_ylabel("minimum winning probability")
    ax.legend()
    ax.set_title("exact axis solution against chain estimates")


def _render_geometry(ax, job: FigureJob, summary: RenderSummary):
    for path in job.inputs:
        rows = _read_rows(path, "axis")
        by_n: dict[int, list[tuple[float, float]]] = {}
        for r in rows:
            by_n.setdefault(int(r["n"]), []).append((float(r["T"]), float(r["P_min"])))
        for n, pts in sorted(by_n.items()):
            pts = sorted(set(pts))
            ax.plot([t for t, _ in pts], [p for _, p in pts], "-o", ms=3,
                    label=f"$n$ = {n}")
            summary.curves += 1
    ax.axhline(CLASSICAL_BOUND, color=CONTOUR_COLOR, lw=1.0, ls="--",
               label="classical bound 7/8")
    ax.set_xlabel("temperature $T$")
    ax.set_ylabel("minimum winning probability")
    ax.legend()
    ax.set_title("length variation of the winning probability")
