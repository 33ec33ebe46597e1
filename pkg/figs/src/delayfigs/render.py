"""Figure assembly for each sweep kind.

Every renderer draws CSV columns as-is: measured curves from the
mean/sample rows, bound overlays from the bound columns, nothing
recomputed.  SVG output is made reproducible by pinning the hash salt
matplotlib uses for internal ids and dropping the creation date, so the
same CSV and style give identical bytes.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .exceptions import InvalidStyleError, SchemaMismatchError  # noqa: E402
from .reader import (  # noqa: E402
    RegionCurves,
    SweepTable,
    read_region_csv,
    read_sweep_csv,
)

_SVG_HASHSALT = "delayfigs"

_STYLE_KEYS = {"title", "cmap", "colorbar_label", "log_y"}

_DEFAULT_CMAP = "viridis"

# Weight-generator codes in wclass-spectra CSVs (part of the producer's
# column contract).
_WCLASS_LABELS = {0.0: "zero", 1.0: "identity", 2.0: "unitary", 3.0: "gaussian"}


class FigureKind(enum.Enum):
    SCALAR_COND = "scalar-cond"
    SCALAR_DET = "scalar-det"
    HERM_GRID = "herm-grid"
    REGION = "region"
    GENERAL_COND = "general-cond"
    GENERAL_DET = "general-det"
    LAG_GROWTH = "lag-growth"
    WCLASS_SPECTRA = "wclass-spectra"


@dataclass(frozen=True)
class FigureJob:
    """One CSV-to-image rendering task."""

    csv_path: str
    figure_kind: FigureKind
    out_path: str
    style: dict | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "figure_kind", FigureKind(self.figure_kind))
        style = dict(self.style or {})
        unknown = set(style) - _STYLE_KEYS
        if unknown:
            raise InvalidStyleError(
                f"unknown style keys {sorted(unknown)}; "
                f"supported: {sorted(_STYLE_KEYS)}"
            )
        object.__setattr__(self, "style", style)


def _finite(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = np.isfinite(y)
    return x[keep], y[keep]


def _series(rows, value_col):
    rows = sorted(rows, key=lambda r: r.param1)
    x = np.array([r.param1 for r in rows], dtype=float)
    y = np.array([r.values[value_col] for r in rows], dtype=float)
    return x, y


def _render_scalar_lines(ax, table: SweepTable, value_col: str,
                         bound_col: str, ylabel: str):
    for n in table.distinct("n"):
        rows = [r for r in table.means if r.n == n]
        x, y = _series(rows, value_col)
        ax.plot(*_finite(x, y), label=f"n={n}")
        xb, yb = _series(rows, bound_col)
        line, = ax.plot(*_finite(xb, yb), linestyle="--", linewidth=1.0,
                        alpha=0.8)
        line.set_gid(f"bound-overlay-n{n}")
    ax.set_xlabel(table.means[0].param1_name)
    ax.set_ylabel(ylabel)
    ax.legend(loc="best")


def _pivot(rows, x_of, y_of, value_col):
    xs = sorted({x_of(r) for r in rows})
    ys = sorted({y_of(r) for r in rows})
    grid = np.full((len(ys), len(xs)), np.nan)
    xi = {v: i for i, v in enumerate(xs)}
    yi = {v: i for i, v in enumerate(ys)}
    for r in rows:
        grid[yi[y_of(r)], xi[x_of(r)]] = r.values[value_col]
    return np.array(xs, dtype=float), np.array(ys, dtype=float), grid


def _render_heatmaps(fig, table: SweepTable, value_col: str, y_of, ylabel: str,
                     cmap: str, colorbar_label: str):
    depths = table.distinct("n")
    axes = fig.subplots(1, len(depths), squeeze=False)[0]
    finite_vals = [
        v for r in table.means
        if (v := r.values[value_col]) is not None and math.isfinite(v)
    ]
    if not finite_vals:
        raise SchemaMismatchError(f"no finite {value_col} values to draw")
    vmin, vmax = min(finite_vals), max(finite_vals)
    mesh = None
    for ax, n in zip(axes, depths):
        rows = [r for r in table.means if r.n == n]
        xs, ys, grid = _pivot(rows, lambda r: r.param1, y_of, value_col)
        mesh = ax.pcolormesh(xs, ys, np.ma.masked_invalid(grid),
                             cmap=cmap, vmin=vmin, vmax=vmax,
                             shading="nearest")
        ax.set_title(f"n={n}")
        ax.set_xlabel(rows[0].param1_name)
    axes[0].set_ylabel(ylabel)
    fig.colorbar(mesh, ax=list(axes), label=colorbar_label)


def _render_region(ax, curves: RegionCurves):
    smin = curves.sigma_min
    # The refined small-gain and expansive conditions extend the weak
    # envelope on their applicability ranges (sigma_max <= 1 is built
    # into the small-gain curve; expansiveness needs sigma_min >= 1).
    envelope = np.maximum(curves.weak, curves.small_gain)
    envelope = np.where(smin >= 1.0,
                        np.maximum(envelope, curves.expansive), envelope)
    lower = smin  # sigma_max can never sit below sigma_min
    ax.fill_between(smin, lower, envelope, where=envelope >= lower,
                    alpha=0.3, linewidth=0, label="guaranteed full rank")
    ax.plot(smin, curves.weak, linestyle="--", linewidth=1.0,
            label="weak boundary")
    ax.plot(smin, curves.small_gain, linewidth=1.2,
            label="small-gain boundary")
    keep = smin >= 1.0
    ax.plot(smin[keep], curves.expansive[keep], linestyle="-.",
            linewidth=1.2, label="expansive boundary")
    ax.plot(smin, smin, linewidth=0.8, color="0.6")
    ax.set_xlabel("sigma_min(W)")
    ax.set_ylabel("sigma_max(W)")
    ax.legend(loc="upper left")


def _render_lag_growth(ax, table: SweepTable):
    var_by_key = {
        (r.m, r.n, r.param1): r.values["kappa_log10"]
        for r in table.variances
    }
    for m in table.distinct("m"):
        for n in sorted({r.n for r in table.means if r.m == m}):
            rows = [r for r in table.means if r.m == m and r.n == n]
            x, y = _series(rows, "kappa_log10")
            std = np.array([
                math.sqrt(max(var_by_key.get((m, n, float(xv)), 0.0), 0.0))
                for xv in x
            ])
            line, = ax.plot(x, y, label=f"m={m}, n={n}")
            ax.fill_between(x, y - std, y + std, alpha=0.2,
                            color=line.get_color(), linewidth=0)
            xb, yb = _series(rows, "bound_kappa_log10")
            bline, = ax.plot(*_finite(xb, yb), linestyle="--", linewidth=0.9,
                             color=line.get_color(), alpha=0.7)
            bline.set_gid(f"bound-overlay-m{m}-n{n}")
    ax.set_xlabel(table.means[0].param1_name)
    ax.set_ylabel("log10 condition number")
    ax.legend(loc="upper left", fontsize="small")


def _render_wclass(ax, table: SweepTable):
    codes = table.distinct("param1")
    smax_groups, smin_groups, labels = [], [], []
    for code in codes:
        rows = [r for r in table.samples if r.param1 == code]
        smax_groups.append([r.values["sigma_max"] for r in rows])
        smin_groups.append([r.values["sigma_min"] for r in rows])
        labels.append(_WCLASS_LABELS.get(code, f"code {code:g}"))
    pos = np.arange(len(codes), dtype=float)
    bp_max = ax.boxplot(smax_groups, positions=pos - 0.18, widths=0.3,
                        patch_artist=True)
    bp_min = ax.boxplot(smin_groups, positions=pos + 0.18, widths=0.3,
                        patch_artist=True)
    for patch in bp_max["boxes"]:
        patch.set_facecolor("#4878cf")
    for patch in bp_min["boxes"]:
        patch.set_facecolor("#ee854a")
    ax.set_xticks(pos)
    ax.set_xticklabels(labels)
    ax.set_ylabel("delay-matrix singular value extremes")
    ax.legend([bp_max["boxes"][0], bp_min["boxes"][0]],
              ["sigma_max", "sigma_min"], loc="best")


def _write_sidecar(job: FigureJob, cmap: str):
    payload = {
        "csv_path": job.csv_path,
        "figure_kind": job.figure_kind.value,
        "out_path": job.out_path,
        "cmap": cmap,
        "style": job.style,
        "svg_hashsalt": _SVG_HASHSALT,
    }
    with open(job.out_path + ".style.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def render(job: FigureJob) -> None:
    """Render one figure job to ``job.out_path`` plus a style sidecar."""
    kind = job.figure_kind
    style = job.style
    cmap = str(style.get("cmap", _DEFAULT_CMAP))
    colorbar_label = str(style.get("colorbar_label", "log10 value"))

    with plt.rc_context({"svg.hashsalt": _SVG_HASHSALT,
                         "svg.fonttype": "none"}):
        fig = plt.figure(figsize=(8.0, 4.5), constrained_layout=True)
        try:
            if kind in (FigureKind.SCALAR_COND, FigureKind.SCALAR_DET):
                table = read_sweep_csv(job.csv_path, kind.value)
                ax = fig.add_subplot()
                if kind is FigureKind.SCALAR_COND:
                    _render_scalar_lines(ax, table, "kappa_log10",
                                         "bound_kappa_log10",
                                         "log10 condition number")
                else:
                    _render_scalar_lines(ax, table, "gen_det_log10",
                                         "bound_det_log10",
                                         "log10 generalized determinant")
                if style.get("log_y"):
                    ax.set_yscale("log")
            elif kind is FigureKind.HERM_GRID:
                table = read_sweep_csv(job.csv_path, kind.value)
                _render_heatmaps(fig, table, "kappa_log10",
                                 lambda r: r.param2, "lambda2", cmap,
                                 str(style.get("colorbar_label",
                                               "log10 condition number")))
            elif kind in (FigureKind.GENERAL_COND, FigureKind.GENERAL_DET):
                table = read_sweep_csv(job.csv_path, kind.value)
                col = ("kappa_log10" if kind is FigureKind.GENERAL_COND
                       else "gen_det_log10")
                _render_heatmaps(fig, table, col, lambda r: float(r.m),
                                 "m", cmap, colorbar_label)
            elif kind is FigureKind.REGION:
                _render_region(fig.add_subplot(), read_region_csv(job.csv_path))
            elif kind is FigureKind.LAG_GROWTH:
                table = read_sweep_csv(job.csv_path, kind.value)
                _render_lag_growth(fig.add_subplot(), table)
            else:
                table = read_sweep_csv(job.csv_path, kind.value)
                _render_wclass(fig.add_subplot(), table)

            if "title" in style:
                fig.suptitle(str(style["title"]))
            if job.out_path.lower().endswith(".svg"):
                fig.savefig(job.out_path, format="svg",
                            metadata={"Date": None})
            else:
                fig.savefig(job.out_path)
        finally:
            plt.close(fig)
    _write_sidecar(job, cmap)
