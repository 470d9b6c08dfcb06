"""Render publication-style figures from the solver CLI's CSV artifacts.

Three figure families are supported: mode-weight heatmaps over the
(angular index l, radial index n) plane, spiral spectra P_l, and
entropy / Schmidt-number curves versus the chirp parameter read from
sweep files.  All rendering is read-only with respect to its inputs
and deterministic: fixed figure size, fixed style cycle, overwriting
the output path on re-run.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("schmidt-heatmap", "spiral", "entropy-vs-alpha",
         "schmidtnumber-vs-alpha")

# bar charts stay readable only for modest mode counts; beyond this the
# spiral spectrum is drawn as a continuous line
BAR_MODE_LIMIT = 50

# line styles for multi-series sweep plots, cycled in input order
SERIES_STYLES = (
    {"color": "black", "linestyle": "-"},
    {"color": "tab:blue", "linestyle": "--"},
    {"color": "tab:red", "linestyle": "-."},
)

FIGSIZE = (6.4, 4.8)
DPI = 150


class SchemaError(ValueError):
    """A CSV input does not match the schema its figure kind requires."""


@dataclass(frozen=True)
class FigureJob:
    """One rendering task: a figure kind, its CSV inputs, the image path."""

    kind: str
    inputs: tuple[str, ...]
    output: str
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; "
                             f"expected one of {', '.join(KINDS)}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")
        if self.kind in ("schmidt-heatmap", "spiral") and len(self.inputs) != 1:
            raise ValueError(f"{self.kind} takes exactly one input CSV")
        if self.labels and len(self.labels) != len(self.inputs):
            raise ValueError(
                f"{len(self.labels)} labels for {len(self.inputs)} inputs")


# ----------------------------------------------------------------------
# CSV loading with schema enforcement

def _load_csv(path: str, columns: tuple[str, ...],
              numeric: tuple[str, ...]) -> list[dict]:
    """Read ``path`` and check it carries exactly ``columns`` in order.

    Raises SchemaError naming the first offending column on mismatch,
    and on empty files (header-only or truly empty).
    """
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header "
                              f"{','.join(columns)}") from None
        for i, want in enumerate(columns):
            got = header[i] if i < len(header) else "<missing>"
            if got != want:
                raise SchemaError(
                    f"{path}: column {i + 1} is {got!r}, expected {want!r}")
        if len(header) > len(columns):
            raise SchemaError(f"{path}: unexpected extra column "
                              f"{header[len(columns)]!r}")
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if len(raw) != len(columns):
                raise SchemaError(f"{path}:{lineno}: expected "
                                  f"{len(columns)} fields, got {len(raw)}")
            row = dict(zip(columns, raw))
            for col in numeric:
                try:
                    row[col] = float(row[col])
                except ValueError:
                    raise SchemaError(
                        f"{path}:{lineno}: column {col!r} is not numeric: "
                        f"{row[col]!r}") from None
            rows.append(row)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def load_mode_weights(path: str) -> list[dict]:
    """Mode-weight triples (l, n, lambda) from a spectrum/heatmap CSV."""
    return _load_csv(path, ("l", "n", "lambda"), ("l", "n", "lambda"))


def load_spiral(path: str) -> list[dict]:
    """Spiral spectrum rows (l, P_l)."""
    return _load_csv(path, ("l", "P_l"), ("l", "P_l"))


def load_sweep(path: str) -> list[dict]:
    """Sweep rows (axis_value, E_ebits, K, P0, l_max, converged)."""
    return _load_csv(path, ("axis_value", "E_ebits", "K", "P0", "l_max",
                            "converged"),
                     ("axis_value", "E_ebits", "K", "P0", "l_max"))


# ----------------------------------------------------------------------
# renderers

def _render_heatmap(rows: list[dict], ax):
    ls = np.array([int(r["l"]) for r in rows])
    ns = np.array([int(r["n"]) for r in rows])
    lam = np.array([r["lambda"] for r in rows])
    l_lo, l_hi = int(ls.min()), int(ls.max())
    n_hi = int(ns.max())
    grid = np.zeros((n_hi + 1, l_hi - l_lo + 1))
    grid[ns, ls - l_lo] = lam
    peak = grid.max()
    if peak <= 0:
        raise SchemaError("all mode weights are zero; nothing to normalize")
    im = ax.imshow(grid / peak, origin="lower", aspect="auto",
                   extent=(l_lo - 0.5, l_hi + 0.5, -0.5, n_hi + 0.5),
                   cmap="viridis", vmin=0.0, vmax=1.0)
    ax.set_xlabel("angular index $l$")
    ax.set_ylabel("radial index $n$")
    ax.figure.colorbar(im, ax=ax, label=r"$\lambda_{nl}$ / max")


def _render_spiral(rows: list[dict], ax):
    ls = np.array([int(r["l"]) for r in rows])
    pl = np.array([r["P_l"] for r in rows])
    order = np.argsort(ls)
    ls, pl = ls[order], pl[order]
    if len(ls) <= BAR_MODE_LIMIT:
        ax.bar(ls, pl, width=0.8, color="tab:blue")
    else:
        ax.plot(ls, pl, color="tab:blue", linewidth=1.2)
    ax.set_xlabel("angular index $l$")
    ax.set_ylabel("$P_l$")
    ax.set_ylim(bottom=0.0)


def _render_sweep(jobs_rows: list[list[dict]], labels: tuple[str, ...],
                  column: str, ylabel: str, ax):
    for i, rows in enumerate(jobs_rows):
        x = [r["axis_value"] for r in rows]
        y = [r[column] for r in rows]
        style = SERIES_STYLES[i % len(SERIES_STYLES)]
        label = labels[i] if labels else None
        ax.plot(x, y, marker="o", markersize=3, label=label, **style)
    ax.set_xlabel(r"chirp parameter $\alpha$ ($\mu m^{-2}$)")
    ax.set_ylabel(ylabel)
    if labels:
        ax.legend()


def render(job: FigureJob) -> str:
    """Render ``job`` and write its image; returns the output path.

    All inputs are loaded and validated before any drawing happens, so a
    schema error never leaves a partial output file behind.
    """
    if job.kind == "schmidt-heatmap":
        loaded = [load_mode_weights(job.inputs[0])]
    elif job.kind == "spiral":
        loaded = [load_spiral(job.inputs[0])]
    else:
        loaded = [load_sweep(p) for p in job.inputs]

    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    try:
        if job.kind == "schmidt-heatmap":
            _render_heatmap(loaded[0], ax)
        elif job.kind == "spiral":
            _render_spiral(loaded[0], ax)
        elif job.kind == "entropy-vs-alpha":
            _render_sweep(loaded, job.labels, "E_ebits", "entropy (ebits)", ax)
        else:
            _render_sweep(loaded, job.labels, "K", "Schmidt number $K$", ax)
            if max(r["K"] for rows in loaded for r in rows) > 1e3:
                ax.ticklabel_format(axis="y", style="sci", scilimits=(0, 3))
        fig.tight_layout()
        out_dir = os.path.dirname(os.path.abspath(job.output))
        os.makedirs(out_dir, exist_ok=True)
        fig.savefig(job.output)
    finally:
        plt.close(fig)
    return job.output
