"""
Channel-matrix heat maps and average probe-time curves, written as uncompressed TIFF.

Figures are built on matplotlib's object API (no pyplot state), so manifest
experiments can render from worker threads.
"""

from pathlib import Path

import numpy as np
import orjson
import pandas as pd
from matplotlib.figure import Figure
from mpl_toolkits.axes_grid1 import make_axes_locatable

from capacity.matrix import ChannelMatrix

COLORMAP = "viridis"
DPI = 100
TIFF_OPTIONS = {"compression": "raw"}


def _save(fig: Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="tiff", dpi=DPI, pil_kwargs=TIFF_OPTIONS)
    return path


def _sidecar(path: Path, meta: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(orjson.dumps(meta, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY))
    return path


def heatmap_meta(matrix: ChannelMatrix, title: str) -> dict:
    return {
        "schema_version": 1,
        "kind": "heatmap",
        "title": title,
        "colormap": COLORMAP,
        "x_axis": "input symbol",
        "x_labels": matrix.labels.tolist(),
        "y_axis": "output (cycles)",
        "y_edges": matrix.edges.tolist(),
        "scale": [0.0, float(matrix.probs.max())],
    }


def render_heatmap(matrix: ChannelMatrix, path: Path, title: str, sidecar: Path | None = None) -> Path:
    """p(output | input) with inputs along x and output bins along y."""
    fig = Figure(figsize=(6.4, 4.8))
    ax = fig.add_subplot()
    im = ax.imshow(
        matrix.probs.T,
        origin="lower",
        aspect="auto",
        cmap=COLORMAP,
        interpolation="nearest",
        vmin=0.0,
        vmax=float(matrix.probs.max()),
    )
    n_in, n_out = matrix.shape
    xticks = np.linspace(0, n_in - 1, min(n_in, 6)).round().astype(int)
    yticks = np.linspace(0, n_out - 1, min(n_out, 6)).round().astype(int)
    ax.set_xticks(xticks, [str(matrix.labels[i]) for i in xticks])
    ax.set_yticks(yticks, [f"{matrix.edges[i]:.0f}" for i in yticks])
    ax.set_xlabel("Input symbol")
    ax.set_ylabel("Output (cycles)")
    ax.set_title(title)

    cax = make_axes_locatable(ax).append_axes("right", size="5%", pad=0.1)
    fig.colorbar(im, cax=cax, label="p(output | input)")
    fig.tight_layout()
    _save(fig, path)
    if sidecar is not None:
        _sidecar(sidecar, heatmap_meta(matrix, title))
    return path


def curve_meta(curve: pd.DataFrame, title: str) -> dict:
    return {
        "schema_version": 1,
        "kind": "curve",
        "title": title,
        "x_axis": "input symbol",
        "y_axis": "mean output (cycles)",
        "interval": "95% normal approximation",
        "x_range": [int(curve["input"].min()), int(curve["input"].max())],
        "y_range": [float(curve["ci_low"].min()), float(curve["ci_high"].max())],
    }


def render_curve(curve: pd.DataFrame, path: Path, title: str, sidecar: Path | None = None) -> Path:
    fig = Figure(figsize=(6.4, 4.0))
    ax = fig.add_subplot()
    ax.fill_between(curve["input"], curve["ci_low"], curve["ci_high"], alpha=0.3, color="tab:blue", linewidth=0)
    ax.plot(curve["input"], curve["mean"], color="black", linewidth=1)
    ax.set_xlabel("Input symbol")
    ax.set_ylabel("Mean output (cycles)")
    ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)
    if sidecar is not None:
        _sidecar(sidecar, curve_meta(curve, title))
    return path
