"""Render magnetization / return time-series overlays from a stored run.

Input is the simulator's on-disk interface only: a series CSV with header
`t,M_1,...,M_K,r_1,...,r_K` (empty return fields on the first row) and the
co-located `manifest.json` carrying the run's configuration.  Rendering is
read-only and deterministic: fixed figure geometry, Agg backend, no
timestamps in the image.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import matplotlib
matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

QUANTITIES = ("magnetization", "return")
FIGSIZE = (10.0, 4.0)
DPI = 110


class FigureError(ValueError):
    """Bad plot request or malformed run directory."""


@dataclass
class PlotSpec:
    csv_path: Path
    quantity: str
    stocks: tuple = ()          # 1-based indices; empty = all stocks
    t_min: Optional[int] = None
    t_max: Optional[int] = None
    out_path: Path = field(default=None)

    def __post_init__(self):
        self.csv_path = Path(self.csv_path)
        if self.out_path is not None:
            self.out_path = Path(self.out_path)
        if self.quantity not in QUANTITIES:
            raise FigureError(f"quantity must be one of {QUANTITIES}, "
                              f"got {self.quantity!r}")
        self.stocks = tuple(int(s) for s in self.stocks)


def load_series(csv_path) -> pd.DataFrame:
    csv_path = Path(csv_path)
    if not csv_path.exists():
        raise FigureError(f"series file not found: {csv_path}")
    frame = pd.read_csv(csv_path)
    if "t" not in frame.columns or not any(c.startswith("M_") for c in frame.columns):
        raise FigureError(f"{csv_path} does not look like a series file "
                          f"(columns: {list(frame.columns)})")
    return frame


def load_gamma_label(run_dir) -> str:
    manifest_path = Path(run_dir) / "manifest.json"
    if not manifest_path.exists():
        raise FigureError(f"manifest not found: {manifest_path}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    try:
        gamma = np.asarray(manifest["config"]["gamma"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise FigureError(f"manifest {manifest_path} has no config.gamma") from exc
    if gamma.shape[0] > 1:
        off_diag = gamma[~np.eye(gamma.shape[0], dtype=bool)]
        if np.all(off_diag == off_diag[0]):
            return f"gamma = {off_diag[0]:g}"
    return "gamma = 0" if gamma.size <= 1 else "gamma matrix"


def _column(quantity: str, stock: int) -> str:
    return f"M_{stock}" if quantity == "magnetization" else f"r_{stock}"


def build_figure(spec: PlotSpec, gamma_label: str):
    """Validate the spec against the data and return the assembled figure."""
    frame = load_series(spec.csv_path)
    n_stocks = sum(c.startswith("M_") for c in frame.columns)
    stocks = spec.stocks or tuple(range(1, n_stocks + 1))
    for stock in stocks:
        if _column(spec.quantity, stock) not in frame.columns:
            raise FigureError(f"stock {stock} not present in {spec.csv_path} "
                              f"(found {n_stocks} stocks)")

    t = frame["t"].to_numpy()
    lo = spec.t_min if spec.t_min is not None else int(t.min())
    hi = spec.t_max if spec.t_max is not None else int(t.max())
    if lo > hi:
        raise FigureError(f"empty time window: t_min {lo} > t_max {hi}")
    mask = (t >= lo) & (t <= hi)
    if not mask.any():
        raise FigureError(f"empty time window: no samples in [{lo}, {hi}] "
                          f"(data spans [{t.min()}, {t.max()}])")

    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    for stock in stocks:
        y = frame[_column(spec.quantity, stock)].to_numpy()[mask]
        ax.plot(t[mask], y, linewidth=0.6, label=f"stock {stock}")
    ax.set_xlabel("t (sweeps)")
    ax.set_ylabel(spec.quantity)
    ax.set_title(f"{spec.quantity} time series ({gamma_label})")
    ax.legend(loc="upper right")
    fig.tight_layout()
    return fig


def render(spec: PlotSpec) -> Path:
    """Render the spec to its output path; returns the path written."""
    if spec.out_path is None:
        raise FigureError("spec has no output path")
    gamma_label = load_gamma_label(spec.csv_path.parent)
    fig = build_figure(spec, gamma_label)
    try:
        fig.savefig(spec.out_path)
    finally:
        plt.close(fig)
    return spec.out_path
