"""Shared machinery for the figure scripts.

Each figure is rendered from CSV/JSON artifacts written by the simulation
CLI (schemas in ../FORMATS.md); no simulation code is imported here.  Every
loader validates the columns it needs and fails loudly on empty or
malformed files.  Rendering is deterministic: fixed figure geometry, fonts
and color cycle, no timestamps embedded.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

matplotlib.rcParams.update({
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.size": 9,
    "font.family": "DejaVu Sans",
    "axes.prop_cycle": matplotlib.cycler(color=["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]),
    "svg.hashsalt": "cwlm-figures",
})

TC_LABEL = r"$t$  [$T_c$]"


class FigureDataError(RuntimeError):
    """Missing, empty or schema-violating input file."""


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str                      # fig1 ... fig7
    inputs: dict = field(default_factory=dict)   # role -> path
    output: str = "figure.png"
    overlay_analytics: bool = True


def load_csv(path: str, required: set[str]) -> pd.DataFrame:
    if not os.path.exists(path):
        raise FigureDataError(f"missing input file: {path}")
    df = pd.read_csv(path)
    missing = required - set(df.columns)
    if missing:
        raise FigureDataError(f"{path}: missing columns {sorted(missing)}")
    if len(df) == 0:
        raise FigureDataError(f"{path}: no data rows")
    return df


def load_json(path: str, required: set[str]) -> dict:
    if not os.path.exists(path):
        raise FigureDataError(f"missing input file: {path}")
    with open(path) as f:
        obj = json.load(f)
    missing = required - set(obj)
    if missing:
        raise FigureDataError(f"{path}: missing keys {sorted(missing)}")
    return obj


def trajectories_by_id(df: pd.DataFrame):
    for _, group in df.groupby("trajectory_id", sort=True):
        yield group.sort_values("t")


def ensemble_mean(df: pd.DataFrame, column: str):
    """Mean of a trajectory CSV column over trajectories, on the common grid."""
    pivot = df.pivot_table(index="t", columns="trajectory_id", values=column)
    return pivot.index.to_numpy(), pivot.mean(axis=1).to_numpy()


def save(fig, path: str) -> str:
    """Deterministic write: suppress per-run metadata, fixed layout."""
    root, ext = os.path.splitext(path)
    meta = {"Date": None} if ext == ".svg" else {"Software": "cwlm-figures"}
    fig.savefig(path, metadata=meta)
    plt.close(fig)
    if not os.path.getsize(path):
        raise FigureDataError(f"wrote an empty image: {path}")
    return path
