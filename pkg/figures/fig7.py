"""Heatmap of the Monte Carlo feedback efficiency over (I, T_f)."""

import argparse
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import matplotlib.pyplot as plt
import numpy as np

from figspec import FigureSpec, FigureDataError, load_csv, save

SWEEP_COLUMNS = {"I", "T_f", "sigma_bar_x"}


def sweep_argmax(csv_path: str):
    """(I, T_f, value) of the largest efficiency in the sweep CSV."""
    df = load_csv(csv_path, SWEEP_COLUMNS)
    row = df.loc[df["sigma_bar_x"].idxmax()]
    return float(row["I"]), float(row["T_f"]), float(row["sigma_bar_x"])


def render(spec: FigureSpec):
    """Returns (output path, (I, T_f) of the maximum heatmap cell)."""
    df = load_csv(spec.inputs["sweep"], SWEEP_COLUMNS)
    pivot = df.pivot_table(index="T_f", columns="I", values="sigma_bar_x")
    if pivot.isna().any().any():
        raise FigureDataError("sweep CSV is not a complete (I, T_f) grid")
    Z = pivot.to_numpy()
    I_vals = pivot.columns.to_numpy(dtype=float)
    Tf_vals = pivot.index.to_numpy(dtype=float)

    fig, ax = plt.subplots(figsize=(6, 4), constrained_layout=True)
    mesh = ax.pcolormesh(I_vals, Tf_vals, Z, shading="nearest", cmap="viridis",
                         vmin=0.0, vmax=max(0.7, float(np.nanmax(Z))))
    fig.colorbar(mesh, ax=ax, label=r"$\bar\Sigma_x$")
    k = np.unravel_index(np.argmax(Z), Z.shape)
    best = (float(I_vals[k[1]]), float(Tf_vals[k[0]]))
    ax.plot(*best, "r*", ms=12)
    ax.annotate(f"max {Z[k]:.3f}", best, textcoords="offset points", xytext=(6, 6),
                color="w", fontsize=8)
    ax.set(xlabel="reaction threshold $I$", ylabel=r"collection time $T_f$  [$T_c$]")
    return save(fig, spec.output), best


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--data", default=".")
    p.add_argument("--sweep", help="feedback sweep CSV")
    p.add_argument("--out", default="fig7.png")
    a = p.parse_args(argv)
    spec = FigureSpec("fig7", inputs={
        "sweep": a.sweep or os.path.join(a.data, "fig7", "feedback_sweep.csv"),
    }, output=a.out)
    path, best = render(spec)
    print(f"{path}  (max cell at I={best[0]:g}, T_f={best[1]:g})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
