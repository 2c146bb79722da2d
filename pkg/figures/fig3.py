"""Final-state conditioned averages of Sigma_z and the detector reading, in
four panels (two sampling intervals x two ensemble sizes)."""

import argparse
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import matplotlib.pyplot as plt

from figspec import TC_LABEL, FigureSpec, load_csv, save

CONDITIONED_COLUMNS = {"t", "mean_sigma_z_c", "stderr_sigma_z_c", "mean_v_c", "stderr_v_c"}


def _panel(ax, csv_path, title):
    df = load_csv(csv_path, CONDITIONED_COLUMNS)
    ax.plot(df["t"], df["mean_sigma_z_c"], lw=1.2, label=r"$\langle\Sigma_z\rangle_c$")
    r = df.dropna(subset=["mean_v_c"])
    ax.errorbar(r["t"], r["mean_v_c"], yerr=r["stderr_v_c"], fmt="o", ms=2.5,
                lw=0.7, alpha=0.8, label=r"$\langle v\rangle_c$")
    ax.axhline(1.0, color="0.4", lw=0.8, ls="--")
    ax.set(xlabel=TC_LABEL, title=title)
    ax.legend(loc="lower right", fontsize=7)


def render(spec: FigureSpec) -> str:
    fig, axes = plt.subplots(2, 2, figsize=(9, 6.4), constrained_layout=True)
    _panel(axes[0, 0], spec.inputs["n100_T01"], "(a) 100 trajectories, sampling 0.1")
    _panel(axes[0, 1], spec.inputs["n500_T01"], "(b) 500 trajectories, sampling 0.1")
    _panel(axes[1, 0], spec.inputs["n100_T04"], "(c) 100 trajectories, sampling 0.4")
    _panel(axes[1, 1], spec.inputs["n500_T04"], "(d) 500 trajectories, sampling 0.4")
    return save(fig, spec.output)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--data", default=".")
    p.add_argument("--out", default="fig3.png")
    a = p.parse_args(argv)
    spec = FigureSpec("fig3", inputs={
        key: os.path.join(a.data, f"fig3_{key}", "conditioned.csv")
        for key in ("n100_T01", "n500_T01", "n100_T04", "n500_T04")
    }, output=a.out)
    print(render(spec))
    return 0


if __name__ == "__main__":
    sys.exit(main())
