"""Precessing-qubit ensemble averages and detector readings for two sampling
intervals, with the damped-precession curve overlaid."""

import argparse
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import matplotlib.pyplot as plt

from figspec import TC_LABEL, FigureSpec, ensemble_mean, load_csv, save

TRAJECTORY_COLUMNS = {"trajectory_id", "t", "sigma_z", "v_bar"}


def _panel(ax, csv_path, oracle, title):
    df = load_csv(csv_path, TRAJECTORY_COLUMNS)
    t, mean_z = ensemble_mean(df, "sigma_z")
    ax.plot(t, mean_z, lw=1.0, label=r"$\langle\Sigma_z\rangle$ (MC)")
    readings = df.dropna(subset=["v_bar"])
    tv = readings.groupby("t")["v_bar"].mean()
    ax.plot(tv.index, tv.to_numpy(), "o", ms=3, alpha=0.8, label=r"$\langle\bar v\rangle$")
    if oracle is not None:
        ax.plot(oracle["t"], oracle["sigma_z"], "k-", lw=1.2, label="analytic")
    ax.set(xlabel=TC_LABEL, title=title)
    ax.legend(loc="upper right", fontsize=7)


def render(spec: FigureSpec) -> str:
    oracle = None
    if spec.overlay_analytics:
        oracle = load_csv(spec.inputs["oracle"], {"t", "sigma_x", "sigma_z"})
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4), constrained_layout=True)
    _panel(axes[0], spec.inputs["sampling_01"], oracle, "(a) sampling 0.1")
    _panel(axes[1], spec.inputs["sampling_04"], oracle, "(b) sampling 0.4")
    return save(fig, spec.output)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--data", default=".")
    p.add_argument("--out", default="fig2.png")
    p.add_argument("--no-overlay", action="store_true")
    a = p.parse_args(argv)
    spec = FigureSpec("fig2", inputs={
        "sampling_01": os.path.join(a.data, "fig2_T01", "trajectory.csv"),
        "sampling_04": os.path.join(a.data, "fig2_T04", "trajectory.csv"),
        "oracle": os.path.join(a.data, "oracle_precession", "oracle_precession.csv"),
    }, output=a.out, overlay_analytics=not a.no_overlay)
    print(render(spec))
    return 0


if __name__ == "__main__":
    sys.exit(main())
