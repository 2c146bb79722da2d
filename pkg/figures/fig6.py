"""Feedback performance vs the reaction threshold and the collection time:
ensemble-averaged Sigma_x(t) traces for two parameter pairs per panel."""

import argparse
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import matplotlib.pyplot as plt

from figspec import TC_LABEL, FigureSpec, load_csv, save

TRACE_COLUMNS = {"t", "mean_sigma_x"}


def _panel(ax, solid_path, dashed_path, solid_label, dashed_label, title):
    solid = load_csv(solid_path, TRACE_COLUMNS)
    dashed = load_csv(dashed_path, TRACE_COLUMNS)
    ax.plot(solid["t"], solid["mean_sigma_x"], "-", lw=0.9, label=solid_label)
    ax.plot(dashed["t"], dashed["mean_sigma_x"], "--", lw=0.9, label=dashed_label)
    ax.set(xlabel=TC_LABEL, ylabel=r"$\langle\Sigma_x\rangle$", ylim=(-0.3, 1.1), title=title)
    ax.legend(loc="lower right", fontsize=7)


def render(spec: FigureSpec) -> str:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4), constrained_layout=True)
    _panel(axes[0], spec.inputs["I0_T025"], spec.inputs["I1_T025"],
           "I = 0", "I = 1", "(a) thresholds at $T_f = 1/4$")
    _panel(axes[1], spec.inputs["I0_T025"], spec.inputs["I0_T4"],
           "$T_f = 1/4$", "$T_f = 4$", "(b) collection times at $I = 0$")
    return save(fig, spec.output)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--data", default=".")
    p.add_argument("--out", default="fig6.png")
    a = p.parse_args(argv)
    spec = FigureSpec("fig6", inputs={
        "I0_T025": os.path.join(a.data, "fig6_I0_T025", "feedback_trace.csv"),
        "I1_T025": os.path.join(a.data, "fig6_I1_T025", "feedback_trace.csv"),
        "I0_T4": os.path.join(a.data, "fig6_I0_T4", "feedback_trace.csv"),
    }, output=a.out)
    print(render(spec))
    return 0


if __name__ == "__main__":
    sys.exit(main())
