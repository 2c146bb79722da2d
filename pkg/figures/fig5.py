"""A single quantum trajectory of Sigma_x under the threshold feedback."""

import argparse
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import matplotlib.pyplot as plt

from figspec import TC_LABEL, FigureSpec, load_csv, save

TRACE_COLUMNS = {"t", "mean_sigma_x", "mean_sigma_z"}


def render(spec: FigureSpec) -> str:
    df = load_csv(spec.inputs["trace"], TRACE_COLUMNS)
    fig, ax = plt.subplots(figsize=(7, 3.2), constrained_layout=True)
    ax.plot(df["t"], df["mean_sigma_x"], lw=0.7, color="#1f77b4")
    ax.axhline(1.0, color="0.4", lw=0.8, ls="--")
    ax.set(xlabel=TC_LABEL, ylabel=r"$\Sigma_x$", ylim=(-1.1, 1.2),
           title="trajectory under threshold feedback")
    return save(fig, spec.output)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--data", default=".")
    p.add_argument("--trace", help="feedback trace CSV")
    p.add_argument("--out", default="fig5.png")
    a = p.parse_args(argv)
    spec = FigureSpec("fig5", inputs={
        "trace": a.trace or os.path.join(a.data, "fig5", "feedback_trace.csv"),
    }, output=a.out)
    print(render(spec))
    return 0


if __name__ == "__main__":
    sys.exit(main())
