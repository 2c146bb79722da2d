"""Decision-time histograms with their c exp(-a/t - b t) fit overlays, one
panel per threshold in a 2 x 4 grid."""

import argparse
import math
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import matplotlib.pyplot as plt
import numpy as np

from figspec import TC_LABEL, FigureSpec, load_csv, load_json, save

HIST_COLUMNS = {"bin_left", "bin_right", "count", "density"}
FIT_KEYS = {"h", "a", "b", "c", "t_p"}
DEFAULT_TAGS = ["1e-1", "1e-2", "1e-3", "1e-4", "1e-5", "1e-6", "1e-7", "1e-8"]


def _panel(ax, hist_path, fit_path, label):
    hist = load_csv(hist_path, HIST_COLUMNS)
    fit = load_json(fit_path, FIT_KEYS)
    centers = 0.5 * (hist["bin_left"] + hist["bin_right"])
    width = (hist["bin_right"] - hist["bin_left"]).iloc[0]
    ax.bar(centers, hist["density"], width=width, color="#9ecae1", edgecolor="none")
    t_hi = float(hist["bin_right"].iloc[-1])
    t = np.linspace(max(1e-3, fit["t_p"] / 20.0), t_hi, 400)
    ax.plot(t, fit["c"] * np.exp(-fit["a"] / t - fit["b"] * t), "-", color="#d62728", lw=1.2)
    ax.set(title=f"h = {label}", xlabel=TC_LABEL)
    ax.set_xlim(0, t_hi)


def render(spec: FigureSpec) -> str:
    tags = spec.inputs["tags"]
    rows = 2 if len(tags) > 4 else 1
    cols = math.ceil(len(tags) / rows)
    fig, axes = plt.subplots(rows, cols, figsize=(3.0 * cols, 2.8 * rows),
                             constrained_layout=True)
    axes = np.atleast_1d(axes).ravel()
    data = spec.inputs["data"]
    for ax, tag in zip(axes, tags):
        _panel(ax,
               os.path.join(data, f"decision_h{tag}_hist.csv"),
               os.path.join(data, f"decision_h{tag}_fit.json"),
               tag)
    for ax in axes[len(tags):]:
        ax.set_axis_off()
    return save(fig, spec.output)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--data", default=".",
                   help="directory with decision_h<tag>_hist.csv / _fit.json")
    p.add_argument("--h-tags", default=",".join(DEFAULT_TAGS),
                   help="comma list of threshold tags")
    p.add_argument("--out", default="fig4.png")
    a = p.parse_args(argv)
    spec = FigureSpec("fig4", inputs={"data": a.data, "tags": a.h_tags.split(",")},
                      output=a.out)
    print(render(spec))
    return 0


if __name__ == "__main__":
    sys.exit(main())
