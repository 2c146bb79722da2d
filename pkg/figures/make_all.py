"""Render every figure from a data directory of CLI artifacts.

Expects the per-run subdirectories documented in figures/README.md; figures
whose inputs are missing are reported and skipped unless --strict.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import fig1, fig2, fig3, fig4, fig5, fig6, fig7  # noqa: E401
from figspec import FigureDataError

FIGURES = {
    "fig1": fig1.main,
    "fig2": fig2.main,
    "fig3": fig3.main,
    "fig4": fig4.main,
    "fig5": fig5.main,
    "fig6": fig6.main,
    "fig7": fig7.main,
}


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--data", default=".", help="directory with the run subdirectories")
    p.add_argument("--out", default=".", help="directory for the images")
    p.add_argument("--only", help="comma list of figure ids")
    p.add_argument("--strict", action="store_true", help="fail on the first missing input")
    a = p.parse_args(argv)
    os.makedirs(a.out, exist_ok=True)
    wanted = a.only.split(",") if a.only else list(FIGURES)
    failures = 0
    for fid in wanted:
        out_path = os.path.join(a.out, f"{fid}.png")
        try:
            FIGURES[fid](["--data", a.data, "--out", out_path])
        except FigureDataError as exc:
            failures += 1
            print(f"{fid}: SKIPPED ({exc})", file=sys.stderr)
            if a.strict:
                return 1
    return 1 if failures == len(wanted) else 0


if __name__ == "__main__":
    sys.exit(main())
