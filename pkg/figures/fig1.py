"""Single quantum trajectory and a 100-trajectory average of Sigma_z."""

import argparse
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import matplotlib.pyplot as plt

from figspec import TC_LABEL, FigureSpec, ensemble_mean, load_csv, save, trajectories_by_id

TRAJECTORY_COLUMNS = {"trajectory_id", "t", "sigma_x", "sigma_y", "sigma_z", "v_bar"}


def render(spec: FigureSpec) -> str:
    single = load_csv(spec.inputs["single"], TRAJECTORY_COLUMNS)
    ens = load_csv(spec.inputs["ensemble"], TRAJECTORY_COLUMNS)

    fig, (ax_a, ax_b) = plt.subplots(1, 2, figsize=(9, 3.4), constrained_layout=True)
    traj = next(trajectories_by_id(single))
    ax_a.plot(traj["t"], traj["sigma_z"], lw=0.6, color="#1f77b4")
    ax_a.set(xlabel=TC_LABEL, ylabel=r"$\Sigma_z$", ylim=(-1.1, 1.1),
             title="(a) single trajectory")

    t, mean_z = ensemble_mean(ens, "sigma_z")
    n = ens["trajectory_id"].nunique()
    ax_b.plot(t, mean_z, lw=1.0, color="#d62728")
    ax_b.axhline(0.0, color="0.5", lw=0.8, ls="--")
    ax_b.set(xlabel=TC_LABEL, ylabel=r"$\langle\Sigma_z\rangle$", ylim=(-1.1, 1.1),
             title=f"(b) average of {n} trajectories")
    return save(fig, spec.output)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--data", default=".", help="directory with the run subdirectories")
    p.add_argument("--single", help="single-trajectory CSV (full step grid)")
    p.add_argument("--ensemble", help="ensemble trajectory CSV")
    p.add_argument("--out", default="fig1.png")
    a = p.parse_args(argv)
    spec = FigureSpec("fig1", inputs={
        "single": a.single or os.path.join(a.data, "fig1_single", "trajectory.csv"),
        "ensemble": a.ensemble or os.path.join(a.data, "fig1_ensemble", "trajectory.csv"),
    }, output=a.out)
    print(render(spec))
    return 0


if __name__ == "__main__":
    sys.exit(main())
