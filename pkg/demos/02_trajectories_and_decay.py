"""Quantum trajectories and the e^{-2t} decay of the superposition.

A single trajectory wanders and sticks to a pole; the ensemble average of
Sigma_z stays near zero while Sigma_x decays at rate 2 in T_c units,
matching the closed form.
"""

import numpy as np

from cwlm import DetectorParams, QubitState, SimulationConfig, run_ensemble, run_trajectory
from cwlm.oracle import bloch_decay

cfg = SimulationConfig(detector=DetectorParams(0.03), total_time=4.0,
                       sampling_interval=0.1, seed=11, n_trajectories=2000)

traj = run_trajectory(cfg, QubitState(1, 0, 0), stream_id=0)
print("single trajectory, Sigma_z at t = 0, 1, 2, 3, 4:")
idx = [np.argmin(np.abs(traj.times - t)) for t in (0, 1, 2, 3, 4)]
print("  " + "  ".join(f"{traj.sigma_z[j]:+.3f}" for j in idx))
print(f"  final sign: {traj.final_sign:+d}")

ens = run_ensemble(cfg, QubitState(1, 0, 0))
print(f"\nensemble of {len(ens)}: <Sigma_x(t)> vs e^(-2t)")
for t in (0.5, 1.0, 2.0):
    j = np.argmin(np.abs(ens.times - t))
    mc = ens.sigma_x[:, j].mean()
    se = ens.sigma_x[:, j].std(ddof=1) / np.sqrt(len(ens))
    print(f"  t = {t:.1f}: {mc:.4f} +- {se:.4f}  (exact {bloch_decay(t).bloch_x:.4f})")

late = ens.sigma_z[:, -1]
print(f"\n<Sigma_z> at t = 4: {late.mean():+.4f} (symmetric start keeps it near 0)")
print(f"fraction stuck at |Sigma_z| > 0.999: {np.mean(np.abs(late) > 0.999):.3f}")
