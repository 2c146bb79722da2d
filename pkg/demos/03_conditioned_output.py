"""The conditioned detector output does not depend on time.

Post-selecting trajectories on their final pole, the conditioned mean of
Sigma_z(t) rises from 0 to 1 on the T_c scale, but the conditioned mean of
the detector reading sits at 1 from the very first window, as if the qubit
knew its final state all along.
"""

import numpy as np

from cwlm import DetectorParams, QubitState, SimulationConfig, run_ensemble
from cwlm.stats import conditioned_averages

cfg = SimulationConfig(detector=DetectorParams(0.03), total_time=4.0,
                       sampling_interval=0.2, seed=3, n_trajectories=4000)
ens = run_ensemble(cfg, QubitState(1, 0, 0))
cond = conditioned_averages(ens)

print(f"kept {cond.n_plus}+{cond.n_minus} trajectories, excluded {cond.n_excluded}")
print("\n  t     <Sigma_z>_c     <v>_c")
for j, t in enumerate(cond.reading_times):
    if j % 4 == 0:
        print(f"  {t:4.1f}   {cond.mean_sigma_z_c[j + 1]:+.3f}        "
              f"{cond.mean_v_c[j]:+.3f} +- {cond.stderr_v_c[j]:.3f}")

dev = np.abs(cond.mean_v_c - 1.0) / cond.stderr_v_c
print(f"\nlargest deviation of <v>_c from 1: {dev.max():.2f} standard errors")
