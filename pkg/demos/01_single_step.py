"""One weak-measurement step, taken apart.

The detector qubit starts along +x, couples to the measured qubit for one
step of strength theta = M*dt, and is read out along z. Repeating the step
from the same state shows the two possible readings with their exact
probabilities and conditional post-states.
"""

import numpy as np

from cwlm import DetectorParams, QubitState, ideality_check, mean_deflection, measure_step

params = DetectorParams(theta=0.03)
print(f"theta = {params.theta}, dt = {params.dt} (T_c units)")

state = QubitState(1.0, 0.0, 0.0)  # equal-weight superposition
rng = np.random.default_rng(1)

print("\nfive steps from the superposition (readings are fair coin flips):")
for _ in range(5):
    out = measure_step(state, params, rng)
    x, y, z = out.post_state.as_tuple()
    print(f"  reading {out.reading:+d} (p = {out.probability:.3f})"
          f" -> state ({x:+.4f}, {y:+.4f}, {z:+.4f})")

print("\nmean reading is sin(2 theta) * z:")
for z in (1.0, 0.5, 0.0, -1.0):
    print(f"  z = {z:+.1f}: {mean_deflection(params, QubitState(0, 0, z)):+.5f}")

s_out, s_in, a = ideality_check(params)
print(f"\nideality: S_out*S_in = {s_out * s_in:.3e} = a^2/4 = {a * a / 4:.3e}"
      " (an ideal detector)")
s_out, s_in, a = ideality_check(params, extra_output_power=0.25)
print(f"with extra output noise the product grows: {s_out * s_in:.3e} > {a * a / 4:.3e}")
