"""Threshold feedback: keep the qubit in the superposition while measuring.

Collect the output for T_f, rotate back by sgn(v) pi/4 when |v| exceeds the
reaction threshold I. The cycle-averaged Sigma_x measures how well the
superposition survives; the closed-form landscape puts the optimum near
(I, T_f) = (0.9, 0.2) at efficiency 0.66.
"""

from cwlm import DetectorParams, SimulationConfig
from cwlm.feedback import FeedbackConfig, optimize, run_feedback
from cwlm.oracle import feedback_efficiency


def make_cfg(I, Tf, n=300, cycles=60, seed=42):
    base = SimulationConfig(detector=DetectorParams(0.03), total_time=cycles * Tf,
                            sampling_interval=Tf, seed=seed, n_trajectories=n)
    return FeedbackConfig(base=base, threshold=I, collection_time=Tf, n_cycles=cycles)


print("operating point (I, T_f) = (0.9, 0.2):")
res = run_feedback(make_cfg(0.9, 0.2))
fa = feedback_efficiency(0.9, 0.2)
print(f"  MC     : sigma_bar_x = {res.sigma_bar_x:.4f} +- {res.stderr:.4f}, "
      f"corrections fire in {res.correction_rate:.0%} of cycles")
print(f"  closed : sigma_bar_x = {fa.sigma_bar_x:.4f}, rho_x = {fa.rho_x:.4f}")

print("\nit is better to do nothing than wrong (T_f = 1/4):")
for I in (0.0, 1.0):
    r = run_feedback(make_cfg(I, 0.25))
    print(f"  I = {I:.0f}: sigma_bar_x = {r.sigma_bar_x:.4f} +- {r.stderr:.4f}")

print("\noptimizing the closed-form objective from (0.5, 0.5):")
opt = optimize(lambda I, Tf: feedback_efficiency(I, Tf).sigma_bar_x, (0.5, 0.5))
print(f"  -> (I, T_f) = ({opt.threshold:.3f}, {opt.collection_time:.3f}), "
      f"value {opt.value:.4f} after {opt.n_evaluations} evaluations")
