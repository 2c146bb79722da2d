"""Monte Carlo simulation of continuous weak linear measurement of a qubit.

The measured qubit is monitored by a stream of weakly coupled detector qubits
that are projectively read out; the package generates single quantum
trajectories with their detector records, ensemble and post-selected
statistics, decision-time distributions, and a measurement-based feedback
loop, together with the closed-form results used to validate all of them.
"""

__version__ = "0.1.0"

from .qstate import QubitState, Rotation, apply_rotation, evolve_hamiltonian
from .detector import (
    ConfigurationError,
    DetectorParams,
    StepOutcome,
    ideality_check,
    mean_deflection,
    measure_step,
)
from .trajectory import (
    Ensemble,
    SimulationConfig,
    Trajectory,
    add_output_noise,
    run_decisions,
    run_ensemble,
    run_trajectory,
)

__all__ = [
    "QubitState", "Rotation", "apply_rotation", "evolve_hamiltonian",
    "ConfigurationError", "DetectorParams", "StepOutcome",
    "ideality_check", "mean_deflection", "measure_step",
    "Ensemble", "SimulationConfig", "Trajectory",
    "add_output_noise", "run_decisions", "run_ensemble", "run_trajectory",
    "__version__",
]
