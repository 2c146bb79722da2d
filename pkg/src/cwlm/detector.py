"""One elementary weak-measurement step with a detector qubit.

The detector qubit starts in the +x eigenstate, couples to the measured qubit
through M Sigma_z (x) sigma_y for a step of duration dt, and is then read out
projectively along z.  With theta = M*dt the exact per-step rules in Bloch
form are, writing s2 = sin(2 theta), c2 = cos(2 theta):

    P(reading = +1) = (1 + z s2) / 2

    after reading sigma = +-1:
        z' = (z + sigma s2) / (1 + sigma z s2)
        x' = x c2 / (1 + sigma z s2)
        y' = y c2 / (1 + sigma z s2)

These follow from projecting the coupled two-qubit state; the module also
carries the general matrix form of that projection (`measure_step_matrix`)
which the tests use as an independent cross-check.  The update is an exact
martingale in z (the two-branch average of z' equals z) and multiplies the
transverse components by c2 on average, which integrates to the e^{-2t}
coherence decay in T_c units.

Everything public works in units of the characteristic measurement time
T_c = 1/(M^2 dt); consistency then fixes dt = theta^2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .qstate import QubitState

THETA_MAX = 0.1
THETA_WARN = 0.05


class ConfigurationError(ValueError):
    """Invalid simulation or detector configuration."""


@dataclass(frozen=True)
class DetectorParams:
    """Measurement strength per step, theta = M*dt, with dt = theta^2 in T_c units."""

    theta: float
    dt: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not 0.0 < self.theta <= THETA_MAX:
            raise ConfigurationError(
                f"theta must be in (0, {THETA_MAX}] for the linear-detector regime, got {self.theta}"
            )
        if self.theta > THETA_WARN:
            warnings.warn(
                f"theta = {self.theta} > {THETA_WARN}: per-step backaction is no longer small",
                stacklevel=2,
            )
        if self.dt is None:
            object.__setattr__(self, "dt", self.theta**2)
        elif not math.isclose(self.dt, self.theta**2, rel_tol=1e-9):
            raise ConfigurationError(
                f"dt = {self.dt} inconsistent with T_c units (theta^2 = {self.theta**2})"
            )

    @property
    def sin2theta(self) -> float:
        return math.sin(2.0 * self.theta)

    @property
    def cos2theta(self) -> float:
        return math.cos(2.0 * self.theta)


@dataclass(frozen=True)
class StepOutcome:
    """A single projective detector reading and the conditional post-state."""

    reading: int
    post_state: QubitState
    probability: float


def apply_readings(x, y, z, sigma, s2, c2):
    """Vectorized conditional update for given readings sigma = +-1.

    Arguments may be scalars or equal-shaped arrays; returns (x', y', z').
    This is the hot kernel shared by the scalar API and the trajectory engine.
    """
    denom = 1.0 + sigma * z * s2
    return x * c2 / denom, y * c2 / denom, (z + sigma * s2) / denom


def measure_step(state: QubitState, p: DetectorParams, rng: np.random.Generator) -> StepOutcome:
    """Draw one detector reading and return it with the updated state."""
    s2, c2 = p.sin2theta, p.cos2theta
    p_plus = 0.5 * (1.0 + state.bloch_z * s2)
    if rng.random() < p_plus:
        sigma, prob = 1, p_plus
    else:
        sigma, prob = -1, 1.0 - p_plus
    x, y, z = apply_readings(state.bloch_x, state.bloch_y, state.bloch_z, sigma, s2, c2)
    return StepOutcome(sigma, QubitState(x, y, z), prob)


def reading_probabilities(state: QubitState, p: DetectorParams) -> tuple[float, float]:
    """(P(+1), P(-1)) for the next reading."""
    p_plus = 0.5 * (1.0 + state.bloch_z * p.sin2theta)
    return p_plus, 1.0 - p_plus


def mean_deflection(p: DetectorParams, state: QubitState) -> float:
    """Exact single-step mean reading, sin(2 theta) * z (2 theta * z to first order)."""
    return p.sin2theta * state.bloch_z


def ideality_check(p: DetectorParams, extra_output_power: float = 0.0):
    """Output noise, input noise and susceptibility (S_out, S_in, a) of the setup.

    For the bare detector S_out = dt, S_in = M^2 dt = theta^2/dt and a = 2 theta,
    so S_out * S_in equals a^2/4 identically: the simulated detector is ideal.
    Adding white output noise of power `extra_output_power` (in normalized
    v units, T_c time units) raises S_out and makes the product strictly larger.
    """
    if extra_output_power < 0:
        raise ConfigurationError("extra_output_power must be nonnegative")
    s_out = p.dt + extra_output_power * p.sin2theta**2
    s_in = p.theta**2 / p.dt
    a = 2.0 * p.theta
    return s_out, s_in, a


# -- general matrix form, used as an equivalence oracle in the tests --------

def _detector_kraus(theta: float) -> dict[int, np.ndarray]:
    """Projection amplitudes <i| exp(-i theta_n sigma_y) |x> for readings i=+-1.

    Returns, per reading, the 2x2 diagonal matrix of amplitudes over the
    measured system's z eigenbasis (eigenvalues M_+- = +-M, theta_n = +-theta).
    """
    c, s = math.cos(theta), math.sin(theta)
    amp = {+1: np.diag([(c + s), (c - s)]) / math.sqrt(2.0),
           -1: np.diag([(c - s), (c + s)]) / math.sqrt(2.0)}
    return amp


def measure_step_matrix(rho: np.ndarray, theta: float, reading: int):
    """Conditional update of a 2x2 density matrix in the general matrix form.

    Returns (probability of `reading`, post-measurement rho).  Equivalent to
    the Bloch-form update; kept as the reference implementation.
    """
    amp = _detector_kraus(theta)[reading]
    unnorm = amp @ rho @ amp.conj().T
    prob = float(np.real(np.trace(unnorm)))
    return prob, unnorm / prob
