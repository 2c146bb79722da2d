"""Closed-form results used as ground truth for the Monte Carlo.

For measurement in T_c units the ensemble-averaged density matrix obeys
d rho/dt = -(rho - Sigma_z rho Sigma_z), i.e. the superposition decays as
x(t) = e^{-2t} while the populations are frozen.  Augmenting the evolution
with a counting field chi for the time-integrated output gives componentwise

    d(diag_pm)/dt  = (-chi^2/8 +- i chi) diag_pm
    d(offdiag)/dt  = (-chi^2/8 - 2)      offdiag

whose Fourier transform over chi yields the distribution of the normalized
averaged output v: a mixture of Gaussians of mean +-1 and variance 1/(4T).
The conditional distribution given the eventual pole is a single Gaussian of
mean 1 at every time, which is the analytic face of the conditioned-output
constancy checked in the tests.

The feedback section maps the threshold rule (collect for T_f, rotate by
+-pi/4 when |v| > I) onto a scalar self-consistency equation

    rho_x = A + B rho_x,
    A = (erf((I+1) sqrt(2 T_f)) - erf((I-1) sqrt(2 T_f))) / 2,
    B = e^{-2 T_f} erf(I sqrt(2 T_f)),

with the cycle-averaged superposition Sigma_bar_x = rho_x (1 - e^{-2 T_f})/(2 T_f).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import erf

from .qstate import QubitState

_SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def bloch_decay(t: float) -> QubitState:
    """Ensemble-mean state of a measured equal-weight superposition at time t."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return QubitState(math.exp(-2.0 * t), 0.0, 0.0)


def damped_precession(t, omega: float = 1.0):
    """Ensemble mean (x(t), z(t)) with free evolution about y at rate omega.

    Solves xdot = 2 omega z - 2 x, zdot = -2 omega x with x(0)=1, z(0)=0;
    for omega = 1 this is x = e^{-t}(cos(sqrt3 t) - sin(sqrt3 t)/sqrt3),
    z = -(2/sqrt3) e^{-t} sin(sqrt3 t).  Valid for 2*omega > 1 (underdamped).
    """
    t = np.asarray(t, dtype=float)
    disc = 4.0 * omega**2 - 1.0
    if disc <= 0:
        raise ValueError("closed form implemented for the underdamped case 2*omega > 1")
    w = math.sqrt(disc)
    x = np.exp(-t) * (np.cos(w * t) - np.sin(w * t) / w)
    z = -(2.0 * omega / w) * np.exp(-t) * np.sin(w * t)
    return x, z


# -- counting-field (augmented) evolution -------------------------------------

@dataclass(frozen=True)
class AugmentedState:
    """Components of the counting-field density matrix rho(chi).

    diag_plus/diag_minus are the (complex) populations, offdiag_re/offdiag_im
    the real and imaginary parts of the upper off-diagonal element; both
    off-diagonal elements evolve with the same real factor so the pair is
    carried as one complex number.
    """

    diag_plus: complex = 0.5
    diag_minus: complex = 0.5
    offdiag_re: float = 0.5
    offdiag_im: float = 0.0

    @property
    def trace(self) -> complex:
        return self.diag_plus + self.diag_minus

    def matrix(self) -> np.ndarray:
        od = self.offdiag_re + 1j * self.offdiag_im
        return np.array([[self.diag_plus, od], [np.conj(od), self.diag_minus]], dtype=complex)


def equal_superposition_state() -> AugmentedState:
    return AugmentedState(0.5, 0.5, 0.5, 0.0)


def evolve_augmented(initial: AugmentedState, chi: float, duration: float) -> AugmentedState:
    """Closed-form componentwise evolution of rho(chi) for a time `duration`."""
    if duration < 0:
        raise ValueError("duration must be nonnegative")
    damp = math.exp(-chi**2 / 8.0 * duration)
    phase = complex(math.cos(chi * duration), math.sin(chi * duration))
    off = math.exp((-chi**2 / 8.0 - 2.0) * duration)
    return AugmentedState(
        diag_plus=initial.diag_plus * damp * phase,
        diag_minus=initial.diag_minus * damp * np.conj(phase),
        offdiag_re=initial.offdiag_re * off,
        offdiag_im=initial.offdiag_im * off,
    )


def evolve_augmented_rk4(initial: AugmentedState, chi: float, duration: float,
                         n_steps: int = 2000) -> AugmentedState:
    """Fixed-step 4th-order integration of the full matrix equation.

    Integrates d rho/dt = -chi^2/8 rho + i chi/2 (Sigma_z rho + rho Sigma_z)
    - (rho - Sigma_z rho Sigma_z) without using the componentwise solution;
    kept as the independent cross-check of :func:`evolve_augmented`.
    """
    rho = initial.matrix()

    def rhs(r):
        return (-(chi**2) / 8.0 * r
                + 0.5j * chi * (_SZ @ r + r @ _SZ)
                - (r - _SZ @ r @ _SZ))

    hstep = duration / n_steps
    for _ in range(n_steps):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * hstep * k1)
        k3 = rhs(rho + 0.5 * hstep * k2)
        k4 = rhs(rho + hstep * k3)
        rho = rho + (hstep / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return AugmentedState(rho[0, 0], rho[1, 1], float(rho[0, 1].real), float(rho[0, 1].imag))


# -- output distributions ------------------------------------------------------

def gaussian_reading_density(v, duration: float):
    """G(v) = sqrt(2T/pi) exp(-2 T v^2), the zero-mean reading density."""
    v = np.asarray(v, dtype=float)
    return np.sqrt(2.0 * duration / np.pi) * np.exp(-2.0 * duration * v**2)


@dataclass(frozen=True)
class OutputDistribution:
    """Densities of the normalized averaged output over an interval."""

    duration: float

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("duration must be positive")

    def g(self, v):
        return gaussian_reading_density(v, self.duration)

    def g_plus(self, v):
        return gaussian_reading_density(np.asarray(v) - 1.0, self.duration)

    def g_minus(self, v):
        return gaussian_reading_density(np.asarray(v) + 1.0, self.duration)

    def marginal(self, v):
        """Output density for an equal-weight superposition: (G+ + G-)/2."""
        return 0.5 * (self.g_plus(v) + self.g_minus(v))


def joint_output_density(t1: float, t2: float, v1, v2):
    """Joint density of readings over two consecutive intervals (t1 then t2),
    starting from the equal-weight superposition."""
    if t1 <= 0 or t2 <= 0:
        raise ValueError("interval durations must be positive")
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    pref = np.sqrt(t1 * t2) / np.pi
    plus = np.exp(-2.0 * (v1 - 1.0) ** 2 * t1) * np.exp(-2.0 * (v2 - 1.0) ** 2 * t2)
    minus = np.exp(-2.0 * (v1 + 1.0) ** 2 * t1) * np.exp(-2.0 * (v2 + 1.0) ** 2 * t2)
    return pref * (plus + minus)


def conditional_output_density(t1: float, v1):
    """Density of the reading over (0, t1) given the qubit ends on the +1 pole:
    Gaussian with mean 1 and variance 1/(4 t1) at every t1."""
    if t1 <= 0:
        raise ValueError("t1 must be positive")
    v1 = np.asarray(v1, dtype=float)
    return np.sqrt(2.0 * t1 / np.pi) * np.exp(-2.0 * (v1 - 1.0) ** 2 * t1)


def output_density_fourier(duration: float, v, initial: AugmentedState | None = None,
                           n_chi: int = 4001):
    """Output density by numerical Fourier inversion of the augmented trace,

        P(v) = (T / 2 pi) Integral dchi e^{-i chi v T} Tr rho(chi, T),

    evaluated on a uniform chi grid cut where the Gaussian envelope falls
    below 1e-12.  Independent route to the closed-form densities.
    """
    if initial is None:
        initial = equal_superposition_state()
    v = np.atleast_1d(np.asarray(v, dtype=float))
    chi_max = math.sqrt(8.0 * 12.0 * math.log(10.0) / duration)
    # resolve the e^{-i chi v T} oscillation: >= 8 points per period at |v|+2
    vmax = float(np.max(np.abs(v))) + 2.0
    need = int(math.ceil(2.0 * chi_max * duration * vmax * 8.0 / (2.0 * math.pi))) + 1
    n = max(n_chi, need)
    chi = np.linspace(-chi_max, chi_max, n)
    tr = np.array([evolve_augmented(initial, c, duration).trace for c in chi])
    phase = np.exp(-1j * np.outer(v, chi) * duration)
    integral = np.trapezoid(phase * tr[None, :], chi, axis=1)
    out = (duration / (2.0 * math.pi)) * integral.real
    return out if out.size > 1 else float(out[0])


def joint_output_density_fourier(t1: float, t2: float, v1: float, v2: float,
                                 initial: AugmentedState | None = None) -> float:
    """Two-interval analogue of :func:`output_density_fourier`.

    The trace after chi1 on (0,t1) and chi2 on (t1,t1+t2) splits into the two
    pole branches, each factorizing over the intervals, so the double Fourier
    integral reduces to products of 1d inversions per branch.
    """
    if initial is None:
        initial = equal_superposition_state()
    total = 0.0
    for sign, weight in ((+1, initial.diag_plus), (-1, initial.diag_minus)):
        w = float(np.real(weight))
        if w == 0.0:
            continue
        pole = AugmentedState(diag_plus=1.0 if sign > 0 else 0.0,
                              diag_minus=1.0 if sign < 0 else 0.0,
                              offdiag_re=0.0, offdiag_im=0.0)
        total += (w * output_density_fourier(t1, v1, initial=pole)
                  * output_density_fourier(t2, v2, initial=pole))
    return total


# -- feedback analytics --------------------------------------------------------

class FeedbackAnalytics(NamedTuple):
    A: float
    B: float
    rho_x: float
    sigma_bar_x: float


def feedback_efficiency(I: float, T_f: float) -> FeedbackAnalytics:
    """Steady-state analytics of the threshold feedback rule.

    Returns (A, B, rho_x, sigma_bar_x): rho_x = A/(1-B) is the x projection
    right after the correction step and sigma_bar_x its average over one
    collection cycle.
    """
    if I < 0:
        raise ValueError("threshold I must be nonnegative")
    if T_f <= 0:
        raise ValueError("collection time T_f must be positive")
    s = math.sqrt(2.0 * T_f)
    A = 0.5 * (erf((I + 1.0) * s) - erf((I - 1.0) * s))
    B = math.exp(-2.0 * T_f) * erf(I * s)
    assert B < 1.0
    rho_x = A / (1.0 - B)
    sigma_bar_x = rho_x * (1.0 - math.exp(-2.0 * T_f)) / (2.0 * T_f)
    return FeedbackAnalytics(float(A), float(B), float(rho_x), float(sigma_bar_x))


def efficiency_landscape(I_grid, Tf_grid) -> np.ndarray:
    """sigma_bar_x on the outer product of the two grids, shape (len(I), len(Tf))."""
    I = np.asarray(I_grid, dtype=float)[:, None]
    Tf = np.asarray(Tf_grid, dtype=float)[None, :]
    if np.any(I < 0) or np.any(Tf <= 0):
        raise ValueError("grids must satisfy I >= 0, T_f > 0")
    s = np.sqrt(2.0 * Tf)
    A = 0.5 * (erf((I + 1.0) * s) - erf((I - 1.0) * s))
    B = np.exp(-2.0 * Tf) * erf(I * s)
    rho_x = A / (1.0 - B)
    return rho_x * (1.0 - np.exp(-2.0 * Tf)) / (2.0 * Tf)


def optimal_feedback(I_range=(0.0, 2.0), Tf_range=(0.01, 1.0), resolution: float = 0.01):
    """Grid maximum of the efficiency at the given resolution.

    Returns (I_star, Tf_star, sigma_bar_x_star).  The landscape is a broad
    plateau near the optimum, so the argmax location is only meaningful at
    the grid resolution while the value is sharp.
    """
    I_grid = np.arange(I_range[0], I_range[1] + resolution / 2, resolution)
    Tf_grid = np.arange(Tf_range[0], Tf_range[1] + resolution / 2, resolution)
    land = efficiency_landscape(I_grid, Tf_grid)
    i, j = np.unravel_index(np.argmax(land), land.shape)
    return float(I_grid[i]), float(Tf_grid[j]), float(land[i, j])
