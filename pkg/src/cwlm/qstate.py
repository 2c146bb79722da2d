"""Two-level quantum states in Bloch form and the unitaries acting on them.

A qubit density matrix is parameterized by its real Bloch vector (x, y, z):

    rho = (1 + x Sigma_x + y Sigma_y + z Sigma_z) / 2

which keeps the trace equal to one by construction and makes positivity a
single inequality, x^2 + y^2 + z^2 <= 1.  All operations in this module are
pure functions on immutable values, so they are safe to call from any number
of concurrent workers.

Rotation convention: U(alpha) about the y axis maps the z=+1 pole onto the
x=+1 equator point for alpha = +pi/4.  Equivalently, a rotation by alpha
turns the Bloch vector by the angle 2*alpha about the axis, carrying
z -> x -> -z -> -x for the y axis (and cyclically y -> z, x -> y for the
x and z axes).  Every trigonometric sign in this package follows from this
one convention; the test suite pins it against a brute-force 2x2 matrix
product once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_NORM_SLACK = 1e-12

# cyclic pairs: rotating about `axis` maps `b` toward `c`
_AXIS_CYCLE = {"x": ("y", "z"), "y": ("z", "x"), "z": ("x", "y")}

_SIGMA = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


@dataclass(frozen=True)
class QubitState:
    """Bloch vector of a two-level system, rho = (1 + r . Sigma)/2."""

    bloch_x: float = 0.0
    bloch_y: float = 0.0
    bloch_z: float = 0.0

    def __post_init__(self):
        n2 = self.bloch_x**2 + self.bloch_y**2 + self.bloch_z**2
        if n2 > 1.0 + _NORM_SLACK:
            raise ValueError(f"Bloch vector norm {math.sqrt(n2):.6f} exceeds 1")

    @property
    def norm(self) -> float:
        return math.sqrt(self.bloch_x**2 + self.bloch_y**2 + self.bloch_z**2)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.bloch_x, self.bloch_y, self.bloch_z)

    def to_density_matrix(self) -> np.ndarray:
        """The 2x2 complex density matrix in the Sigma_z eigenbasis."""
        rho = 0.5 * (
            np.eye(2, dtype=complex)
            + self.bloch_x * _SIGMA["x"]
            + self.bloch_y * _SIGMA["y"]
            + self.bloch_z * _SIGMA["z"]
        )
        return rho


def from_density_matrix(rho: np.ndarray) -> QubitState:
    """Inverse of :meth:`QubitState.to_density_matrix` (imaginary parts of the
    Pauli traces are numerical noise and are dropped)."""
    return QubitState(
        float(np.real(np.trace(_SIGMA["x"] @ rho))),
        float(np.real(np.trace(_SIGMA["y"] @ rho))),
        float(np.real(np.trace(_SIGMA["z"] @ rho))),
    )


@dataclass(frozen=True)
class Rotation:
    """Unitary rotation by angle alpha (radians) about a Bloch axis.

    Acts on the Bloch vector as an orthogonal rotation by 2*alpha.
    """

    angle: float
    axis: str = "y"

    def __post_init__(self):
        if self.axis not in _AXIS_CYCLE:
            raise ValueError(f"axis must be one of x, y, z, got {self.axis!r}")


def _rotate(vec: tuple[float, float, float], axis: str, bloch_angle: float):
    c = math.cos(bloch_angle)
    s = math.sin(bloch_angle)
    comps = dict(zip("xyz", vec))
    b, cc = _AXIS_CYCLE[axis]
    vb, vc = comps[b], comps[cc]
    comps[b] = c * vb - s * vc
    comps[cc] = c * vc + s * vb
    return comps["x"], comps["y"], comps["z"]


def apply_rotation(state: QubitState, r: Rotation) -> QubitState:
    """Apply U(alpha) = rotation of the Bloch vector by 2*alpha about r.axis.

    Exactly norm preserving: the Bloch vector is turned, never rescaled.
    """
    x, y, z = _rotate(state.as_tuple(), r.axis, 2.0 * r.angle)
    return QubitState(x, y, z)


def evolve_hamiltonian(state: QubitState, axis: str, omega: float, dt: float) -> QubitState:
    """Free evolution under H = omega * Sigma_axis for a duration dt.

    Rotates the Bloch vector by 2*omega*dt about the axis, with the same sign
    convention as :func:`apply_rotation` (alpha = omega*dt).  Times are in
    units of the measurement time T_c.
    """
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    if axis not in _AXIS_CYCLE:
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}")
    x, y, z = _rotate(state.as_tuple(), axis, 2.0 * omega * dt)
    return QubitState(x, y, z)
