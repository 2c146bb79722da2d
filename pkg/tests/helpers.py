"""Independent brute-force oracles shared by the test modules.

Everything here is deliberately written against the bare matrix mechanics
(scipy expm, explicit tensor products, quadrature) rather than the package's
own update rules, so agreement is a real cross-check.
"""

import numpy as np
from scipy.linalg import expm

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"x": SX, "y": SY, "z": SZ}
KET_X = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)


def bloch_to_rho(x, y, z):
    return 0.5 * (np.eye(2, dtype=complex) + x * SX + y * SY + z * SZ)


def rho_to_bloch(rho):
    return tuple(float(np.real(np.trace(PAULI[a] @ rho))) for a in "xyz")


def rotation_oracle(x, y, z, axis, alpha):
    """U rho U^dag with U = expm(-i alpha sigma_axis); the pinned convention."""
    u = expm(-1j * alpha * PAULI[axis])
    return rho_to_bloch(u @ bloch_to_rho(x, y, z) @ u.conj().T)


def measure_oracle(rho_a, theta, reading):
    """Full two-qubit step: couple via theta * sigma_z (x) sigma_y, then project
    the detector along z.  reading=+1 is the branch correlated with the +z pole
    of the measured qubit.  Returns (probability, post rho_a)."""
    rho = np.kron(rho_a, np.outer(KET_X, KET_X.conj()))
    u = expm(-1j * theta * np.kron(SZ, SY))
    rho = u @ rho @ u.conj().T
    ket = np.array([0.0, 1.0]) if reading == 1 else np.array([1.0, 0.0])
    proj = np.kron(np.eye(2), np.outer(ket, ket))
    sub = proj @ rho @ proj
    # partial trace over the detector
    sub = sub.reshape(2, 2, 2, 2)
    rho_post = np.einsum("ikjk->ij", sub)
    prob = float(np.real(np.trace(rho_post)))
    return prob, rho_post / prob


def random_bloch(rng, n, pure=False):
    """n Bloch vectors uniform in the ball (or on the sphere when pure)."""
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    if not pure:
        v *= rng.random(n)[:, None] ** (1.0 / 3.0)
    return v


def sample_decision_model(a, b, n, rng):
    """Inverse-CDF samples of c exp(-a/t - b t) on a fine quadrature grid."""
    tp = np.sqrt(a / b)
    grid = np.linspace(tp / 50.0, tp + 60.0 / b, 60000)
    pdf = np.exp(-a / grid - b * grid)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    return np.interp(rng.random(n), cdf, grid)
