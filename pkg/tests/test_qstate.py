import math

import numpy as np
import pytest

from cwlm.qstate import QubitState, Rotation, apply_rotation, evolve_hamiltonian, from_density_matrix

from helpers import random_bloch, rotation_oracle


def test_pole_rotated_to_equator():
    # the pi/4 correction maps a pole exactly onto the equal-weight superposition
    out = apply_rotation(QubitState(0, 0, 1), Rotation(math.pi / 4, "y"))
    assert out.as_tuple() == pytest.approx((1.0, 0.0, 0.0), abs=1e-15)


def test_zero_angle_is_identity():
    s = QubitState(0.3, -0.2, 0.5)
    assert apply_rotation(s, Rotation(0.0, "y")) == s


def test_eighth_turn_from_equator():
    out = apply_rotation(QubitState(1, 0, 0), Rotation(math.pi / 8, "y"))
    r = 1 / math.sqrt(2)
    assert out.as_tuple() == pytest.approx((r, 0.0, -r), abs=1e-15)


def test_rotation_matches_matrix_oracle():
    rng = np.random.default_rng(42)
    vs = random_bloch(rng, 2000)
    alphas = rng.uniform(-2 * math.pi, 2 * math.pi, 2000)
    axes = rng.choice(["x", "y", "z"], 2000)
    for (x, y, z), alpha, axis in zip(vs, alphas, axes):
        got = apply_rotation(QubitState(x, y, z), Rotation(alpha, axis))
        want = rotation_oracle(x, y, z, axis, alpha)
        assert got.as_tuple() == pytest.approx(want, abs=1e-12)


def test_rotation_round_trip():
    rng = np.random.default_rng(3)
    for x, y, z in random_bloch(rng, 200):
        s = QubitState(x, y, z)
        alpha = rng.uniform(-3, 3)
        axis = rng.choice(["x", "y", "z"])
        back = apply_rotation(apply_rotation(s, Rotation(alpha, axis)), Rotation(-alpha, axis))
        assert back.as_tuple() == pytest.approx(s.as_tuple(), abs=1e-12)


def test_rotations_compose_by_angle_addition():
    rng = np.random.default_rng(4)
    for x, y, z in random_bloch(rng, 100):
        s = QubitState(x, y, z)
        a1, a2 = rng.uniform(-2, 2, 2)
        two = apply_rotation(apply_rotation(s, Rotation(a1, "x")), Rotation(a2, "x"))
        one = apply_rotation(s, Rotation(a1 + a2, "x"))
        assert two.as_tuple() == pytest.approx(one.as_tuple(), abs=1e-12)


def test_norm_exactly_invariant():
    rng = np.random.default_rng(5)
    for x, y, z in random_bloch(rng, 200):
        s = QubitState(x, y, z)
        r = apply_rotation(s, Rotation(rng.uniform(-3, 3), rng.choice(["x", "y", "z"])))
        assert r.norm == pytest.approx(s.norm, abs=1e-13)


def test_hamiltonian_zero_rate_is_identity():
    s = QubitState(0.1, 0.2, 0.3)
    assert evolve_hamiltonian(s, "y", 0.0, 0.5) == s


def test_hamiltonian_quarter_turn():
    # 2*omega*dt = pi/2 about y carries the +x equator point to the -z pole
    out = evolve_hamiltonian(QubitState(1, 0, 0), "y", 1.0, math.pi / 4)
    assert out.as_tuple() == pytest.approx((0.0, 0.0, -1.0), abs=1e-15)


def test_hamiltonian_matches_rotation_convention():
    rng = np.random.default_rng(6)
    for x, y, z in random_bloch(rng, 100):
        omega, dt = rng.uniform(0.1, 3.0), rng.uniform(0.0, 1.0)
        axis = rng.choice(["x", "y", "z"])
        via_h = evolve_hamiltonian(QubitState(x, y, z), axis, omega, dt)
        via_r = rotation_oracle(x, y, z, axis, omega * dt)
        assert via_h.as_tuple() == pytest.approx(via_r, abs=1e-12)


def test_invalid_bloch_norm_rejected():
    with pytest.raises(ValueError):
        QubitState(1.0, 0.0, 0.1)


def test_invalid_axis_rejected():
    with pytest.raises(ValueError):
        Rotation(0.1, "q")
    with pytest.raises(ValueError):
        evolve_hamiltonian(QubitState(), "q", 1.0, 0.1)


def test_density_matrix_round_trip():
    rng = np.random.default_rng(7)
    for x, y, z in random_bloch(rng, 50):
        s = QubitState(x, y, z)
        back = from_density_matrix(s.to_density_matrix())
        assert back.as_tuple() == pytest.approx(s.as_tuple(), abs=1e-14)
