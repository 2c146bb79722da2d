import math

import numpy as np
import pytest

from cwlm.detector import (
    ConfigurationError,
    DetectorParams,
    apply_readings,
    ideality_check,
    mean_deflection,
    measure_step,
    measure_step_matrix,
    reading_probabilities,
)
from cwlm.qstate import QubitState

from helpers import bloch_to_rho, measure_oracle, random_bloch, rho_to_bloch

P = DetectorParams(0.03)


def test_dt_follows_theta():
    assert P.dt == pytest.approx(9e-4, rel=1e-15)
    assert DetectorParams(0.05).dt == pytest.approx(2.5e-3, rel=1e-15)


def test_theta_bounds():
    with pytest.raises(ConfigurationError):
        DetectorParams(0.2)
    with pytest.raises(ConfigurationError):
        DetectorParams(0.0)
    with pytest.warns(UserWarning):
        DetectorParams(0.06)
    with pytest.raises(ConfigurationError):
        DetectorParams(0.03, dt=1e-3)  # inconsistent with T_c units


def test_eigenstate_is_fixed_point():
    s = QubitState(0, 0, 1)
    p_plus, p_minus = reading_probabilities(s, P)
    assert p_plus == pytest.approx((1 + math.sin(0.06)) / 2)
    rng = np.random.default_rng(0)
    for _ in range(10):
        out = measure_step(s, P, rng)
        assert out.post_state.as_tuple() == (0.0, 0.0, 1.0)


def test_equal_superposition_step():
    s = QubitState(1, 0, 0)
    assert reading_probabilities(s, P) == (0.5, 0.5)
    x, y, z = apply_readings(1.0, 0.0, 0.0, 1, P.sin2theta, P.cos2theta)
    assert (x, y, z) == pytest.approx((math.cos(0.06), 0.0, math.sin(0.06)), abs=1e-15)


def test_maximally_mixed_step():
    x, y, z = apply_readings(0.0, 0.0, 0.0, -1, P.sin2theta, P.cos2theta)
    assert (x, y, z) == pytest.approx((0.0, 0.0, -math.sin(0.06)), abs=1e-15)


def test_against_two_qubit_oracle():
    # full coupled evolution + projection, via expm on the 4x4 Hamiltonian
    rng = np.random.default_rng(11)
    vs = random_bloch(rng, 150)
    thetas = rng.uniform(0.005, 0.1, 150)
    for (x, y, z), theta in zip(vs, thetas):
        for reading in (+1, -1):
            prob_o, rho_o = measure_oracle(bloch_to_rho(x, y, z), theta, reading)
            xb, yb, zb = apply_readings(x, y, z, reading, math.sin(2 * theta), math.cos(2 * theta))
            prob_b = 0.5 * (1.0 + reading * z * math.sin(2 * theta))
            assert prob_b == pytest.approx(prob_o, abs=1e-12)
            assert rho_to_bloch(rho_o) == pytest.approx((xb, yb, zb), abs=1e-11)


def test_bloch_equals_matrix_form():
    # the packaged general matrix update, 1e4 random inputs, 1e-12
    rng = np.random.default_rng(12)
    vs = random_bloch(rng, 10_000)
    thetas = rng.uniform(0.005, 0.1, 10_000)
    readings = rng.choice([-1, 1], 10_000)
    for (x, y, z), theta, reading in zip(vs, thetas, readings):
        prob_m, rho_m = measure_step_matrix(bloch_to_rho(x, y, z), theta, int(reading))
        xb, yb, zb = apply_readings(x, y, z, reading, math.sin(2 * theta), math.cos(2 * theta))
        assert prob_m == pytest.approx(0.5 * (1 + reading * z * math.sin(2 * theta)), abs=1e-12)
        assert rho_to_bloch(rho_m) == pytest.approx((xb, yb, zb), abs=1e-12)


def test_probability_normalization_and_martingale():
    rng = np.random.default_rng(13)
    v = random_bloch(rng, 50_000)
    theta = rng.uniform(0.005, 0.1, 50_000)
    s2 = np.sin(2 * theta)
    c2 = np.cos(2 * theta)
    p_plus = 0.5 * (1.0 + v[:, 2] * s2)
    assert np.all((p_plus >= 0) & (p_plus <= 1))
    _, _, z_plus = apply_readings(v[:, 0], v[:, 1], v[:, 2], 1.0, s2, c2)
    _, _, z_minus = apply_readings(v[:, 0], v[:, 1], v[:, 2], -1.0, s2, c2)
    expect_z = p_plus * z_plus + (1 - p_plus) * z_minus
    # the two-branch average of z' is exactly z
    np.testing.assert_allclose(expect_z, v[:, 2], atol=1e-14)


def test_positivity_million_cases():
    rng = np.random.default_rng(14)
    v = random_bloch(rng, 1_000_000)
    theta = rng.uniform(0.005, 0.1, 1_000_000)
    sigma = rng.choice([-1.0, 1.0], 1_000_000)
    x, y, z = apply_readings(v[:, 0], v[:, 1], v[:, 2], sigma, np.sin(2 * theta), np.cos(2 * theta))
    norms = x * x + y * y + z * z
    assert norms.max() <= 1.0 + 1e-12


def test_pure_states_stay_pure():
    rng = np.random.default_rng(15)
    v = random_bloch(rng, 10_000, pure=True)
    theta = rng.uniform(0.005, 0.1, 10_000)
    sigma = rng.choice([-1.0, 1.0], 10_000)
    x, y, z = apply_readings(v[:, 0], v[:, 1], v[:, 2], sigma, np.sin(2 * theta), np.cos(2 * theta))
    np.testing.assert_allclose(x * x + y * y + z * z, 1.0, atol=1e-12)


def test_transverse_decay_rate():
    # E[x']/x = cos(2 theta) per step; one T_c of steps gives e^{-2} within 2%
    s2, c2 = P.sin2theta, P.cos2theta
    x = 1.0
    z = 0.4
    p_plus = 0.5 * (1 + z * s2)
    x_plus, _, _ = apply_readings(x, 0.0, z, 1, s2, c2)
    x_minus, _, _ = apply_readings(x, 0.0, z, -1, s2, c2)
    assert p_plus * x_plus + (1 - p_plus) * x_minus == pytest.approx(x * c2, abs=1e-15)
    n_steps = int(round(1.0 / P.dt))
    assert c2**n_steps == pytest.approx(math.exp(-2.0), rel=0.02)


def test_mean_deflection():
    assert mean_deflection(P, QubitState(0.5, 0, 0)) == 0.0
    assert mean_deflection(P, QubitState(0, 0, 1)) == pytest.approx(math.sin(0.06))
    assert mean_deflection(P, QubitState(0, 0, -1)) == pytest.approx(-math.sin(0.06))
    assert mean_deflection(P, QubitState(0, 0, 1)) == pytest.approx(0.0599, abs=1e-4)


def test_ideality_identity():
    s_out, s_in, a = ideality_check(P)
    assert (s_out, s_in, a) == pytest.approx((9e-4, 1.0, 0.06), rel=1e-15)
    assert s_out * s_in == pytest.approx(a**2 / 4, rel=1e-15)
    for theta in (0.01, 0.02, 0.05):
        s_out, s_in, a = ideality_check(DetectorParams(theta))
        assert s_out * s_in == pytest.approx(a**2 / 4, rel=1e-15)
    s_out, s_in, a = ideality_check(DetectorParams(0.05))
    assert a == pytest.approx(0.1)
    assert s_out == pytest.approx(2.5e-3)


def test_ideality_with_added_noise():
    s_out, s_in, a = ideality_check(P, extra_output_power=0.3)
    assert s_out * s_in > a**2 / 4
    with pytest.raises(ConfigurationError):
        ideality_check(P, extra_output_power=-1.0)


def test_measure_step_probability_field():
    rng = np.random.default_rng(16)
    out = measure_step(QubitState(0, 0, 0.5), P, rng)
    want = 0.5 * (1 + out.reading * 0.5 * P.sin2theta)
    assert out.probability == pytest.approx(want)
