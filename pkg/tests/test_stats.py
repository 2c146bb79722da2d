import math

import numpy as np
import pytest

from cwlm.detector import ConfigurationError, DetectorParams
from cwlm.qstate import QubitState
from cwlm.stats import (
    DecisionTimeSample,
    conditioned_averages,
    decision_ensemble,
    decision_histogram,
    decision_times,
    distribution_moments,
    fit_decision_density,
    normalization_constant,
    unconditional_averages,
)
from cwlm.trajectory import SimulationConfig, run_ensemble

from helpers import sample_decision_model

PLUS_X = QubitState(1, 0, 0)


def cfg(**kw):
    base = dict(detector=DetectorParams(0.03), total_time=3.0, sampling_interval=0.1,
                seed=101, n_trajectories=400)
    base.update(kw)
    return SimulationConfig(**base)


@pytest.fixture(scope="module")
def ensemble():
    return run_ensemble(cfg(total_time=4.0, n_trajectories=600), PLUS_X)


def test_conditioned_start_at_zero(ensemble):
    cond = conditioned_averages(ensemble)
    assert cond.mean_sigma_z_c[0] == 0.0
    assert cond.n_plus + cond.n_minus + cond.n_excluded == len(ensemble)
    assert cond.n_plus > 100 and cond.n_minus > 100
    assert np.all(cond.stderr_sigma_z_c[1:] > 0)


def test_conditioned_reading_constant(ensemble):
    cond = conditioned_averages(ensemble)
    dev = np.abs(cond.mean_v_c - 1.0) / cond.stderr_v_c
    assert dev.max() < 4.0
    # and sigma_z rises toward 1 while the reading does not follow it
    assert cond.mean_sigma_z_c[1] < 0.5
    assert abs(cond.mean_v_c[0] - 1.0) < 4 * cond.stderr_v_c[0]


def test_conditioning_consistency(ensemble):
    # unconditional mean = post-selection weighted average of bucket means
    cond = conditioned_averages(ensemble)
    zT = ensemble.sigma_z[:, -1]
    keep = np.abs(zT) > 0.999
    sign = np.sign(zT[keep])
    plus = ensemble.sigma_z[keep][sign > 0].mean(axis=0)
    minus = ensemble.sigma_z[keep][sign < 0].mean(axis=0)
    recon = (cond.n_plus * plus + cond.n_minus * minus) / (cond.n_plus + cond.n_minus)
    np.testing.assert_allclose(ensemble.sigma_z[keep].mean(axis=0), recon, atol=1e-12)
    if cond.n_excluded == 0:
        mean_z, _ = unconditional_averages(ensemble)
        np.testing.assert_allclose(mean_z, recon, atol=1e-12)


def test_conditioned_empty_bucket_error():
    ens = run_ensemble(cfg(n_trajectories=20, total_time=2.0), QubitState(0, 0, 1))
    with pytest.raises(ValueError, match="bucket"):
        conditioned_averages(ens)


def test_decision_times_requires_full_grid(ensemble):
    with pytest.raises(ConfigurationError):
        decision_times(ensemble, 0.1)


def test_decision_times_limiting_threshold():
    c = cfg(n_trajectories=300, total_time=2.0, store_full_grid=True, seed=33)
    ens = run_ensemble(c, PLUS_X)
    samples, n_undecided = decision_times(ens, 0.999999)
    assert n_undecided == 0
    dt = c.detector.dt
    # |z| jumps to sin(2 theta) > 0 at the very first step
    assert all(s.decision_time == pytest.approx(dt) for s in samples)
    wrong = np.mean([s.was_wrong for s in samples])
    assert wrong == pytest.approx((1 - math.sin(0.06)) / 2, abs=3 * 0.5 / math.sqrt(300))


def test_decision_bad_threshold(ensemble):
    for h in (0.0, 1.0, -0.2, 2.0):
        with pytest.raises(ConfigurationError):
            decision_times(ensemble, h)
        with pytest.raises(ConfigurationError):
            decision_ensemble(ensemble.config, [h])


def test_stored_vs_streaming_equivalence():
    c = cfg(n_trajectories=250, total_time=4.0, store_full_grid=True, seed=77)
    ens = run_ensemble(c, PLUS_X)
    for h in (0.1, 1e-3):
        stored, n_un_stored = decision_times(ens, h)
        streamed = decision_ensemble(c, [h])[0]
        assert n_un_stored == streamed.n_undecided
        st = np.array([s.decision_time for s in stored])
        np.testing.assert_allclose(np.sort(st), np.sort(streamed.times), rtol=0, atol=1e-12)
        # same trajectories decide the same way at the same steps
        ss = np.array([s.decided_sign for s in stored])
        order = np.argsort(st, kind="stable")
        sorder = np.argsort(streamed.times, kind="stable")
        np.testing.assert_array_equal(ss[order], streamed.decided_sign[sorder])
        assert np.mean([s.was_wrong for s in stored]) == pytest.approx(streamed.error_rate)


def test_decision_monotone_in_threshold():
    c = cfg(n_trajectories=400, total_time=6.0, seed=55)
    sets = decision_ensemble(c, [1e-1, 1e-2, 1e-3])
    # same trajectory population: crossing times only grow as h shrinks
    assert sets[0].n_undecided == 0
    t_prev = None
    for dset in sets:
        assert dset.n_total == 400
        if t_prev is not None:
            assert np.all(dset.times >= t_prev - 1e-12)
        t_prev = dset.times


def test_error_rate_calibration():
    h = 0.01
    c = cfg(n_trajectories=20_000, total_time=8.0, seed=88)
    dset = decision_ensemble(c, [h])[0]
    sigma = math.sqrt(h / 2 * (1 - h / 2) / dset.times.size)
    assert abs(dset.error_rate - h / 2) < 3 * sigma


def test_fit_round_trip_from_synthetic_model():
    rng = np.random.default_rng(1234)
    t = sample_decision_model(1.0, 3.0, 100_000, rng)
    fit = fit_decision_density(t, bin_coordinate="center")
    assert fit.a == pytest.approx(1.0, rel=0.05)
    assert fit.b == pytest.approx(3.0, rel=0.05)
    # refit from the fitted density: recovery stays within 5%
    t2 = sample_decision_model(fit.a, fit.b, 100_000, rng)
    fit2 = fit_decision_density(t2, bin_coordinate="center")
    assert fit2.a == pytest.approx(fit.a, rel=0.05)
    assert fit2.b == pytest.approx(fit.b, rel=0.05)


def test_fit_normalization_and_mode():
    rng = np.random.default_rng(5)
    t = sample_decision_model(2.0, 2.0, 50_000, rng)
    fit = fit_decision_density(t, bin_coordinate="center")
    # model with a = b peaks at t = 1
    assert fit.t_p == pytest.approx(1.0, rel=0.05)
    grid = np.linspace(1e-3, 30, 200_000)
    total = np.trapezoid(fit.density(grid), grid)
    assert total == pytest.approx(1.0, abs=1e-6)
    assert normalization_constant(fit.a, fit.b) == pytest.approx(fit.c)
    # t_p is the maximum of the fitted density
    assert fit.density(np.array([fit.t_p]))[0] >= fit.density(grid).max() - 1e-9


def test_fit_input_validation():
    with pytest.raises(ValueError):
        fit_decision_density(np.ones(100))
    rng = np.random.default_rng(6)
    with pytest.raises(ValueError):
        fit_decision_density(sample_decision_model(1, 3, 5000, rng), bin_coordinate="edge")
    # degenerate histogram: nearly all mass in very few bins
    with pytest.raises(ValueError):
        fit_decision_density(np.full(5000, 1.0) + rng.random(5000) * 1e-9)


def test_fit_accepts_sample_objects():
    rng = np.random.default_rng(7)
    t = sample_decision_model(1.0, 3.0, 20_000, rng)
    objs = [DecisionTimeSample(0.01, float(x), 1, False) for x in t]
    fa = fit_decision_density(objs, bin_coordinate="center")
    fb = fit_decision_density(t, bin_coordinate="center")
    assert fa.a == fb.a and fa.b == fb.b


def test_moments_against_model_quadrature():
    rng = np.random.default_rng(8)
    a0, b0 = 3.5, 2.5
    t = sample_decision_model(a0, b0, 200_000, rng)
    fit = fit_decision_density(t, bin_coordinate="center")
    mom = distribution_moments(t)
    grid = np.linspace(1e-4, 40, 400_000)
    pdf = fit.density(grid)
    mean_q = np.trapezoid(grid * pdf, grid)
    var_q = np.trapezoid(grid**2 * pdf, grid) - mean_q**2
    assert fit.model_mean() == pytest.approx(mean_q, rel=1e-6)
    assert fit.model_variance() == pytest.approx(var_q, rel=1e-6)
    assert mom.mean == pytest.approx(mean_q, rel=0.02)
    assert mom.variance == pytest.approx(var_q, rel=0.15)
    assert mom.mode == pytest.approx(fit.t_p, rel=0.1)
    # the quick approximation is only factor-level
    assert fit.approx_variance == pytest.approx(0.25 * math.sqrt(fit.a / fit.b**3))


def test_superposition_outlives_the_decision():
    # at the most probable decision time the coherence e^{-2 t_p} is still
    # far above h: trajectories commit long before the superposition dies
    c = cfg(n_trajectories=30_000, total_time=8.0, seed=3131)
    for h in (1e-2, 1e-3):
        dset = decision_ensemble(c, [h])[0]
        fit = fit_decision_density(dset)
        assert math.exp(-2.0 * fit.t_p) > 10.0 * h


def test_relative_spread_decreases_with_threshold():
    # reference coefficient pairs for wide and tight thresholds
    wide = (0.452684, 3.28453)      # h = 1e-2
    tight = (9.57228930443, 2.31735035473)  # h = 1e-8
    rng = np.random.default_rng(9)
    spread = []
    for a, b in (wide, tight):
        t = sample_decision_model(a, b, 100_000, rng)
        spread.append(t.std() / t.mean())
    assert spread[1] < spread[0]


def test_histogram_shape():
    rng = np.random.default_rng(10)
    t = sample_decision_model(1.0, 3.0, 5000, rng)
    hist = decision_histogram(t)
    assert hist.counts.sum() == 5000
    assert hist.edges[0] == 0.0
    assert hist.edges[-1] == pytest.approx(t.max())
    assert len(hist.counts) >= 50
    width = hist.edges[1] - hist.edges[0]
    np.testing.assert_allclose(hist.density * 5000 * width, hist.counts)
