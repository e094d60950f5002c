"""Temporal-mode optimizers: gradients, convergence, cross-checks."""

import numpy as np
import pytest

from opoherald import (ClickMode, OpoParams, OptimizerConfig, WindowSpec,
                       exp_mode, fidelity_one_photon, general_objective,
                       build_click_signal_cov, optimize_fixed_point,
                       optimize_general, phase_stationarity_check,
                       windowed_fidelity)

CLICK = ClickMode(0.0, 0.02)


def l2_distance(f, g):
    return np.sqrt(f.with_values(f.values - g.values).norm_sq())


@pytest.mark.parametrize("window", [None, WindowSpec(2.0, 0.5)])
def test_gradient_matches_finite_differences(window):
    params = OpoParams(epsilon=0.25, eta_t=0.8, eta_s=0.9)
    grid, fn = general_objective(params, CLICK, window, n_points=201)
    rng = np.random.default_rng(4)
    values = grid.values + 0.1 * rng.standard_normal(grid.n)
    _, grad = fn(values)
    delta = 1e-5
    for k in rng.integers(0, grid.n, size=6):
        vp, vm = values.copy(), values.copy()
        vp[k] += delta
        vm[k] -= delta
        fd = (fn(vp)[0] - fn(vm)[0]) / (2 * delta)
        assert grad[k] == pytest.approx(fd, rel=1e-6, abs=1e-10)


def test_methods_agree_without_window():
    params = OpoParams(epsilon=0.2)
    f_fp, fid_fp = optimize_fixed_point(params, CLICK)
    f_gd, fid_gd = optimize_general(params, CLICK, None,
                                    OptimizerConfig(tol=1e-10))
    assert fid_gd == pytest.approx(fid_fp, abs=1e-6)
    # the objective is nearly flat at the optimum, so the modes agree less
    # tightly than the fidelities
    assert l2_distance(f_fp, f_gd) < 5e-3


def test_optimized_beats_matched_exponential():
    params = OpoParams(epsilon=0.2)
    f_exp = exp_mode(params)
    f_op, fid = optimize_fixed_point(params, CLICK)
    base = fidelity_one_photon(build_click_signal_cov(params, f_exp, CLICK))
    assert fid > base
    assert fid == pytest.approx(
        fidelity_one_photon(build_click_signal_cov(params, f_op, CLICK)),
        abs=1e-12)


def test_fidelity_monotone_over_iterations():
    params = OpoParams(epsilon=0.45)
    stats = {}
    optimize_fixed_point(params, CLICK, stats=stats)
    hist = np.array(stats["fidelity_history"])
    assert np.all(np.diff(hist) >= -1e-13)
    stats = {}
    optimize_general(params, CLICK, WindowSpec(2.0, 0.5), stats=stats)
    hist = np.array(stats["fidelity_history"])
    assert np.all(np.diff(hist) >= -1e-13)


def test_windowed_optimum_beats_plain_modes():
    params = OpoParams(epsilon=0.2)
    window = WindowSpec(10.0, 0.5)
    f_op, fid = optimize_general(params, CLICK, window)
    assert fid > windowed_fidelity(params, exp_mode(params), CLICK, window)
    f_t0, _ = optimize_fixed_point(params, CLICK)
    assert fid > windowed_fidelity(params, f_t0, CLICK, window)


def test_small_gain_limit_reaches_efficiency_bound():
    # far below threshold the heralded state approaches a one-photon state
    # degraded only by the signal efficiency
    for eta_s in (1.0, 0.8):
        params = OpoParams(epsilon=1e-4, eta_s=eta_s)
        _, fid = optimize_fixed_point(params, CLICK)
        assert fid == pytest.approx(eta_s, abs=1e-3)


def test_zero_gain_returns_matched_exponential():
    params = OpoParams(epsilon=0.0)
    f, fid = optimize_fixed_point(params, CLICK)
    assert np.isnan(fid)
    assert np.allclose(f.values, exp_mode(params).values)


def test_phase_stationarity_of_real_modes():
    params = OpoParams(epsilon=0.2)
    f_op, _ = optimize_fixed_point(params, CLICK)
    assert phase_stationarity_check(params, f_op, CLICK) < 1e-8


def test_convergence_error_carries_diagnostics():
    from opoherald import ConvergenceError
    params = OpoParams(epsilon=0.3)
    with pytest.raises(ConvergenceError) as info:
        optimize_fixed_point(params, CLICK, OptimizerConfig(tol=1e-9,
                                                            max_iter=3))
    assert info.value.last_mode is not None
    assert info.value.iterations == 3


@pytest.mark.xfail(strict=True,
                   reason="documented expectation of a sub-0.01 optimized "
                          "gain at eps=0.1 is not met by the grid-converged "
                          "value (0.0116); see the decisions ledger")
def test_gain_at_eps_point_one_below_one_percent():
    params = OpoParams(epsilon=0.1)
    base = fidelity_one_photon(
        build_click_signal_cov(params, exp_mode(params), CLICK))
    _, fid = optimize_fixed_point(params, CLICK)
    assert 0.0 < fid - base < 0.01


def test_gain_at_eps_point_one_small_and_positive():
    # companion to the strict xfail above: the gain is real but slightly
    # above the quoted 0.01
    params = OpoParams(epsilon=0.1)
    base = fidelity_one_photon(
        build_click_signal_cov(params, exp_mode(params), CLICK))
    _, fid = optimize_fixed_point(params, CLICK)
    assert 0.0 < fid - base < 0.02
