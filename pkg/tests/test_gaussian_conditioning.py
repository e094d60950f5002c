"""Covariance assembly, vacuum/click conditioning, Wigner and fidelity."""

import numpy as np
import pytest
from oracle_helpers import (quad_convolution, quad_quadratic_form,
                            quad_wigner_overlap)

from opoherald import (ClickMode, Cov, OpoParams, WindowSpec,
                       build_click_signal_cov, build_extended_cov,
                       click_condition, direct_vacuum_projection, exp_mode,
                       fidelity_one_photon, symplectic_eigenvalues,
                       two_mode_cov, vacuum_condition, wigner_eval,
                       windowed_click_signal_cov, windowed_fidelity)

CLICK = ClickMode(0.0, 0.02)


def test_cov_entries_match_quadrature():
    params = OpoParams(epsilon=0.25, eta_t=0.7, eta_s=0.9)
    f = exp_mode(params, n=41, half_width=4.0)
    cov = build_click_signal_cov(params, f, CLICK)
    v33_ref = 1.0 + 2.0 * params.eta_s * quad_quadratic_form(params, f,
                                                             "normal")
    v13_ref = (2.0 * np.sqrt(params.eta_t * params.eta_s * CLICK.dt_c)
               * quad_convolution(params, f, CLICK.t_c, "anomalous"))
    assert cov.v33 == pytest.approx(v33_ref, abs=1e-9)
    assert cov.v13 == pytest.approx(v13_ref, abs=1e-9)


def test_extended_cov_structure():
    params = OpoParams(epsilon=0.2)
    f = exp_mode(params, n=101, half_width=4.0)
    window = WindowSpec(2.0, 0.5)
    cov = build_extended_cov(params, f, CLICK, window)
    assert cov.n_vacuum == 4
    v = cov.matrix
    # p block mirrors the x block with the signal row/column negated
    x = v[0::2, 0::2]
    p = v[1::2, 1::2]
    sign = np.ones(6)
    sign[1] = -1.0
    assert np.allclose(p, sign[:, None] * x * sign[None, :], atol=1e-14)
    assert np.allclose(v[0::2, 1::2], 0.0)


@pytest.mark.parametrize("centers", [(0.8,), (-0.8, 0.9)])
def test_schur_matches_direct_projection(centers):
    params = OpoParams(epsilon=0.35, eta_t=0.8)
    f = exp_mode(params, n=101, half_width=4.0)
    window = WindowSpec(0.0, 0.5, centers=centers)
    ext = build_extended_cov(params, f, CLICK, window)
    schur = vacuum_condition(ext)
    direct = direct_vacuum_projection(ext)
    assert np.allclose(schur.matrix, direct.matrix, atol=1e-10)


def test_scalar_window_path_matches_full_matrix():
    params = OpoParams(epsilon=0.3, eta_t=0.6)
    f = exp_mode(params, n=101, half_width=4.0)
    window = WindowSpec(2.0, 0.25)
    full = vacuum_condition(build_extended_cov(params, f, CLICK, window,
                                               eta_c=1.0))
    fast = windowed_click_signal_cov(params, f, CLICK, window)
    assert np.allclose(full.matrix, fast.matrix, atol=1e-11)


def test_wigner_normalization_and_origin():
    params = OpoParams(epsilon=0.2)
    f = exp_mode(params)
    w = click_condition(build_click_signal_cov(params, f, CLICK))
    assert w.norm() == pytest.approx(1.0, abs=1e-12)
    # numeric check of the analytic norm
    xs = np.linspace(-8, 8, 2001)
    grid = wigner_eval(w, xs[:, None], xs[None, :])
    assert np.trapezoid(np.trapezoid(grid, xs), xs) == pytest.approx(
        1.0, abs=1e-8)


def test_fidelity_matches_wigner_overlap():
    params = OpoParams(epsilon=0.3, eta_s=0.85)
    f = exp_mode(params)
    cov = build_click_signal_cov(params, f, CLICK)
    closed = fidelity_one_photon(cov)
    ref = quad_wigner_overlap(click_condition(cov))
    assert closed == pytest.approx(ref, abs=1e-9)


def test_reference_fidelity_and_origin_wigner():
    # frozen reference point: eps = 0.02, unit efficiencies, decay-matched
    # exponential mode
    params = OpoParams(epsilon=0.02)
    f = exp_mode(params)
    cov = build_click_signal_cov(params, f, CLICK)
    assert fidelity_one_photon(cov) == pytest.approx(0.9921, abs=5e-4)
    w = click_condition(cov)
    assert wigner_eval(w, 0.0, 0.0) == pytest.approx(-0.3133, abs=1e-3)


def test_zero_trigger_efficiency_window_is_inert():
    params = OpoParams(epsilon=0.3, eta_t=0.0)
    f = exp_mode(params)
    base = windowed_fidelity(params, f, CLICK, None)
    for t in (1.0, 5.0, 10.0):
        assert windowed_fidelity(params, f, CLICK,
                                 WindowSpec(t, 0.02)) == pytest.approx(
            base, abs=1e-12)


def test_click_condition_invariant_under_click_path_efficiency():
    params = OpoParams(epsilon=0.25, eta_t=0.4)
    f = exp_mode(params)
    w_phys = click_condition(build_click_signal_cov(params, f, CLICK))
    w_unit = click_condition(build_click_signal_cov(params, f, CLICK,
                                                    eta_c=1.0))
    assert w_phys.a1 == pytest.approx(w_unit.a1, rel=1e-12)
    assert w_phys.a2 == pytest.approx(w_unit.a2, rel=1e-12)
    assert w_phys.a3 == pytest.approx(w_unit.a3, rel=1e-12)


def test_no_click_information_raises():
    cov = two_mode_cov(1.0, 1.5, 0.0)
    with pytest.raises(ValueError, match="no click information"):
        click_condition(cov)
    with pytest.raises(ValueError, match="no click information"):
        fidelity_one_photon(cov)


def test_symplectic_eigenvalues_vacuum_and_squeezed():
    assert np.allclose(symplectic_eigenvalues(np.eye(6)), 1.0)
    # pure squeezed state: eigenvalue exactly 1
    v = np.diag([4.0, 0.25])
    assert symplectic_eigenvalues(v) == pytest.approx([1.0])


def test_window_spec_validation():
    with pytest.raises(ValueError):
        WindowSpec(0.5, 0.2)    # not an even multiple of dt_box
    with pytest.raises(ValueError):
        WindowSpec(1.0, -0.1)
    w = WindowSpec(0.0, 0.3, centers=(0.0,))
    with pytest.raises(ValueError, match="overlaps"):
        w.box_centers(CLICK)    # explicit center sits on the click box
    centers = WindowSpec(2.0, 0.5).box_centers(CLICK)
    assert centers.size == 4
    assert np.all(np.abs(centers) >= CLICK.dt_c / 2)


def test_cov_requires_symmetry():
    m = np.eye(4)
    m[0, 1] = 0.5
    with pytest.raises(ValueError, match="symmetric"):
        Cov(m, ("click", "signal"))
