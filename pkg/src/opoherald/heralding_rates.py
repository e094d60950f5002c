"""Heralding (production) rates, unconditioned and with a dark window.

The accepted-event probability is the expectation of the click-mode photon
number taken jointly with vacuum outcomes in the m dark-window boxes.  For
the trigger-only Gaussian state this reduces to a ratio of determinants;
everything here is evaluated in log-space so large windows (m of several
hundred boxes) stay finite.
"""

from __future__ import annotations

import warnings

import numpy as np

from .gaussian_conditioning import WindowSpec
from .mode_functions import ClickMode
from .opo_model import OpoParams, kernel_normal, mean_intensity

SHORT_BOX_OCCUPANCY = 0.1


def click_rate(params: OpoParams) -> float:
    """Unconditioned trigger click rate, in units of the cavity decay rate.

    r = eta_t * mean beam intensity; valid in the short-box regime where
    the click-box occupancy is small.
    """
    occupancy = params.eta_t * params.dt_c * kernel_normal(params, 0.0)
    if occupancy > SHORT_BOX_OCCUPANCY:
        warnings.warn(
            f"click-box occupancy {occupancy:.3g} is not small; the "
            "short-box rate formula degrades", stacklevel=2)
    return params.eta_t * mean_intensity(params)


def trigger_only_xblock(params: OpoParams, window: WindowSpec,
                        click: ClickMode) -> np.ndarray:
    """x-quadrature block of the trigger-only state [click, vac boxes...].

    All these modes ride the trigger beam, so there are no anomalous
    correlations among them and the x and p blocks are equal.
    """
    centers = window.box_centers(click)
    m = centers.size
    eta, dtb, dtc = params.eta_t, window.dt_box, click.dt_c
    v = np.eye(m + 1)
    v[0, 0] += 2.0 * eta * dtc * kernel_normal(params, 0.0)
    if m:
        v[0, 1:] = v[1:, 0] = (2.0 * eta * np.sqrt(dtc * dtb)
                               * kernel_normal(params, click.t_c - centers))
        tau = centers[:, None] - centers[None, :]
        v[1:, 1:] += 2.0 * eta * dtb * kernel_normal(params, tau)
    return v


def trigger_only_cov(params: OpoParams, window: WindowSpec,
                     click: ClickMode):
    """Full (2m+2)-dim trigger-only covariance [click, vac boxes...].

    The x and p blocks are equal and there are no x-p cross terms, so the
    interleaved matrix is just the x block duplicated.
    """
    from .gaussian_conditioning import Cov
    v_x = trigger_only_xblock(params, window, click)
    n = v_x.shape[0]
    v = np.zeros((2 * n, 2 * n))
    v[0::2, 0::2] = v_x
    v[1::2, 1::2] = v_x
    labels = ("click",) + tuple(f"vac{i+1}" for i in range(n - 1))
    return Cov(v, labels)


def vac_click_probability(params: OpoParams, window: WindowSpec,
                          click: ClickMode) -> float:
    """Joint probability of a dark window and a click in the click box.

    P = 2^(m-1)/sqrt(det(I + VJ)) * (det((Vx^-1+Jx)_red)/det(Vx^-1+Jx) - 1)
    with J projecting onto the vacuum-box quadratures and "red" deleting
    the click row/column.  Equal x/p blocks give sqrt(det(I+VJ)) =
    det(I + Vx Jx), and the determinant ratio is the (0,0) element of
    (Vx^-1 + Jx)^-1 by Cramer's rule.
    """
    v_x = trigger_only_xblock(params, window, click)
    m = v_x.shape[0] - 1
    if m == 0:
        return (v_x[0, 0] - 1.0) / 2.0
    j_x = np.eye(m + 1)
    j_x[0, 0] = 0.0
    sign_a, log_a = np.linalg.slogdet(np.eye(m + 1) + v_x @ j_x)
    if sign_a <= 0:
        raise ValueError("unphysical trigger covariance: det(I + Vx Jx) <= 0")
    # ratio = (M^-1)_00 for M = Vx^-1 + Jx = Vx^-1 (I + Vx Jx), so
    # M^-1 = (I + Vx Jx)^-1 Vx; Cramer's rule gives the determinant ratio
    u = np.linalg.solve(np.eye(m + 1) + v_x @ j_x, v_x[:, 0])
    ratio = float(u[0])
    if ratio <= 1.0:
        return 0.0
    return float(np.exp((m - 1.0) * np.log(2.0) - log_a) * (ratio - 1.0))


def production_rate_windowed(params: OpoParams, window: WindowSpec,
                             click: ClickMode) -> float:
    """Accepted heralding events per unit time (units of the decay rate)."""
    return vac_click_probability(params, window, click) / click.dt_c
