"""Degenerate-OPO variant: one squeezed beam split by a weak tap.

A degenerate OPO emits a single squeezed beam whose internal correlations
follow the same two exponential-sum kernels as the twin-beam source, but
now the anomalous kernel lives inside the one beam: the x quadrature is
anti-squeezed and p squeezed, so V11 != V22 and V33 != V44 in general.  A
beam splitter of reflectivity R taps the signal mode off the same beam the
click box monitors.  The click-conditioned Wigner function is no longer
rotationally symmetric; it is axial, (C2 + C3 x^2 + C4 p^2) e^{-C5 x^2 -
C6 p^2} / C1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussian_conditioning import Cov
from .mode_functions import ClickMode, ModeGrid, gram_matrix, kernel_convolution
from .opo_model import (OpoParams, anomalous_kernel, kernel_anomalous,
                        kernel_normal, normal_kernel)


@dataclass(frozen=True)
class DegenerateParams:
    """Degenerate-source parameters: base OPO settings + tap reflectivity."""

    base: OpoParams
    reflectivity: float

    def __post_init__(self):
        if not 0.0 <= self.reflectivity <= 1.0:
            raise ValueError("reflectivity must lie in [0, 1]")


@dataclass(frozen=True)
class AxialWigner:
    """Wigner function (c2 + c3 x^2 + c4 p^2) exp(-c5 x^2 - c6 p^2) / c1."""

    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    c6: float

    def __call__(self, x, p=0.0):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        out = ((self.c2 + self.c3 * x**2 + self.c4 * p**2)
               * np.exp(-self.c5 * x**2 - self.c6 * p**2) / self.c1)
        return float(out) if out.ndim == 0 else out

    def norm(self) -> float:
        """Integral over phase space; unity for a valid state."""
        return (np.pi / np.sqrt(self.c5 * self.c6)
                * (self.c2 + self.c3 / (2.0 * self.c5)
                   + self.c4 / (2.0 * self.c6)) / self.c1)


def build_cov_degenerate(dp: DegenerateParams, f2: ModeGrid,
                         click: ClickMode) -> Cov:
    """4x4 covariance of click box + tapped signal mode.

    Both modes see the same squeezed beam, weighted by the beam splitter:
    sqrt(eta_t (1-R)) on the click path and sqrt(eta_s R) on the signal
    path.  The tap's vacuum port contributes no correlations.
    """
    params = dp.base
    r = dp.reflectivity
    kn = normal_kernel(params)
    ka = anomalous_kernel(params)
    dtc = click.dt_c
    wt = params.eta_t * (1.0 - r)            # click-path weight
    ws = params.eta_s * r                    # signal-path weight
    n11 = wt * dtc * kernel_normal(params, 0.0)
    m11 = wt * dtc * kernel_anomalous(params, 0.0)
    qn = gram_matrix(f2, kn)
    qa = gram_matrix(f2, ka)
    n22 = ws * float(f2.values @ qn @ f2.values)
    m22 = ws * float(f2.values @ qa @ f2.values)
    cross = np.sqrt(wt * ws * dtc)
    n12 = cross * kernel_convolution(f2, kn, click.t_c)
    m12 = cross * kernel_convolution(f2, ka, click.t_c)
    v = np.zeros((4, 4))
    v[0, 0] = 1.0 + 2.0 * n11 + 2.0 * m11
    v[1, 1] = 1.0 + 2.0 * n11 - 2.0 * m11
    v[2, 2] = 1.0 + 2.0 * n22 + 2.0 * m22
    v[3, 3] = 1.0 + 2.0 * n22 - 2.0 * m22
    v[0, 2] = v[2, 0] = 2.0 * (n12 + m12)
    v[1, 3] = v[3, 1] = 2.0 * (n12 - m12)
    return Cov(v, ("click", "signal"))


def click_condition_degenerate(cov4: Cov) -> AxialWigner:
    """Signal Wigner function conditioned on a click, degenerate source."""
    v = cov4.matrix
    v11, v22, v33, v44 = v[0, 0], v[1, 1], v[2, 2], v[3, 3]
    v13, v24 = v[0, 2], v[1, 3]
    u = v11 + v22 - 2.0
    if u <= 1e-12:
        raise ValueError("no click information: the trigger mode carries no "
                         "excess noise (V11 + V22 <= 2)")
    c1 = np.pi * (v33 * v44)**2.5 * u
    c2 = v33 * v44 * (v33 * v44 * u - v33 * v24**2 - v44 * v13**2)
    c3 = 2.0 * v13**2 * v44**2
    c4 = 2.0 * v24**2 * v33**2
    return AxialWigner(c1, c2, c3, c4, 1.0 / v33, 1.0 / v44)


def fidelity_degenerate(cov4: Cov) -> float:
    """One-photon fidelity of the click-conditioned degenerate-source state."""
    v = cov4.matrix
    v11, v22, v33, v44 = v[0, 0], v[1, 1], v[2, 2], v[3, 3]
    v13, v24 = v[0, 2], v[1, 3]
    u = v11 + v22 - 2.0
    if u <= 1e-12:
        raise ValueError("no click information: the trigger mode carries no "
                         "excess noise (V11 + V22 <= 2)")
    t1 = 2.0 * (v33 * v44 - 1.0) / ((1.0 + v33)**1.5 * (1.0 + v44)**1.5)
    t2 = (2.0 * (2.0 * (1.0 + v44) + 1.0 - v33 * v44) * v13**2
          / (u * (1.0 + v33)**2.5 * (1.0 + v44)**1.5))
    t3 = (2.0 * (2.0 * (1.0 + v33) + 1.0 - v33 * v44) * v24**2
          / (u * (1.0 + v33)**1.5 * (1.0 + v44)**2.5))
    return t1 + t2 + t3
