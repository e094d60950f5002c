"""Shared brute-force oracles used by the test suite.

Everything here recomputes quantities through scipy adaptive quadrature on
the piecewise-linear mode interpolants, fully independent of the exact
segment-integral formulas in the package.
"""

import numpy as np
from scipy import integrate

from opoherald import kernel_anomalous, kernel_normal


def pwl_interp(f):
    """Piecewise-linear interpolant of a ModeGrid, zero outside its support."""
    t, v = f.times, f.values
    return lambda s: np.interp(s, t, v, left=0.0, right=0.0)


def quad_convolution(params, f, t, kernel="anomalous"):
    """(K * f)(t) by adaptive quadrature with the kernel cusp isolated."""
    kern = kernel_anomalous if kernel == "anomalous" else kernel_normal
    fi = pwl_interp(f)
    a, b = f.times[0], f.times[-1]
    pts = sorted(set(np.clip(np.append(f.times, t), a, b)))
    val, _ = integrate.quad(lambda s: fi(s) * kern(params, t - s), a, b,
                            points=pts, limit=400, epsabs=1e-12, epsrel=1e-12)
    return val


def quad_quadratic_form(params, f, kernel="normal"):
    """Integral f(t) K(t-s) f(s) dt ds by nested quadrature.

    Inner integral: adaptive quad with the cusp at s = t listed explicitly.
    Outer integral: fixed high-order Gauss-Legendre on each linear segment
    of f, where the inner result is smooth.
    """
    fi = pwl_interp(f)
    nodes, weights = np.polynomial.legendre.leggauss(12)
    total = 0.0
    for k in range(f.n - 1):
        ta, tb = f.times[k], f.times[k + 1]
        mid, half = (ta + tb) / 2.0, (tb - ta) / 2.0
        for xi, wi in zip(nodes, weights):
            t = mid + half * xi
            total += wi * half * fi(t) * quad_convolution(params, f, t, kernel)
    return total


def quad_wigner_overlap(w, extent=6.0, tol=1e-8):
    """Fidelity with the one-photon state: 2 pi int W(x,p) W_1(x,p) dx dp."""
    from opoherald import wigner_one_photon

    val, err = integrate.dblquad(
        lambda p, x: w(x, p) * wigner_one_photon(x, p),
        -extent, extent, -extent, extent, epsabs=1e-11, epsrel=1e-11)
    if err > tol:
        raise RuntimeError(f"overlap quadrature error {err} above {tol}")
    return 2.0 * np.pi * val
