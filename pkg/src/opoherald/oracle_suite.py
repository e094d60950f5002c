"""Independent brute-force verifiers for the closed-form pipeline.

Nothing here shares code paths with the production formulas: kernel
integrals and Wigner overlaps are re-done with adaptive quadrature,
small-window vacuum conditioning with direct Gaussian-product algebra on
the precision matrix, and the window/click probability with seeded Monte
Carlo sampling of the Gaussian Wigner function (legitimate because every
unconditioned or vacuum-conditioned state here is Gaussian, so its Wigner
function is a true probability density).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .gaussian_conditioning import Cov


@dataclass(frozen=True)
class McConfig:
    """Seeded Monte Carlo budget; sigma is reported, never hidden."""

    seed: int = 0
    samples: int = 1_000_000
    confidence: float = 1.0

    def __post_init__(self):
        if self.samples < 10_000:
            raise ValueError("MC budget below 10^4 samples is meaningless "
                             "for these tolerances")


def quad2d(f, x_range, y_range, tol: float = 1e-9) -> float:
    """Adaptive 2-D quadrature of f(x, y) over a rectangle.

    Raises if the reported error estimate exceeds tol.
    """
    (xa, xb), (ya, yb) = x_range, y_range
    val, err = integrate.dblquad(lambda y, x: f(x, y), xa, xb, ya, yb,
                                 epsabs=tol / 10.0, epsrel=1e-12)
    if err > tol:
        raise RuntimeError(f"quad2d did not reach tol={tol}: error {err}")
    return val


def direct_vacuum_projection(cov: Cov) -> Cov:
    """Vacuum-condition by literal Gaussian-product integration (m <= 2).

    Multiplies the state's Wigner function by the vacuum Wigner function of
    every vacuum mode and marginalizes them out, all in precision-matrix
    form: the product has precision V^-1 + J (J = identity on the vacuum
    quadratures), and the kept block of its inverse is the conditioned
    covariance.  Independent of the Schur-complement route it validates.
    """
    m = cov.n_vacuum
    if not 1 <= m <= 2:
        raise ValueError("direct projection oracle supports 1 or 2 vacuum "
                         f"modes; got {m}")
    v = cov.matrix
    j = np.zeros(v.shape[0])
    j[4:] = 1.0
    precision = np.linalg.inv(v) + np.diag(j)
    conditioned = np.linalg.inv(precision)[:4, :4]
    return Cov(conditioned, cov.labels[:2])


def mc_vac_click(cov: Cov, mc: McConfig = McConfig()):
    """Monte Carlo estimate of the dark-window-and-click probability.

    cov is the trigger-only covariance (click mode + m vacuum boxes; no
    signal mode).  Samples y ~ N(0, V/2) and averages
    (x1^2 + p1^2 - 1)/2 * 2^m * exp(-sum over vacuum quadratures of y^2),
    the importance-weighted form of the phase-space integral.

    Returns (estimate, sigma) with sigma already scaled by mc.confidence.
    """
    v = cov.matrix
    m = len(cov.labels) - 1  # every mode but the click box is a vacuum box
    rng = np.random.default_rng(mc.seed)
    chol = np.linalg.cholesky(v / 2.0)
    total = 0.0
    total_sq = 0.0
    n = mc.samples
    chunk = 200_000
    done = 0
    while done < n:
        k = min(chunk, n - done)
        y = rng.standard_normal((k, v.shape[0])) @ chol.T
        weight = 0.5 * (y[:, 0]**2 + y[:, 1]**2 - 1.0)
        if m:
            weight = weight * np.exp(m * np.log(2.0)
                                     - np.sum(y[:, 2:]**2, axis=1))
        total += float(weight.sum())
        total_sq += float((weight**2).sum())
        done += k
    mean = total / n
    var = max(total_sq / n - mean**2, 0.0)
    sigma = np.sqrt(var / n) * mc.confidence
    return mean, sigma


def oracle_record(name: str, value: float, error: float, **config) -> str:
    """JSON audit record for an oracle evaluation."""
    return json.dumps({"oracle": name, "value": value, "error": error,
                       "config": config}, sort_keys=True)
