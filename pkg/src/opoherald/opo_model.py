"""Non-degenerate OPO source parameters and two-time correlation kernels.

All quantities are expressed in units of the cavity decay rate: gamma is
fixed to 1 internally and epsilon, times and rates are gamma-normalized.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

GAMMA = 1.0

#: dt_c above this (in units of 1/gamma) strains the short-box treatment of
#: the trigger integrals.
SHORT_BOX_LIMIT = 0.1


@dataclass(frozen=True)
class OpoParams:
    """Physical configuration of the OPO and the two detectors.

    epsilon : non-linear gain, in units of gamma; must satisfy
        0 <= epsilon < gamma/2 (below threshold).
    eta_t, eta_s : trigger / signal detector efficiencies in [0, 1].
    dt_c : trigger click-box duration, in units of 1/gamma.
    """

    epsilon: float
    eta_t: float = 1.0
    eta_s: float = 1.0
    dt_c: float = 0.02

    def __post_init__(self):
        if not 0.0 <= self.epsilon < GAMMA / 2:
            raise ValueError(
                f"epsilon must lie in [0, gamma/2); got {self.epsilon}"
            )
        for name in ("eta_t", "eta_s"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]; got {v}")
        if self.dt_c <= 0.0:
            raise ValueError(f"dt_c must be positive; got {self.dt_c}")
        if self.dt_c * GAMMA > SHORT_BOX_LIMIT:
            warnings.warn(
                f"dt_c*gamma = {self.dt_c * GAMMA:.3g} > {SHORT_BOX_LIMIT}: "
                "trigger-box integrals assume a short click box",
                stacklevel=2,
            )

    @property
    def gamma(self) -> float:
        return GAMMA


def lambda_mu(params: OpoParams) -> tuple[float, float]:
    """Decay rates (lambda, mu) = (gamma/2 + eps, gamma/2 - eps)."""
    return GAMMA / 2 + params.epsilon, GAMMA / 2 - params.epsilon


@dataclass(frozen=True)
class ExpSumKernel:
    """A kernel k(tau) = sum_i c_i * exp(-a_i |tau|) with all a_i > 0."""

    terms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        for c, a in self.terms:
            if a <= 0.0:
                raise ValueError(f"decay rates must be positive; got {a}")

    def __call__(self, tau):
        tau = np.abs(np.asarray(tau, dtype=float))
        out = np.zeros_like(tau)
        for c, a in self.terms:
            out += c * np.exp(-a * tau)
        return out if out.ndim else float(out)


def anomalous_kernel(params: OpoParams) -> ExpSumKernel:
    """<a+(t) a-(t')> of the twin beams as an exponential-sum descriptor."""
    lam, mu = lambda_mu(params)
    pref = (lam**2 - mu**2) / 4.0
    return ExpSumKernel(((pref / (2 * mu), mu), (pref / (2 * lam), lam)))


def normal_kernel(params: OpoParams) -> ExpSumKernel:
    """<a+^dag(t) a+(t')> of each beam as an exponential-sum descriptor."""
    lam, mu = lambda_mu(params)
    pref = (lam**2 - mu**2) / 4.0
    return ExpSumKernel(((pref / (2 * mu), mu), (-pref / (2 * lam), lam)))


def kernel_anomalous(params: OpoParams, tau) -> float:
    """Cross-beam correlation (lam^2-mu^2)/4 (e^-mu|t|/2mu + e^-lam|t|/2lam)."""
    return anomalous_kernel(params)(tau)


def kernel_normal(params: OpoParams, tau) -> float:
    """Same-beam correlation (lam^2-mu^2)/4 (e^-mu|t|/2mu - e^-lam|t|/2lam)."""
    return normal_kernel(params)(tau)


def mean_intensity(params: OpoParams) -> float:
    """Mean photon flux of each twin beam, 2(eps/g)^2 g / (1 - 4(eps/g)^2)."""
    r = params.epsilon / GAMMA
    return 2.0 * r**2 * GAMMA / (1.0 - 4.0 * r**2)
