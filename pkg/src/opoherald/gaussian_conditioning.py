"""Covariance assembly and measurement conditioning for heralded states.

States are zero-mean Gaussians over quadrature pairs (x_i, p_i) with the
convention V_ij = <y_i y_j + y_j y_i>, so vacuum = identity.  Mode ordering
is [click, signal, vacuum boxes...]; the click box rides the trigger beam,
the signal mode the twin beam, and the vacuum boxes flank the click on the
trigger beam.

Conditioning on "no click" in the vacuum boxes is a Gaussian update (Schur
complement).  Conditioning on the click itself is non-Gaussian and yields a
signal-mode Wigner function of the form (A1 + A2 r^2) e^{-A3 r^2}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .mode_functions import ClickMode, ModeGrid, gram_matrix, kernel_convolution
from .opo_model import OpoParams, anomalous_kernel, kernel_normal, normal_kernel


@dataclass(frozen=True)
class Cov:
    """Covariance matrix with its ordered mode labels.

    matrix rows/columns interleave quadratures (x1, p1, x2, p2, ...);
    labels[i] names mode i+1.  Mode 1 is the trigger click box, mode 2 the
    signal; any further modes are dark-window vacuum boxes.
    """

    matrix: np.ndarray
    labels: tuple

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if m.shape != (2 * len(self.labels),) * 2:
            raise ValueError("matrix size does not match the mode labels")
        if not np.allclose(m, m.T, atol=1e-12):
            raise ValueError("covariance matrix must be symmetric")

    # scalar views of the click/signal block used by the closed forms
    @property
    def v11(self) -> float:
        return float(self.matrix[0, 0])

    @property
    def v33(self) -> float:
        return float(self.matrix[2, 2])

    @property
    def v13(self) -> float:
        return float(self.matrix[0, 2])

    @property
    def v14(self) -> float:
        return float(self.matrix[0, 3])

    @property
    def cross_sq(self) -> float:
        """Total squared click-signal cross correlation V13^2 + V14^2."""
        return self.v13**2 + self.v14**2

    @property
    def n_vacuum(self) -> int:
        return len(self.labels) - 2


def two_mode_cov(v11: float, v33: float, v13: float, v14: float = 0.0) -> Cov:
    """4x4 click+signal covariance with the symmetry pattern of this family
    (V22 = V11, V44 = V33, V24 = -V13, V23 = V14, V12 = V34 = 0)."""
    v = np.diag([v11, v11, v33, v33]).astype(float)
    v[0, 2] = v[2, 0] = v13
    v[1, 3] = v[3, 1] = -v13
    v[0, 3] = v[3, 0] = v14
    v[1, 2] = v[2, 1] = v14
    return Cov(v, ("click", "signal"))


@dataclass(frozen=True)
class WindowSpec:
    """Dark (no-click) window: total duration split evenly before and after
    the click box, discretized into vacuum boxes of width dt_box.

    centers, when given, overrides the symmetric placement with an explicit
    list of box center times (boxes still have width dt_box).
    """

    duration: float
    dt_box: float
    centers: tuple = None

    def __post_init__(self):
        if self.dt_box <= 0.0:
            raise ValueError("dt_box must be positive")
        if self.centers is not None:
            object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))
            return
        if self.duration < 0.0:
            raise ValueError("window duration must be >= 0")
        if self.duration > 0.0:
            half = self.duration / (2.0 * self.dt_box)
            if abs(half - round(half)) > 1e-6 or round(half) < 1:
                raise ValueError(
                    "duration must be an even multiple of dt_box "
                    f"(duration={self.duration}, dt_box={self.dt_box})")

    @property
    def n_boxes(self) -> int:
        if self.centers is not None:
            return len(self.centers)
        if self.duration == 0.0:
            return 0
        return 2 * int(round(self.duration / (2.0 * self.dt_box)))

    def box_centers(self, click: ClickMode) -> np.ndarray:
        """Vacuum box centers; symmetric tiling flanking the click box."""
        if self.centers is not None:
            c = np.asarray(self.centers)
            if np.any(np.abs(c - click.t_c) < (self.dt_box + click.dt_c) / 2 - 1e-12):
                raise ValueError("a vacuum box overlaps the click box")
            return c
        half = self.n_boxes // 2
        if half == 0:
            return np.empty(0)
        k = np.arange(half) + 0.5
        left = click.t_c - click.dt_c / 2 - k[::-1] * self.dt_box
        right = click.t_c + click.dt_c / 2 + k * self.dt_box
        return np.concatenate([left, right])


# --------------------------------------------------------------------------
# covariance assembly (short-box sampling of the correlation kernels)


def signal_variance(params: OpoParams, f: ModeGrid) -> float:
    """x-quadrature variance V33 of the signal mode f."""
    q = gram_matrix(f, normal_kernel(params))
    return 1.0 + 2.0 * params.eta_s * float(f.values @ q @ f.values)


def build_click_signal_cov(params: OpoParams, f2: ModeGrid, click: ClickMode,
                           eta_c: float = None,
                           f2_imag: ModeGrid = None) -> Cov:
    """Covariance of the click box mode and signal mode f2.

    eta_c overrides the trigger-path efficiency of the click mode itself
    (default: params.eta_t).  The click-conditioned signal state is exactly
    invariant under this choice, so callers probing eta_t = 0 may build the
    click mode at unit efficiency.  f2_imag adds an imaginary part to the
    signal mode, populating V14.
    """
    if eta_c is None:
        eta_c = params.eta_t
    ka = anomalous_kernel(params)
    v11 = 1.0 + 2.0 * eta_c * click.dt_c * kernel_normal(params, 0.0)
    cross = np.sqrt(eta_c * params.eta_s * click.dt_c)
    v33 = signal_variance(params, f2)
    v13 = 2.0 * cross * kernel_convolution(f2, ka, click.t_c)
    v14 = 0.0
    if f2_imag is not None:
        q = gram_matrix(f2_imag, normal_kernel(params))
        v33 += 2.0 * params.eta_s * float(f2_imag.values @ q @ f2_imag.values)
        v14 = 2.0 * cross * kernel_convolution(f2_imag, ka, click.t_c)
    return two_mode_cov(v11, v33, v13, v14)


def window_blocks(params: OpoParams, f2: ModeGrid, click: ClickMode,
                  window: WindowSpec, eta_c: float = None):
    """Covariance blocks coupling the dark-window vacuum boxes.

    Returns (m_vac, w, s): the excess vacuum-box x-block V_vv - I, the
    click-to-box row, and the signal-to-box row.  The vacuum boxes always
    carry the physical trigger efficiency; eta_c only rescales the
    click-mode coupling w (see build_click_signal_cov).
    """
    if eta_c is None:
        eta_c = params.eta_t
    centers = window.box_centers(click)
    dtb = window.dt_box
    if centers.size == 0:
        return np.empty((0, 0)), np.empty(0), np.empty(0)
    tau = centers[:, None] - centers[None, :]
    m_vac = 2.0 * params.eta_t * dtb * kernel_normal(params, tau)
    w = (2.0 * np.sqrt(eta_c * params.eta_t * click.dt_c * dtb)
         * kernel_normal(params, click.t_c - centers))
    s = (2.0 * np.sqrt(params.eta_s * params.eta_t * dtb)
         * kernel_convolution(f2, anomalous_kernel(params), centers))
    return m_vac, np.atleast_1d(w), np.atleast_1d(s)


def build_extended_cov(params: OpoParams, f2: ModeGrid, click: ClickMode,
                       window: WindowSpec, eta_c: float = None) -> Cov:
    """(2m+4)x(2m+4) covariance including m dark-window vacuum boxes.

    The p block mirrors the x block with the signal cross terms negated
    (the signal mode rides the twin beam; all other modes the trigger).
    """
    base = build_click_signal_cov(params, f2, click, eta_c=eta_c)
    m = window.n_boxes
    n = m + 2
    v_x = np.eye(n)
    v_x[0, 0] = base.v11
    v_x[1, 1] = base.v33
    v_x[0, 1] = v_x[1, 0] = base.v13
    if m:
        m_vac, w, s = window_blocks(params, f2, click, window, eta_c=eta_c)
        v_x[2:, 2:] += m_vac
        v_x[0, 2:] = v_x[2:, 0] = w
        v_x[1, 2:] = v_x[2:, 1] = s
    sign = np.ones(n)
    sign[1] = -1.0
    v_p = sign[:, None] * v_x * sign[None, :]
    v = np.zeros((2 * n, 2 * n))
    v[0::2, 0::2] = v_x
    v[1::2, 1::2] = v_p
    labels = ("click", "signal") + tuple(f"vac{i+1}" for i in range(m))
    return Cov(v, labels)


# --------------------------------------------------------------------------
# vacuum (dark-window) conditioning


def vacuum_condition(cov: Cov) -> Cov:
    """Condition on vacuum outcomes in all vacuum-box modes.

    Projecting the extra modes onto vacuum updates the kept block by the
    Schur complement V4 - C (V_vac + I)^(-1) C^T.
    """
    if cov.n_vacuum < 1:
        raise ValueError("input has no vacuum modes to condition on")
    v = cov.matrix
    v4 = v[:4, :4]
    c = v[:4, 4:]
    v_vac = v[4:, 4:]
    try:
        chol = cho_factor(v_vac + np.eye(v_vac.shape[0]))
    except np.linalg.LinAlgError as exc:
        raise ValueError("unphysical input: V_vac + I is not positive "
                         "definite") from exc
    out = v4 - c @ cho_solve(chol, c.T)
    return Cov(out, cov.labels[:2])


def _vacuum_project_scalars(v11, v33, v13, m_vac, w, s):
    """Per-x-block form of vacuum_condition for the symmetric family.

    Returns the conditioned (v11, v33, v13).  Much cheaper than the full
    matrix route when only the click/signal block is needed.
    """
    if w.size == 0:
        return v11, v33, v13
    chol = cho_factor(2.0 * np.eye(m_vac.shape[0]) + m_vac)
    gw = cho_solve(chol, w)
    gs = cho_solve(chol, s)
    return (v11 - float(w @ gw), v33 - float(s @ gs), v13 - float(w @ gs))


def windowed_click_signal_cov(params: OpoParams, f2: ModeGrid, click: ClickMode,
                              window: WindowSpec = None) -> Cov:
    """Click+signal covariance conditioned on a dark window (if any).

    The click mode is built at unit efficiency: the heralded signal state
    does not depend on the click-path efficiency, and this keeps the zero
    trigger-efficiency limit well defined.
    """
    base = build_click_signal_cov(params, f2, click, eta_c=1.0)
    if window is None or window.n_boxes == 0:
        return base
    m_vac, w, s = window_blocks(params, f2, click, window, eta_c=1.0)
    v11, v33, v13 = _vacuum_project_scalars(base.v11, base.v33, base.v13,
                                            m_vac, w, s)
    return two_mode_cov(v11, v33, v13)


# --------------------------------------------------------------------------
# click conditioning


@dataclass(frozen=True)
class RadialWigner:
    """Wigner function W(x, p) = (a1 + a2 (x^2+p^2)) exp(-a3 (x^2+p^2))."""

    a1: float
    a2: float
    a3: float

    def __call__(self, x, p=0.0):
        return wigner_eval(self, x, p)

    def norm(self) -> float:
        """Integral over phase space; unity for a valid state."""
        return np.pi * (self.a1 / self.a3 + self.a2 / self.a3**2)


def click_condition(cov4: Cov) -> RadialWigner:
    """Signal-mode Wigner function conditioned on a trigger click.

    The click heralds at least one photon in the trigger box; weighting by
    the photon number and tracing the trigger leaves a radial Wigner
    function in the signal phase space.
    """
    v11, v33 = cov4.v11, cov4.v33
    if v11 <= 1.0 + 1e-12:
        raise ValueError("no click information: the trigger mode carries no "
                         "excess noise (V11 <= 1)")
    csq = cov4.cross_sq
    a1 = (v11 * v33 - csq - v33) / (np.pi * (v11 - 1.0) * v33**2)
    a2 = csq / (np.pi * (v11 - 1.0) * v33**3)
    a3 = 1.0 / v33
    return RadialWigner(a1, a2, a3)


def wigner_eval(w: RadialWigner, x, p=0.0):
    """Evaluate a radial Wigner function at phase-space point(s) (x, p)."""
    r2 = np.asarray(x, dtype=float)**2 + np.asarray(p, dtype=float)**2
    out = (w.a1 + w.a2 * r2) * np.exp(-w.a3 * r2)
    return float(out) if out.ndim == 0 else out


def wigner_one_photon(x, p=0.0):
    """Wigner function of the ideal one-photon state in these units."""
    r2 = np.asarray(x, dtype=float)**2 + np.asarray(p, dtype=float)**2
    out = (2.0 * r2 - 1.0) * np.exp(-r2) / np.pi
    return float(out) if out.ndim == 0 else out


def fidelity_one_photon(cov4: Cov) -> float:
    """One-photon fidelity 2 pi int W_click W_{n=1} of the heralded state."""
    v11, v33 = cov4.v11, cov4.v33
    if v11 <= 1.0 + 1e-12:
        raise ValueError("no click information: the trigger mode carries no "
                         "excess noise (V11 <= 1)")
    csq = cov4.cross_sq
    num = 2.0 * (v11 - 1.0) * (v33**2 - 1.0) + 2.0 * (3.0 - v33) * csq
    return num / ((v11 - 1.0) * (1.0 + v33)**3)


def windowed_fidelity(params: OpoParams, f2: ModeGrid, click: ClickMode,
                      window: WindowSpec = None) -> float:
    """One-photon fidelity of the click-heralded state after a dark window."""
    return fidelity_one_photon(
        windowed_click_signal_cov(params, f2, click, window))


def symplectic_eigenvalues(v: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a covariance matrix (>= 1 for physicality).

    Quadrature ordering (x1, p1, x2, p2, ...); vacuum = identity.
    """
    v = np.asarray(v, dtype=float)
    n = v.shape[0] // 2
    omega = np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    ev = np.linalg.eigvals(1j * omega @ v)
    return np.sort(np.abs(ev))[::2]
