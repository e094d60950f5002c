"""Signal-mode optimization for maximal one-photon fidelity.

Two optimizers are provided.  optimize_fixed_point iterates the stationarity
condition of the fidelity functional (an integral equation in the mode
function) and applies only to the plain click-conditioned problem.
optimize_general maximizes the dark-window-conditioned fidelity directly by
projected gradient ascent on the unit sphere of mode functions; at zero
window the two agree.

Both work on a uniform grid around the click time with the inner products
taken in the exact piecewise-linear sense.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .gaussian_conditioning import (Cov, WindowSpec, build_click_signal_cov,
                                    fidelity_one_photon, two_mode_cov,
                                    window_blocks, windowed_fidelity)
from .mode_functions import (ClickMode, ModeGrid, convolution_weight_matrix,
                             exp_mode, gram_matrix, norm_matrix, normalize)
from .opo_model import (GAMMA, OpoParams, anomalous_kernel, kernel_anomalous,
                        kernel_normal, normal_kernel)


@dataclass(frozen=True)
class OptimizerConfig:
    """Iteration controls shared by both optimizers.

    alpha is the relaxation weight of the fixed-point iteration (new iterate
    = normalized mix alpha*old + (1-alpha)*update); it is raised
    automatically when a step would lower the fidelity.
    """

    alpha: float = 0.5
    tol: float = 1e-9
    max_iter: int = 10000

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("alpha must lie in [0, 1)")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


class ConvergenceError(RuntimeError):
    """Raised when an optimizer exhausts max_iter; carries diagnostics."""

    def __init__(self, message, last_mode=None, residual=None, iterations=None):
        super().__init__(message)
        self.last_mode = last_mode
        self.residual = residual
        self.iterations = iterations


def c_coefficients(cov4: Cov, params: OpoParams):
    """Coefficients (c1, c2) of the stationarity integral equation.

    The optimal mode satisfies xi f(t) = c1 (K_n * f)(t) + c2 K_a(t - t_c)/2
    scaled by the cross correlation; c1 and c2 depend on f only through the
    covariance elements.
    """
    v11, v33 = cov4.v11, cov4.v33
    if v11 <= 1.0 + 1e-12:
        raise ValueError("no click information: V11 <= 1")
    u = v11 - 1.0
    s = cov4.cross_sq
    es = params.eta_s
    c1 = 4.0 * es * (1.0 / (1.0 + v33)**2
                     - s / (u * (1.0 + v33)**3)
                     - 2.0 * (v33 - 1.0) / (1.0 + v33)**3
                     - 3.0 * (3.0 - v33) * s / (u * (1.0 + v33)**4))
    c2 = (8.0 * es * params.eta_t * params.dt_c * (3.0 - v33)
          / (u * (1.0 + v33)**3))
    return c1, c2


# --------------------------------------------------------------------------
# shared grid machinery


class _GridProblem:
    """Precomputed operators for fidelity evaluation on a fixed grid.

    Works at unit click-mode efficiency throughout (the conditioned signal
    state is invariant under it); the vacuum boxes carry the physical
    trigger efficiency.
    """

    def __init__(self, params: OpoParams, click: ClickMode,
                 window: WindowSpec = None, half_width: float = 10.0 / GAMMA,
                 n_points: int = 801):
        self.params = params
        self.click = click
        grid = exp_mode(params, t_c=click.t_c, half_width=half_width,
                        n=n_points)
        self.grid = grid
        kn = normal_kernel(params)
        ka = anomalous_kernel(params)
        self.norm_mat = norm_matrix(grid.n, grid.dt)
        self.q_n = gram_matrix(grid, kn)
        self.conv_n = convolution_weight_matrix(grid, kn, grid.times)
        # K_a(t - t_c) sampled on the grid (source term of the iteration)
        self.ka_vec = kernel_anomalous(params, grid.times - click.t_c)
        # click-to-signal coupling row: c(f) = v . f
        k_row = convolution_weight_matrix(grid, ka, click.t_c)[0]
        self.a_const = 2.0 * click.dt_c * kernel_normal(params, 0.0)
        es = params.eta_s
        v = 2.0 * np.sqrt(es * click.dt_c) * k_row
        b_mat = 2.0 * es * self.q_n
        if window is not None and window.n_boxes and params.eta_t > 0.0:
            m_vac, w, _ = window_blocks(params, grid, click, window, eta_c=1.0)
            chol = cho_factor(2.0 * np.eye(m_vac.shape[0]) + m_vac)
            centers = window.box_centers(click)
            k_cv = (2.0 * np.sqrt(es * params.eta_t * window.dt_box)
                    * convolution_weight_matrix(grid, ka, centers))
            gw = cho_solve(chol, w)
            gk = cho_solve(chol, k_cv)
            self.a_const -= float(w @ gw)
            v = v - k_cv.T @ gw
            b_mat = b_mat - k_cv.T @ gk
        self.v_vec = v
        self.b_mat = b_mat

    def norm(self, values) -> float:
        return float(np.sqrt(values @ self.norm_mat @ values))

    def normalized(self, values) -> np.ndarray:
        return values / self.norm(values)

    def cov_entries(self, values):
        """(v11, v33, v13) of the window-conditioned click+signal block."""
        b = 1.0 + float(values @ self.b_mat @ values)
        c = float(self.v_vec @ values)
        return 1.0 + self.a_const, b, c

    def fidelity(self, values) -> float:
        v11, b, c = self.cov_entries(values)
        a = self.a_const
        return (2.0 * a * (b * b - 1.0) + 2.0 * (3.0 - b) * c * c) \
            / (a * (1.0 + b)**3)

    def fidelity_grad(self, values):
        """Objective and its Euclidean gradient in the grid coefficients."""
        a = self.a_const
        b = 1.0 + float(values @ self.b_mat @ values)
        c = float(self.v_vec @ values)
        denom = a * (1.0 + b)**3
        num = 2.0 * a * (b * b - 1.0) + 2.0 * (3.0 - b) * c * c
        f = num / denom
        df_db = (4.0 * a * b - 2.0 * c * c) / denom \
            - 3.0 * num / (a * (1.0 + b)**4)
        df_dc = 4.0 * (3.0 - b) * c / denom
        grad = df_db * 2.0 * (self.b_mat @ values) + df_dc * self.v_vec
        return f, grad

    def mode(self, values) -> ModeGrid:
        return self.grid.with_values(values)


def _fix_sign(values, mid):
    return -values if values[mid] < 0.0 else values


# --------------------------------------------------------------------------
# fixed-point iteration (no dark window)


def optimize_fixed_point(params: OpoParams, click: ClickMode,
                         cfg: OptimizerConfig = OptimizerConfig(),
                         half_width: float = 10.0 / GAMMA,
                         n_points: int = 801, stats: dict = None):
    """Optimal signal mode from the stationarity integral equation.

    Iterates f -> N(c1 (K_n*f) + c2' K_a(t-t_c)/2) with alpha-relaxation.
    The raw update is shifted by a multiple of f when the stationarity
    multiplier is negative (the plain map can otherwise converge to a
    fidelity minimum), and alpha is raised whenever a step would lower the
    fidelity, which makes the iteration monotone.

    Returns (f_op, fidelity).
    """
    if params.epsilon == 0.0:
        f0 = exp_mode(params, t_c=click.t_c, half_width=half_width, n=n_points)
        return f0, float("nan")
    prob = _GridProblem(params, click, None, half_width, n_points)
    es, dtc = params.eta_s, click.dt_c
    mid = (n_points - 1) // 2
    values = prob.grid.values.copy()
    fid = prob.fidelity(values)
    alpha = cfg.alpha
    residual = np.inf
    diff_prev = None
    rho_avg = None
    for it in range(cfg.max_iter):
        v11, v33, v13 = prob.cov_entries(values)
        c1, c2 = c_coefficients(two_mode_cov(v11, v33, v13),
                                _unit_click_params(params))
        rhs = (c1 * (prob.conv_n @ values)
               + c2 * (v13 / np.sqrt(es * dtc)) * prob.ka_vec / 2.0)
        # shift towards f when the multiplier xi = <rhs, f> is too small:
        # the normalized map is a power iteration on the gradient field and
        # needs a positive dominant eigenvalue to ascend
        nr = prob.norm(rhs)
        xi = float(rhs @ prob.norm_mat @ values)
        tau = max(0.0, 0.1 * nr - xi)
        g = prob.normalized(_fix_sign(rhs + tau * values, mid))
        backtracked = False
        while True:
            trial = prob.normalized((1.0 - alpha) * g + alpha * values)
            fid_trial = prob.fidelity(trial)
            if fid_trial >= fid - 1e-14:
                break
            alpha = 1.0 - (1.0 - alpha) / 2.0
            backtracked = True
            if 1.0 - alpha < 1e-8:
                trial, fid_trial = values, fid
                break
        diff = trial - values
        residual = float(np.max(np.abs(diff)))
        # adapt the damping: estimate the dominant eigenvalue rho of the
        # undamped map from successive differences and pick the alpha that
        # cancels it ((1-alpha) rho + alpha = 0); backtracking still guards
        # against a bad estimate
        if diff_prev is not None and not backtracked:
            den = float(diff_prev @ prob.norm_mat @ diff_prev)
            if den > 0.0:
                rho_d = float(diff @ prob.norm_mat @ diff_prev) / den
                rho_avg = rho_d if rho_avg is None else 0.7 * rho_avg + 0.3 * rho_d
                if it % 20 == 19 and rho_avg is not None:
                    rho = (rho_avg - alpha) / (1.0 - alpha)
                    if rho < -1e-6:
                        alpha = min(max(rho / (rho - 1.0), 0.0), 1.0 - 1e-7)
                    elif rho < 0.999:
                        alpha = cfg.alpha
                    rho_avg = None
        diff_prev = diff
        values, fid = trial, fid_trial
        if stats is not None:
            stats.setdefault("fidelity_history", []).append(fid)
        if residual < cfg.tol:
            if stats is not None:
                stats.update(iterations=it + 1, residual=residual)
            f_op = prob.mode(_fix_sign(values, mid))
            return f_op, fid
    raise ConvergenceError(
        f"fixed-point iteration did not converge in {cfg.max_iter} steps "
        f"(last residual {residual:.3e})",
        last_mode=prob.mode(values), residual=residual,
        iterations=cfg.max_iter)


def _unit_click_params(params: OpoParams) -> OpoParams:
    """Copy of params with the trigger path at unit efficiency.

    The stationarity map and the conditioned state are invariant under the
    click-path efficiency, so the iteration always runs at eta_t = 1 and
    stays well defined for eta_t = 0.
    """
    if params.eta_t == 1.0:
        return params
    return OpoParams(epsilon=params.epsilon, eta_t=1.0,
                     eta_s=params.eta_s, dt_c=params.dt_c)


# --------------------------------------------------------------------------
# general projected gradient ascent (any dark window)


def optimize_general(params: OpoParams, click: ClickMode,
                     window: WindowSpec = None,
                     cfg: OptimizerConfig = OptimizerConfig(),
                     half_width: float = 10.0 / GAMMA,
                     n_points: int = 801, stats: dict = None):
    """Maximize the window-conditioned fidelity over unit-norm real modes.

    Projected gradient ascent on the unit sphere (norm taken in the exact
    piecewise-linear sense) with Barzilai-Borwein step sizes and a
    backtracking line search, so the fidelity never decreases.

    Returns (f_op, fidelity).
    """
    if params.epsilon == 0.0:
        f0 = exp_mode(params, t_c=click.t_c, half_width=half_width, n=n_points)
        return f0, float("nan")
    prob = _GridProblem(params, click, window, half_width, n_points)
    mid = (n_points - 1) // 2
    values = prob.grid.values.copy()
    fid, grad = prob.fidelity_grad(values)
    step = 1.0
    prev_values = prev_tangent = None
    for it in range(cfg.max_iter):
        # tangent direction: remove the radial component of the gradient
        radial = float(grad @ prob.norm_mat @ values)
        tangent = grad - radial * values
        t_norm = prob.norm(tangent)
        if t_norm < cfg.tol:
            if stats is not None:
                stats.update(iterations=it + 1, residual=t_norm)
            return prob.mode(_fix_sign(values, mid)), fid
        if prev_values is not None:
            dv = values - prev_values
            dg = tangent - prev_tangent
            denom = float(dv @ prob.norm_mat @ dg)
            if abs(denom) > 1e-300:
                step = abs(float(dv @ prob.norm_mat @ dv) / denom)
            step = min(max(step, 1e-12), 1e6)
        prev_values, prev_tangent = values, tangent
        eta = step
        while True:
            trial = prob.normalized(values + eta * tangent)
            fid_trial = prob.fidelity(trial)
            if fid_trial >= fid - 1e-15:
                break
            eta /= 2.0
            if eta < 1e-16:
                trial, fid_trial = values, fid
                break
        residual = float(np.max(np.abs(trial - values)))
        values = trial
        fid, grad = prob.fidelity_grad(values)
        if stats is not None:
            stats.setdefault("fidelity_history", []).append(fid)
        if residual < cfg.tol:
            if stats is not None:
                stats.update(iterations=it + 1, residual=residual)
            return prob.mode(_fix_sign(values, mid)), fid
    raise ConvergenceError(
        f"gradient ascent did not converge in {cfg.max_iter} steps "
        f"(last tangent norm {t_norm:.3e})",
        last_mode=prob.mode(values), residual=t_norm, iterations=cfg.max_iter)


def general_objective(params: OpoParams, click: ClickMode,
                      window: WindowSpec = None,
                      half_width: float = 10.0 / GAMMA, n_points: int = 801):
    """Objective closure for the general optimizer.

    Returns (grid, fn) where fn(values) -> (fidelity, gradient) as a plain
    function of the raw (not necessarily normalized) grid coefficients;
    used for finite-difference verification of the analytic gradient.
    """
    prob = _GridProblem(params, click, window, half_width, n_points)
    return prob.grid, prob.fidelity_grad


# --------------------------------------------------------------------------
# phase stationarity


def phase_stationarity_check(params: OpoParams, f: ModeGrid,
                             click: ClickMode, delta: float = 1e-4) -> float:
    """First-order fidelity response to a small imaginary phase profile.

    Perturbs f -> f e^{i delta g(t)} with the smooth odd profile
    g = (t - t_c) gamma, evaluates the fidelity through the complex-capable
    covariance (V14 != 0), and returns |dF/d delta| at delta = 0 by central
    differences.  Constant-phase (real) modes give a residual at rounding
    level.
    """
    g = (f.times - click.t_c) * GAMMA

    def fid(d):
        fr = f.with_values(f.values * np.cos(d * g))
        fi = f.with_values(f.values * np.sin(d * g))
        cov = build_click_signal_cov(params, fr, click, eta_c=1.0, f2_imag=fi)
        return fidelity_one_photon(cov)

    return abs(fid(delta) - fid(-delta)) / (2.0 * delta)
