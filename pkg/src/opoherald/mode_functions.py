"""Real temporal mode functions on uniform grids.

A mode is stored as samples on a uniform grid and interpreted as
piecewise-linear between samples and zero outside its support.  All
integrals against exponential-sum kernels (single convolutions and double
quadratic forms) are evaluated in closed form per linear segment, never by
sampled quadrature: the kernels have a cusp at tau = 0 that product-grid
quadrature handles poorly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import toeplitz

from .opo_model import GAMMA, ExpSumKernel, OpoParams

# --------------------------------------------------------------------------
# closed-form segment integrals
#
# For a segment of length h and x = a*h, the integrals of the two linear
# shape functions against e^{-a * distance} reduce to the four dimensionless
# functions below.  Each has a removable cancellation at x -> 0, so small x
# uses a truncated Taylor series.

_SERIES_CUT = 0.5

_P_COEF = [1 / 2, -1 / 3, 1 / 8, -1 / 30, 1 / 144, -1 / 840, 1 / 5760,
           -1 / 45360, 1 / 403200, -1 / 3991680]
_R_COEF = [1 / 2, -1 / 6, 1 / 24, -1 / 120, 1 / 720, -1 / 5040, 1 / 40320,
           -1 / 362880, 1 / 3628800, -1 / 39916800]
_S00_COEF = [1 / 4, -1 / 15, 1 / 72, -1 / 420, 1 / 2880, -1 / 22680,
             1 / 201600, -1 / 1995840, 1 / 21772800, -1 / 259459200]
_S01_COEF = [1 / 4, -1 / 10, 1 / 36, -1 / 168, 1 / 960, -1 / 6480,
             1 / 50400, -1 / 443520, 1 / 4354560, -1 / 47174400]


def _poly(coef, x):
    out = np.zeros_like(x)
    for c in reversed(coef):
        out = out * x + c
    return out


def _phi_p(x):
    """int_0^1 u e^{-x(1-u)} du = (1 - (1+x)e^{-x}) / x^2."""
    x = np.asarray(x, dtype=float)
    small = x < _SERIES_CUT
    xs = np.where(small, 0.0, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        closed = (1.0 - (1.0 + xs) * np.exp(-xs)) / xs**2
    return np.where(small, _poly(_P_COEF, x), closed)


def _phi_r(x):
    """int_0^1 (1-u) e^{-x(1-u)} du = (1-e^{-x})/x - P(x)."""
    x = np.asarray(x, dtype=float)
    small = x < _SERIES_CUT
    xs = np.where(small, 1.0, x)
    closed = (1.0 - np.exp(-xs)) / xs - _phi_p(xs)
    return np.where(small, _poly(_R_COEF, x), closed)


def _phi_s00(x):
    """Same-segment double integral of phi_L phi_L e^{-x|u-w|}."""
    x = np.asarray(x, dtype=float)
    small = x < _SERIES_CUT
    xs = np.where(small, 1.0, x)
    closed = (2 / (3 * xs) - 1 / xs**2 + 2 / xs**4
              - 2 * np.exp(-xs) * (1 / xs**3 + 1 / xs**4))
    return np.where(small, _poly(_S00_COEF, x), closed)


def _phi_s01(x):
    """Same-segment double integral of phi_L phi_R e^{-x|u-w|}."""
    x = np.asarray(x, dtype=float)
    small = x < _SERIES_CUT
    xs = np.where(small, 1.0, x)
    closed = (1 / (3 * xs) + np.exp(-xs) * (1 / xs**2 + 2 / xs**3 + 2 / xs**4)
              - 2 / xs**4)
    return np.where(small, _poly(_S01_COEF, x), closed)


# --------------------------------------------------------------------------
# mode grids


@dataclass(frozen=True)
class ModeGrid:
    """A real mode function sampled on a uniform grid.

    Piecewise-linear between samples, identically zero outside
    [t_start, t_end].  Values at the two endpoints may be nonzero, in which
    case the function jumps there (used for box modes).
    """

    t_start: float
    dt: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive; got {self.dt}")
        if v.ndim != 1 or v.size < 2:
            raise ValueError("a mode grid needs at least 2 samples")

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def t_end(self) -> float:
        return self.t_start + (self.n - 1) * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n)

    def same_grid(self, other: "ModeGrid") -> bool:
        return (self.n == other.n
                and abs(self.dt - other.dt) < 1e-12 * self.dt
                and abs(self.t_start - other.t_start) < 1e-9 * self.dt)

    def with_values(self, values) -> "ModeGrid":
        return ModeGrid(self.t_start, self.dt, np.asarray(values, dtype=float))

    def __call__(self, t):
        """Piecewise-linear evaluation; zero outside the support."""
        t = np.asarray(t, dtype=float)
        u = (t - self.t_start) / self.dt
        inside = (u >= 0.0) & (u <= self.n - 1)
        k = np.clip(np.floor(u).astype(int), 0, self.n - 2)
        frac = u - k
        val = (1 - frac) * self.values[k] + frac * self.values[k + 1]
        out = np.where(inside, val, 0.0)
        return out if out.ndim else float(out)

    def norm_sq(self) -> float:
        """Exact integral of f^2 for the piecewise-linear representation."""
        v = self.values
        return float(self.dt / 3.0
                     * np.sum(v[:-1]**2 + v[:-1] * v[1:] + v[1:]**2))

    def to_csv(self, path, header_lines=()) -> None:
        """Two-column CSV (t, f) with '#'-prefixed header lines."""
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write("# t,f\n")
            for t, v in zip(self.times, self.values):
                fh.write(f"{t:.12g},{v:.12g}\n")

    @staticmethod
    def from_csv(path) -> "ModeGrid":
        data = np.loadtxt(path, delimiter=",", comments="#")
        t, v = data[:, 0], data[:, 1]
        dts = np.diff(t)
        if not np.allclose(dts, dts[0], rtol=1e-9, atol=0.0):
            raise ValueError("mode CSV must use a uniform time grid")
        return ModeGrid(float(t[0]), float(dts[0]), v)


@dataclass(frozen=True)
class ClickMode:
    """Trigger click box: center time t_c and width dt_c."""

    t_c: float
    dt_c: float

    def __post_init__(self):
        if self.dt_c <= 0.0:
            raise ValueError(f"dt_c must be positive; got {self.dt_c}")

    def box_mode(self) -> ModeGrid:
        """The normalized box mode 1/sqrt(dt_c) on the click interval."""
        v = 1.0 / np.sqrt(self.dt_c)
        return ModeGrid(self.t_c - self.dt_c / 2, self.dt_c, np.array([v, v]))


def norm_matrix(n: int, dt: float) -> np.ndarray:
    """Gram matrix of the hat basis: f.values @ N @ f.values = int f^2."""
    m = np.zeros((n, n))
    i = np.arange(n - 1)
    np.add.at(m, (i, i), dt / 3.0)
    np.add.at(m, (i + 1, i + 1), dt / 3.0)
    np.add.at(m, (i, i + 1), dt / 6.0)
    np.add.at(m, (i + 1, i), dt / 6.0)
    return m


def normalize(f: ModeGrid) -> ModeGrid:
    """Scale to unit L2 norm (exact piecewise-linear quadrature)."""
    nsq = f.norm_sq()
    if nsq <= 0.0:
        raise ValueError("degenerate mode: cannot normalize the zero function")
    return f.with_values(f.values / np.sqrt(nsq))


def exp_mode(params: OpoParams, t_c: float = 0.0, half_width: float = 10.0 / GAMMA,
             n: int = 801) -> ModeGrid:
    """Sampled sqrt(g/2) e^{-g|t-t_c|/2}, the zero-intensity optimal mode.

    n must be odd so the cusp at t_c falls on a sample point; normalization
    absorbs the truncation to t_c +- half_width.
    """
    if half_width <= 0.0:
        raise ValueError("half_width must be positive")
    if n < 3 or n % 2 == 0:
        raise ValueError("n must be odd and >= 3")
    dt = 2.0 * half_width / (n - 1)
    t = t_c - half_width + dt * np.arange(n)
    v = np.sqrt(GAMMA / 2.0) * np.exp(-GAMMA * np.abs(t - t_c) / 2.0)
    return normalize(ModeGrid(t[0], dt, v))


# --------------------------------------------------------------------------
# exact kernel integrals


def _merged_segments(f: ModeGrid, g: ModeGrid):
    """Common breakpoints covering both supports, with per-segment endpoint
    values of f and g (which are linear on every merged segment)."""
    nodes = np.union1d(np.round(f.times, 14), np.round(g.times, 14))
    h = np.diff(nodes)
    keep = h > 1e-13
    left, right = nodes[:-1][keep], nodes[1:][keep]
    mid_frac = 1e-9  # evaluate just inside to dodge support-edge jumps
    fa = f(left + mid_frac * (right - left))
    fb = f(right - mid_frac * (right - left))
    ga = g(left + mid_frac * (right - left))
    gb = g(right - mid_frac * (right - left))
    return left, right, fa, fb, ga, gb


def kernel_quadratic_form(f: ModeGrid, g: ModeGrid, kernel: ExpSumKernel) -> float:
    """Exact double integral  int int f(t) k(t-t') g(t') dt dt'.

    Segment pairs are either time-ordered (the exponential factorizes) or
    coincide (closed-form square integral with the cusp on the diagonal);
    merging the two grids removes every partial overlap.
    """
    left, right, fa, fb, ga, gb = _merged_segments(f, g)
    h = right - left
    total = 0.0
    for c, a in kernel.terms:
        x = a * h
        p, r = _phi_p(x), _phi_r(x)
        # f-segment strictly left of g-segment, and the mirrored ordering
        amt_f = h * (fa * p + fb * r)   # f as left segment
        amt_g = h * (ga * p + gb * r)   # g as left segment
        bmt_g = h * (ga * r + gb * p)   # g as right segment
        bmt_f = h * (fa * r + fb * p)   # f as right segment
        decay = np.exp(-x)
        s_fg = 0.0
        s_gf = 0.0
        ordered = 0.0
        for k in range(h.size):
            ordered += bmt_g[k] * s_fg + bmt_f[k] * s_gf
            # decay over segment k covers the gap to later segments; the
            # just-added segment has zero gap to its neighbour
            s_fg = s_fg * decay[k] + amt_f[k]
            s_gf = s_gf * decay[k] + amt_g[k]
        diag = np.sum(h**2 * (_phi_s00(x) * (fa * ga + fb * gb)
                              + _phi_s01(x) * (fa * gb + fb * ga)))
        total += c * (ordered + diag)
    return float(total)


def convolution_weight_matrix(f: ModeGrid, kernel: ExpSumKernel, ts) -> np.ndarray:
    """Node-weight matrix W with W @ f.values = int f(t') k(t - t') dt'.

    Row i holds the exact piecewise-linear integration weights for
    evaluation time ts[i].
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    n = f.n
    h = f.dt
    tl = f.times[:-1]            # left ends of the n-1 segments
    w = np.zeros((ts.size, n))
    for c, a in kernel.terms:
        x = a * h
        p = float(_phi_p(np.array(x)))
        r = float(_phi_r(np.array(x)))
        dl = ts[:, None] - (tl[None, :] + h)   # distance to segment right end
        dr = tl[None, :] - ts[:, None]         # distance to segment left end
        right_of = dl >= 0.0                   # evaluation point right of seg
        left_of = dr >= 0.0
        wl = np.where(right_of, np.exp(-a * np.maximum(dl, 0.0)) * h * p, 0.0)
        wr = np.where(right_of, np.exp(-a * np.maximum(dl, 0.0)) * h * r, 0.0)
        wl += np.where(left_of, np.exp(-a * np.maximum(dr, 0.0)) * h * r, 0.0)
        wr += np.where(left_of, np.exp(-a * np.maximum(dr, 0.0)) * h * p, 0.0)
        # evaluation point interior to a segment: split the segment there
        inside = ~(right_of | left_of)
        for i, k in zip(*np.nonzero(inside)):
            t = ts[i]
            h1 = t - tl[k]
            h2 = tl[k] + h - t
            x1, x2 = np.array(a * h1), np.array(a * h2)
            p1, r1 = float(_phi_p(x1)), float(_phi_r(x1))
            p2, r2 = float(_phi_p(x2)), float(_phi_r(x2))
            fr = h1 / h          # split-point value = (1-fr) v_k + fr v_{k+1}
            w_mid = h1 * r1 + h2 * r2
            wl[i, k] += h1 * p1 + (1 - fr) * w_mid
            wr[i, k] += h2 * p2 + fr * w_mid
        w[:, :-1] += c * wl
        w[:, 1:] += c * wr
    return w


def kernel_convolution(f: ModeGrid, kernel: ExpSumKernel, t) -> float:
    """Exact single integral  int f(t') k(t - t') dt'  per linear segment."""
    w = convolution_weight_matrix(f, kernel, t)
    out = w @ f.values
    return float(out[0]) if np.isscalar(t) or np.asarray(t).ndim == 0 else out


# cached hat-basis Gram matrices for the quadratic form on a fixed grid
_GRAM_CACHE: dict = {}


def gram_matrix(grid: ModeGrid, kernel: ExpSumKernel) -> np.ndarray:
    """Hat-basis Gram matrix Q with v @ Q @ w = int int v(t) k(t-t') w(t').

    Valid for any two modes sharing this grid.  Cached per (grid, kernel).
    """
    key = (round(grid.t_start, 12), round(grid.dt, 14), grid.n, kernel.terms)
    hit = _GRAM_CACHE.get(key)
    if hit is not None:
        return hit
    n, h = grid.n, grid.dt
    q = np.zeros((n, n))
    nseg = n - 1
    d = np.arange(nseg)
    for c, a in kernel.terms:
        x = a * h
        p = float(_phi_p(np.array(x)))
        r = float(_phi_r(np.array(x)))
        s00 = float(_phi_s00(np.array(x)))
        s01 = float(_phi_s01(np.array(x)))
        e = np.exp(-x * np.maximum(d - 1, 0))  # e^{-x(d-1)} for d >= 1
        # segment-pair blocks: d = l-k > 0 ordered, d = 0 same segment
        m00 = np.where(d == 0, s00, e * p * r) * c * h * h
        m01 = np.where(d == 0, s01, e * p * p) * c * h * h
        m10 = np.where(d == 0, s01, e * r * r) * c * h * h
        m11 = np.where(d == 0, s00, e * r * p) * c * h * h
        t00 = toeplitz(m00, m00)               # m00(-d) = m00(d)
        t01 = toeplitz(m10, m01)               # m01(-d) = m10(d)
        t10 = toeplitz(m01, m10)
        t11 = toeplitz(m11, m11)
        q[:-1, :-1] += t00
        q[:-1, 1:] += t01
        q[1:, :-1] += t10
        q[1:, 1:] += t11
    q = (q + q.T) / 2.0
    _GRAM_CACHE[key] = q
    return q
