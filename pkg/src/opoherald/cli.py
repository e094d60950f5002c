"""Command-line interface: figure data and parameter sweeps as CSV.

All commands are deterministic given their flags.  Output files are plain
comma-separated data with '#'-prefixed header lines and 12-significant-digit
formatting.  Exit codes: 0 success, 2 usage error, 3 numerical failure.

Flags mirror the dimensionless groups of the model: --epsilon (epsilon over
gamma), --T (window duration times gamma), --dtc (click box width times
gamma), --eta-t / --eta-s (detector efficiencies).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .gaussian_conditioning import (WindowSpec, wigner_eval,
                                    windowed_click_signal_cov,
                                    click_condition, fidelity_one_photon,
                                    windowed_fidelity)
from .heralding_rates import click_rate, production_rate_windowed
from .mode_functions import ClickMode, ModeGrid, exp_mode
from .mode_optimizer import (ConvergenceError, OptimizerConfig,
                             optimize_fixed_point, optimize_general)
from .opo_model import OpoParams

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def _write_csv(path, header_lines, column_names, rows):
    with open(path, "w") as fh:
        fh.write(f"# schema_version={SCHEMA_VERSION}\n")
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("# " + ",".join(column_names) + "\n")
        for row in rows:
            fh.write(",".join(c if isinstance(c, str) else _fmt(c)
                              for c in row) + "\n")


def _params(args) -> OpoParams:
    return OpoParams(epsilon=args.epsilon, eta_t=args.eta_t,
                     eta_s=args.eta_s, dt_c=args.dtc)


def _click(args) -> ClickMode:
    return ClickMode(0.0, args.dtc)


def _window(args) -> WindowSpec:
    if getattr(args, "T", 0.0) > 0.0:
        return WindowSpec(args.T, args.dtc)
    return None


def _signal_mode(args, params, click):
    if args.mode == "exp":
        return exp_mode(params, t_c=click.t_c)
    if args.mode == "optimized":
        window = _window(args)
        if window is None:
            f, _ = optimize_fixed_point(params, click)
        else:
            f, _ = optimize_general(params, click, window)
        return f
    return ModeGrid.from_csv(args.mode_file)


# --------------------------------------------------------------------------
# commands


def cmd_wigner_surface(args) -> int:
    """Click-conditioned signal Wigner function on an (x, p) grid."""
    params = _params(args)
    click = _click(args)
    f = _signal_mode(args, params, click)
    cov = windowed_click_signal_cov(params, f, click, _window(args))
    w = click_condition(cov)
    fid = fidelity_one_photon(cov)
    xs = np.linspace(-args.extent, args.extent, args.grid_points)
    xg, pg = np.meshgrid(xs, xs, indexing="ij")
    wg = wigner_eval(w, xg, pg)
    rows = zip(xg.ravel(), pg.ravel(), wg.ravel())
    _write_csv(args.out,
               [f"epsilon={_fmt(args.epsilon)} T={_fmt(args.T)} "
                f"dtc={_fmt(args.dtc)} eta_t={_fmt(args.eta_t)} "
                f"eta_s={_fmt(args.eta_s)} mode={args.mode}",
                f"fidelity_one_photon={_fmt(fid)}",
                f"wigner_origin={_fmt(wigner_eval(w, 0.0, 0.0))}"],
               ("x", "p", "W"), rows)
    return EXIT_OK


def cmd_fidelity_sweep(args) -> int:
    """Fidelity versus epsilon or window duration, optionally optimized."""
    values = np.linspace(args.start, args.stop, args.steps)
    rows = []
    for v in values:
        if args.param == "epsilon":
            params = OpoParams(epsilon=v, eta_t=args.eta_t,
                               eta_s=args.eta_s, dt_c=args.dtc)
            t_window = args.T
        else:
            params = _params(args)
            t_window = v
        click = ClickMode(0.0, args.dtc)
        window = WindowSpec(t_window, args.dtc) if t_window > 0 else None
        f_exp = exp_mode(params, t_c=click.t_c)
        f1_exp = windowed_fidelity(params, f_exp, click, window)
        if not args.optimize:
            rows.append((v, f1_exp, "", "ok"))
            continue
        try:
            _, f1_opt = optimize_general(params, click, window)
            rows.append((v, f1_exp, f1_opt, "ok"))
        except ConvergenceError as exc:
            print(f"warning: optimizer failed at {args.param}={v:g}: {exc}",
                  file=sys.stderr)
            rows.append((v, f1_exp, "", "failed"))
    _write_csv(args.out,
               [f"sweep={args.param} epsilon={_fmt(args.epsilon)} "
                f"T={_fmt(args.T)} dtc={_fmt(args.dtc)} "
                f"eta_t={_fmt(args.eta_t)} eta_s={_fmt(args.eta_s)} "
                f"optimize={args.optimize}"],
               (args.param, "F1_exp_mode", "F1_optimized", "status"), rows)
    return EXIT_OK


def cmd_rate_sweep(args) -> int:
    """Production rate versus epsilon at fixed window and efficiency."""
    values = np.linspace(args.start, args.stop, args.steps)
    click = ClickMode(0.0, args.dtc)
    rows = []
    for e in values:
        params = OpoParams(epsilon=e, eta_t=args.eta_t, eta_s=args.eta_s,
                           dt_c=args.dtc)
        if args.T > 0:
            r = production_rate_windowed(params, WindowSpec(args.T, args.dtc),
                                         click)
        else:
            r = click_rate(params)
        rows.append((e, args.T, args.eta_t, r))
    _write_csv(args.out,
               [f"T={_fmt(args.T)} dtc={_fmt(args.dtc)} "
                f"eta_t={_fmt(args.eta_t)}"],
               ("epsilon_over_gamma", "T_gamma", "eta_t", "rate_over_gamma"),
               rows)
    return EXIT_OK


def cmd_optimize_mode(args) -> int:
    """Optimal signal mode as a (t, f) table with convergence metadata."""
    params = _params(args)
    if params.epsilon == 0.0:
        print("error: no click information (epsilon = 0)", file=sys.stderr)
        return EXIT_NUMERICAL
    click = _click(args)
    window = _window(args)
    cfg = OptimizerConfig(alpha=args.alpha, tol=args.tol,
                          max_iter=args.max_iter)
    stats = {}
    try:
        if window is None:
            f, fid = optimize_fixed_point(params, click, cfg, stats=stats)
        else:
            f, fid = optimize_general(params, click, window, cfg, stats=stats)
    except ConvergenceError as exc:
        trace_path = args.out + ".trace"
        if exc.last_mode is not None:
            exc.last_mode.to_csv(trace_path,
                                 [f"unconverged residual={exc.residual:g}"])
        print(f"error: {exc} (last iterate written to {trace_path})",
              file=sys.stderr)
        return EXIT_NUMERICAL
    _write_csv(args.out,
               [f"epsilon={_fmt(args.epsilon)} T={_fmt(args.T)} "
                f"dtc={_fmt(args.dtc)} eta_t={_fmt(args.eta_t)} "
                f"eta_s={_fmt(args.eta_s)}",
                f"fidelity={_fmt(fid)}" if np.isfinite(fid) else "fidelity=nan",
                f"iterations={stats.get('iterations', 0)}",
                f"residual={_fmt(stats.get('residual', 0.0))}"],
               ("t", "f"), list(zip(f.times, f.values)))
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing


def _add_common(p):
    p.add_argument("--epsilon", type=float, required=True,
                   help="nonlinear gain over the cavity decay rate")
    p.add_argument("--T", type=float, default=0.0,
                   help="dark-window duration times the decay rate")
    p.add_argument("--dtc", type=float, default=0.02,
                   help="click box width times the decay rate")
    p.add_argument("--eta-t", type=float, default=1.0, dest="eta_t",
                   help="trigger detector efficiency")
    p.add_argument("--eta-s", type=float, default=1.0, dest="eta_s",
                   help="signal detector efficiency")
    p.add_argument("--out", required=True, help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opoherald",
        description="Heralded single-photon preparation from a CW OPO: "
                    "Wigner surfaces, fidelity and rate sweeps, mode "
                    "optimization.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wigner-surface",
                       help="click-conditioned Wigner function grid")
    _add_common(p)
    p.add_argument("--mode", choices=("exp", "optimized", "file"),
                   default="exp")
    p.add_argument("--mode-file", help="mode CSV for --mode file")
    p.add_argument("--extent", type=float, default=3.0)
    p.add_argument("--grid-points", type=int, default=121)
    p.set_defaults(func=cmd_wigner_surface)

    p = sub.add_parser("fidelity-sweep", help="fidelity vs epsilon or T")
    _add_common(p)
    p.add_argument("--param", choices=("epsilon", "T"), default="epsilon")
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--optimize", action="store_true",
                   help="re-optimize the mode at every sweep point")
    p.set_defaults(func=cmd_fidelity_sweep)

    p = sub.add_parser("rate-sweep", help="production rate vs epsilon")
    _add_common(p)
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.set_defaults(func=cmd_rate_sweep)

    p = sub.add_parser("optimize-mode", help="optimal signal mode CSV")
    _add_common(p)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=10000)
    p.set_defaults(func=cmd_optimize_mode)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "fidelity-sweep" and args.steps < 2:
        parser.error("--steps must be >= 2")
    if (args.command == "wigner-surface" and args.mode == "file"
            and not args.mode_file):
        parser.error("--mode file requires --mode-file")
    try:
        return args.func(args)
    except (ValueError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
