"""Command-line interface.

Subcommands: r1d (fast 1D estimates), r2d (single direction), sweep
(direction grid with CSV/contour/SVG/figure output), compare (2D vs 1D
error table), facet (source-driven torus run), mgcheck (multigrid
residual table).  Every subcommand accepts ``--config FILE`` with flat
``key = value`` lines mirroring the long flag names; explicit flags win.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__, multigrid, ode1d, report, stefan, sweep
from .coeffs import parse_coefficient

FACET_COEFFICIENT = "tw(1.05,-1)"


def _floats(text: str) -> list[float]:
    """Comma list '0.5,0.7' or range 'start:stop:step' (stop inclusive)."""
    if ":" in text:
        start, stop, step_ = (float(v) for v in text.split(":"))
        count = int(round((stop - start) / step_))
        return [start + k * step_ for k in range(count + 1)]
    return [float(v) for v in text.split(",")]


def _power_of_two(text: str) -> int:
    M = int(text)
    if M < 4 or (M & (M - 1)) != 0:
        raise argparse.ArgumentTypeError(f"{text}: M must be a power of two >= 4")
    return M


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", default=None, metavar="FILE",
                   help="key = value file mirroring the flags; flags override")


def _add_solver_overrides(p: argparse.ArgumentParser, cycles_default=2):
    p.add_argument("--lam", type=float, default=stefan.LAMBDA_DEFAULT,
                   help="Stefan approximation parameter")
    p.add_argument("--tau-div", type=float, default=stefan.TAU_DIVISOR_DEFAULT,
                   help="time step divisor: tau = h/tau_div (lowered if unsafe)")
    p.add_argument("--cycles", type=int, default=cycles_default,
                   help="V-cycles per time step")
    p.add_argument("--L0", type=float, default=0.1)
    p.add_argument("--L1", type=float, default=0.9)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="heleshaw",
        description="Homogenized free-boundary velocity of Hele-Shaw flow "
                    "in space-time periodic media",
    )
    parser.add_argument("--version", action="version", version=f"heleshaw {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)
    subparsers = {}

    p = subs.add_parser("r1d", help="1D front integrator estimates of r(|q|)")
    p.add_argument("--g", required=True, help="coefficient: builtin name or expression")
    p.add_argument("--qmag", type=_floats, required=True,
                   help="|q| values: comma list or start:stop:step")
    p.add_argument("--eps", type=float, default=1e-2)
    p.add_argument("--T", type=float, default=20.0)
    p.add_argument("--spp", type=int, default=ode1d.DEFAULT_STEPS_PER_PERIOD,
                   help="integration steps per fast period")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.add_argument("--fig", default=None, help="render the r(|q|) curve to this file")
    subparsers["r1d"] = p

    p = subs.add_parser("r2d", help="single-direction breakthrough estimate")
    p.add_argument("--g", required=True)
    p.add_argument("--m1", type=int, required=True)
    p.add_argument("--m2", type=int, required=True)
    p.add_argument("--M", type=_power_of_two, required=True)
    p.add_argument("--sigma", type=float, default=None, help="default 6.4/M")
    _add_solver_overrides(p)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    subparsers["r2d"] = p

    p = subs.add_parser("sweep", help="direction-grid sweep with CSV output")
    p.add_argument("--g", required=True)
    p.add_argument("--M", type=_power_of_two, required=True)
    p.add_argument("--mmax", type=int, required=True,
                   help="first-quadrant grid |m1|,|m2| <= mmax")
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--workers", type=int, default=1)
    _add_solver_overrides(p)
    p.add_argument("--out", required=True, help="records CSV path")
    p.add_argument("--contour", default=None, help="contour matrix path")
    p.add_argument("--svg", default=None, help="SVG level curves path")
    p.add_argument("--fig", default=None, help="matplotlib contour figure path")
    p.add_argument("--levels", type=_floats, default=None,
                   help="contour levels (default: spread over the range)")
    subparsers["sweep"] = p

    p = subs.add_parser("compare", help="2D vs 1D error table on the x1 axis")
    p.add_argument("--g", required=True)
    p.add_argument("--M", type=_power_of_two, required=True)
    p.add_argument("--eps-inv", type=float, required=True)
    p.add_argument("--q", type=_floats, required=True, help="|q1| sample values")
    _add_solver_overrides(p)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.add_argument("--fig", default=None)
    subparsers["compare"] = p

    p = subs.add_parser("facet", help="source-driven free boundary on the torus")
    p.add_argument("--M", type=_power_of_two, required=True)
    p.add_argument("--eps-inv", type=float, required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--snap", type=float, required=True, help="snapshot interval")
    p.add_argument("--g", default=FACET_COEFFICIENT)
    p.add_argument("--lam", type=float, default=stefan.LAMBDA_DEFAULT)
    p.add_argument("--tau-div", type=float, default=stefan.TAU_DIVISOR_DEFAULT)
    p.add_argument("--cycles", type=int, default=1)
    p.add_argument("--source-amplitude", type=float, default=1500.0)
    p.add_argument("--source-radius", type=float, default=0.1)
    p.add_argument("--out", required=True, help="boundary polyline CSV path")
    p.add_argument("--fig", default=None)
    subparsers["facet"] = p

    p = subs.add_parser("mgcheck", help="multigrid residual contraction table")
    p.add_argument("--M", type=_power_of_two, default=1024)
    p.add_argument("--q1", type=float, default=-1.0)
    p.add_argument("--cycles", type=int, default=4)
    subparsers["mgcheck"] = p

    for p in subparsers.values():
        _add_common(p)
    return parser, subparsers


def _load_config(path) -> dict:
    values = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line without '=': {raw.rstrip()}")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def _apply_config(subparser: argparse.ArgumentParser, path) -> None:
    values = _load_config(path)
    known = {}
    for action in subparser._actions:
        if action.dest in values:
            raw = values.pop(action.dest)
            known[action.dest] = action.type(raw) if action.type else raw
            action.required = False  # the config satisfies this flag
    if values:
        raise SystemExit(f"unknown config keys: {', '.join(sorted(values))}")
    subparser.set_defaults(**known)


def _emit(text: str, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _cmd_r1d(args) -> int:
    field = parse_coefficient(args.g)
    qmags = np.array(args.qmag)
    rs = ode1d.sweep_r1(field, qmags, eps=args.eps, T=args.T, steps_per_period=args.spp)
    _emit(report.r1d_csv_text(qmags, rs), args.out)
    if args.fig:
        from . import figures

        figures.save_r_curve(qmags, rs, args.fig, title=f"r(|q|) for {args.g}")
    return 0


def _sweep_config(args, directions) -> sweep.SweepConfig:
    return sweep.SweepConfig(
        coefficient=args.g,
        M=args.M,
        directions=directions,
        sigma=args.sigma,
        lam=args.lam,
        tau_divisor=args.tau_div,
        cycles_per_step=args.cycles,
        L0=args.L0,
        L1=args.L1,
        workers=getattr(args, "workers", 1),
    )


def _cmd_r2d(args) -> int:
    config = _sweep_config(args, ((args.m1, args.m2),))
    record = sweep.run_direction(config, args.m1, args.m2)
    _emit(report.records_csv_text([record]), args.out)
    print(f"# wall {record.wall_seconds:.2f}s", file=sys.stderr)
    return 0


def _cmd_sweep(args) -> int:
    config = _sweep_config(args, sweep.SweepConfig.quadrant(args.mmax))
    records = sweep.sweep2d(config)
    report.write_records_csv(records, args.out)
    total = sum(r.wall_seconds for r in records)
    print(f"# {len(records)} directions, solver time {total:.1f}s", file=sys.stderr)
    flagged = [r for r in records if r.status != "ok"]
    if flagged:
        print(f"# flagged rows: {', '.join(f'({r.m1},{r.m2}):{r.status}' for r in flagged)}",
              file=sys.stderr)
    if args.contour or args.svg or args.fig:
        q1_axis, q2_axis, matrix = report.records_to_matrix(records)
        if args.contour:
            report.write_contour_matrix(records, args.contour)
        levels = args.levels or report.default_levels(matrix)
        if args.svg:
            report.render_contour_svg(q1_axis, q2_axis, matrix, levels, args.svg)
        if args.fig:
            from . import figures

            figures.save_contour(q1_axis, q2_axis, matrix, levels, args.fig,
                                 title=f"r(q) for {args.g}, M={args.M}")
    return 0


def _cmd_compare(args) -> int:
    result = sweep.compare_axis(
        args.g, args.M, args.eps_inv, args.q,
        lam=args.lam, tau_divisor=args.tau_div, cycles_per_step=args.cycles,
        L0=args.L0, L1=args.L1,
    )
    _emit(report.compare_csv_text(result.rows), args.out)
    print(f"# max error {result.max_error:.3e}", file=sys.stderr)
    if args.fig:
        from . import figures

        figures.save_compare(result.rows, args.fig,
                             title=f"{args.g}: M={args.M}, 1/eps={args.eps_inv:g}")
    return 0


def _cmd_facet(args) -> int:
    field = parse_coefficient(args.g).rescaled(1.0 / args.eps_inv)
    params = stefan.RunParams.for_torus(
        args.M, lam=args.lam, tau_divisor=args.tau_div, cycles_per_step=args.cycles
    )
    source = stefan.SourceSpec(amplitude=args.source_amplitude, radius=args.source_radius)
    result = stefan.run_facet(params, field, source, t_max=args.tmax,
                              snapshot_every=args.snap)
    report.write_boundary_csv(result.snapshots, args.out)
    print(f"# {len(result.snapshots)} snapshots, {result.diagnostics.steps} steps, "
          f"{result.diagnostics.wall_seconds:.1f}s, "
          f"monotonicity violations {result.diagnostics.monotonicity_violations}",
          file=sys.stderr)
    if args.fig:
        from . import figures

        figures.save_boundaries(result.snapshots, args.fig,
                                title=f"free boundary, M={args.M}, 1/eps={args.eps_inv:g}")
    return 0


def _cmd_mgcheck(args) -> int:
    history = multigrid.contraction_check(M=args.M, q1=args.q1, cycles=args.cycles)
    header = "iteration k " + " ".join(f"{k:>10d}" for k in range(len(history)))
    values = "residual    " + " ".join(f"{r:10.2e}" for r in history)
    print(header)
    print(values)
    factors = [history[k] / history[k + 1] for k in range(len(history) - 1)]
    print("# per-cycle reduction factors: "
          + ", ".join(f"{f:.1f}" for f in factors), file=sys.stderr)
    return 0


_COMMANDS = {
    "r1d": _cmd_r1d,
    "r2d": _cmd_r2d,
    "sweep": _cmd_sweep,
    "compare": _cmd_compare,
    "facet": _cmd_facet,
    "mgcheck": _cmd_mgcheck,
}


def _extract_config_path(argv):
    for i, token in enumerate(argv):
        if token == "--config":
            return argv[i + 1] if i + 1 < len(argv) else None
        if token.startswith("--config="):
            return token.split("=", 1)[1]
    return None


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()
    config_path = _extract_config_path(argv)
    if config_path and argv and argv[0] in subparsers:
        _apply_config(subparsers[argv[0]], config_path)
    args = parser.parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    raise SystemExit(main())
