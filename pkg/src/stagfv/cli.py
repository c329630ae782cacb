"""Command line entry points: run a configured case or dump an exact solution."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .driver import parse_config, run_case, write_outputs, _FMT, SCHEMA_VERSION
from .errors import ConfigurationError, StagfvError
from .riemann import PRESETS, sample_profile, solve_star

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STEP = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stagfv",
        description="1D staggered internal-energy Euler solver",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a configured case")
    run_p.add_argument("config", help="path to the key=value configuration file")
    run_p.add_argument("--out", default="out", help="output directory")
    run_p.add_argument(
        "--no-correction",
        action="store_true",
        help="disable the corrective heat source (negative experiment)",
    )

    rp = sub.add_parser("riemann", help="dump the exact solution of a preset")
    rp.add_argument("preset", choices=sorted(PRESETS))
    rp.add_argument("--samples", type=int, default=200)
    rp.add_argument("--time", type=float, default=None)
    rp.add_argument("--out", default=None, help="output file (default stdout)")
    return parser


def _cmd_run(args) -> int:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = parse_config(text)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = run_case(config, no_correction=args.no_correction)
    try:
        write_outputs(report, args.out)
    except OSError as exc:
        print(f"error writing outputs to {args.out}: {exc}", file=sys.stderr)
        return EXIT_STEP
    if report.failure:
        print(f"step failure after {report.n_steps} steps: {report.failure}", file=sys.stderr)
        print(f"partial outputs written to {args.out}", file=sys.stderr)
        return EXIT_STEP
    print(
        f"completed {report.n_steps} steps to t={report.final_state.time:.6g} "
        f"in {report.wall_clock:.2f}s; L1 density error {report.l1_error:.4e}; "
        f"outputs in {args.out}"
    )
    return EXIT_OK


def _cmd_riemann(args) -> int:
    preset = PRESETS[args.preset]
    t = args.time if args.time is not None else preset.t_end
    sol = solve_star(preset.left, preset.right, preset.gamma)
    x = np.linspace(0.0, 1.0, args.samples)
    rho, u, p = sample_profile(sol, x, t, preset.x0)
    lines = [f"# schema={SCHEMA_VERSION} preset={args.preset} t={t!r}", "x,rho,u,p"]
    for xi, ri, ui, pi in zip(x, rho, u, p):
        lines.append(",".join(_FMT % v for v in (xi, ri, ui, pi)))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_riemann(args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StagfvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STEP


if __name__ == "__main__":
    sys.exit(main())
