"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 truncation breach, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import analytic
from .config import CONFIG_DIR, FIGURES, ConfigError, load_experiment, load_trap, shipped_config
from .experiments import Table, format_summary, modes_report, run_experiment, sweep, SWEEP_OUTPUTS
from .propagation import TruncationError

EXIT_OK, EXIT_CONFIG, EXIT_TRUNCATION, EXIT_NUMERICAL = 0, 2, 3, 4


def _override(cfg, args):
    changes = {}
    if getattr(args, "cutoff_b", None) is not None:
        changes["cutoff_b"] = args.cutoff_b
    if getattr(args, "cutoff_r", None) is not None:
        changes["cutoff_r"] = args.cutoff_r
    if getattr(args, "method", None):
        changes["method"] = args.method
    return replace(cfg, **changes) if changes else cfg


def _run(cfg, out_dir) -> int:
    result = run_experiment(cfg)
    written = result.write(out_dir)
    sys.stdout.write(format_summary(result.summary))
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_run(args) -> int:
    if not args.config:
        raise ConfigError("run needs --config PATH")
    cfg = _override(load_experiment(args.config), args)
    return _run(cfg, args.out or Path("out") / cfg.name)


def cmd_reproduce(args) -> int:
    cfg = _override(load_experiment(shipped_config(args.figure)), args)
    return _run(cfg, args.out or Path("out") / args.figure)


def cmd_sweep(args) -> int:
    if not args.config:
        raise ConfigError("sweep needs --config PATH")
    cfg = _override(load_experiment(args.config), args)
    values = [v.strip() for v in args.values.split(",") if v.strip()] if args.values else []
    outputs = [o.strip() for o in args.outputs.split(",") if o.strip()]
    if any(o not in SWEEP_OUTPUTS for o in outputs):
        raise ConfigError(f"--outputs must be drawn from {', '.join(SWEEP_OUTPUTS)}")
    table = sweep(cfg, args.axis, values, outputs, jobs=args.jobs)
    text = table.to_csv()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.csv").write_text(text)
        print(f"wrote {out / 'sweep.csv'}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_modes(args) -> int:
    settings = load_trap(args.config or CONFIG_DIR / "ca40.cfg")
    text, table = modes_report(settings)
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "modes.csv").write_text(table.to_csv())
        (out / "modes.txt").write_text(text)
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    checks = run_selftest(quick=args.quick)
    for check in checks:
        print(check.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_NUMERICAL


def cmd_discrepancy(args) -> int:
    table = Table(["n", "theta_t", "sum_printed", "max_abs_diff_vs_exact"],
                  [list(row) for row in analytic.twin_fock_discrepancy()])
    text = table.to_csv()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "twin_fock_discrepancy.csv").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trilinear", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def propagation_flags(p):
        p.add_argument("--out", help="output directory")
        p.add_argument("--cutoff-b", type=int, help="override breathing-mode Fock cutoff")
        p.add_argument("--cutoff-r", type=int, help="override rocking-mode Fock cutoff")
        p.add_argument("--method", choices=("eig", "krylov"))

    p = sub.add_parser("run", help="run one experiment config")
    p.add_argument("--config", help="experiment config file")
    propagation_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("reproduce", help="rerun a shipped figure config")
    p.add_argument("figure", choices=FIGURES)
    propagation_flags(p)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("sweep", help="scan one config key and tabulate scalar outputs")
    p.add_argument("--config", help="experiment config file")
    p.add_argument("--axis", required=True, help="dotted config key, or state.n")
    p.add_argument("--values", default="", help="comma-separated values")
    p.add_argument("--outputs", default="cfi,delta_lambda", help=f"comma-separated from {', '.join(SWEEP_OUTPUTS)}")
    p.add_argument("--jobs", type=int, default=1)
    propagation_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("modes", help="equilibrium, normal modes and coupling of a trap config")
    p.add_argument("--config", help="trap config file (default: shipped 40Ca+ example)")
    p.add_argument("--out", help="also write modes.csv / modes.txt here")
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("selftest", help="numerical hygiene checks")
    p.add_argument("--quick", action="store_true", help="only the small figure configs")
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("discrepancy", help="tabulate the typeset twin-Fock double sum against the exact result")
    p.add_argument("--out", help="also write twin_fock_discrepancy.csv here")
    p.set_defaults(func=cmd_discrepancy)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TruncationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    except Exception as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
