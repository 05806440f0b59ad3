"""Command-line entry point ``qmd``.

Exit codes: 0 success, 1 failed check or I/O error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import suites
from .classical import (
    MAX_ORACLE_N,
    f_star,
    hurkens_bound,
    is_power_of_two,
    minimax_value,
    oracle_horizon,
    smallest_odd_prime_factor,
)
from .config import ConfigError, load_config
from .output import attain_table, heatmap_pgm, run_experiment, summary_dict, write_outputs
from .strategies import Strategy2Responder, Strategy3Responder, StrategyError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    exp = run_experiment(cfg)
    written = write_outputs(exp, Path(args.out_dir))
    summary = summary_dict(exp)
    print(
        f"n={cfg.n} steps={cfg.steps} visited={summary['bounds']['observed']['visited']} "
        f"attained={summary['bounds']['observed']['attained']}"
    )
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_attain(args) -> int:
    exp = run_experiment(load_config(args.config))
    sys.stdout.write(attain_table(exp))
    return EXIT_OK


def cmd_heatmap(args) -> int:
    cfg = load_config(args.config)
    exp = run_experiment(cfg)
    Path(args.out).write_text(heatmap_pgm(exp.trace, cfg.tolerances.visit))
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_classical(args) -> int:
    n = args.n
    if n < 2:
        raise ConfigError(f"n must be >= 2, got {n}")
    report = {"n": n, "f_star": f_star(n), "smallest_odd_prime": smallest_odd_prime_factor(n)}
    if n >= 3 and not is_power_of_two(n):
        report["hurkens_bound"] = hurkens_bound(n)
    if n <= MAX_ORACLE_N:
        report["oracle"] = minimax_value(n, oracle_horizon(n))
    else:
        report["oracle"] = f"skipped (n>{MAX_ORACLE_N})"
    for key, value in report.items():
        print(f"{key}: {value}")
    return EXIT_OK


def _check_params(args) -> None:
    # construction errors are bad parameters (exit 2), not failed checks
    if args.suite == "prop2":
        Strategy2Responder(_need(args, "n"), _need(args, "p"), _need(args, "q"), args.start)
    elif args.suite == "prop3":
        Strategy3Responder(_need(args, "n"), _need(args, "p"), args.start, args.hadamard_steps or (1,))
    if args.suite in ("prop2", "prop3") and not 0 <= args.start < args.n:
        raise ConfigError(f"--start {args.start} out of range for n={args.n}")


def cmd_verify(args) -> int:
    _check_params(args)
    try:
        if args.suite == "engine":
            checks = suites.engine_suite(args.seeds if args.seeds is not None else 1000)
        elif args.suite == "classical":
            checks = suites.classical_suite(args.n or MAX_ORACLE_N)
        elif args.suite == "prop1":
            checks = suites.prop1_suite(_need(args, "n"))
        elif args.suite == "prop2":
            checks = suites.prop2_suite(
                _need(args, "n"), _need(args, "p"), _need(args, "q"),
                args.start, _seeds(args), args.steps,
            )
        else:
            checks = suites.prop3_suite(
                _need(args, "n"), _need(args, "p"), args.start, _seeds(args), args.steps,
                args.hadamard_steps or (1,),
            )
    except StrategyError as exc:
        # raised mid-run: the strategy could not keep its invariant
        print(f"FAIL strategy error: {exc}")
        return EXIT_FAIL
    for check in checks:
        print(check.line())
    ok = all(c.passed for c in checks)
    print(f"{args.suite}: {'pass' if ok else 'FAIL'} ({sum(c.passed for c in checks)}/{len(checks)})")
    return EXIT_OK if ok else EXIT_FAIL


def _need(args, name):
    value = getattr(args, name)
    if value is None:
        raise ConfigError(f"verify {args.suite} requires --{name}")
    return value


def _seeds(args) -> int:
    return 100 if args.seeds is None else args.seeds


def _hadamard_steps(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qmd", description="Quantum Magnus-Derek game simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run a configured walk and write CSV/JSON/PGM")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("attain", help="per-position measured-walk table")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_attain)

    p = sub.add_parser("heatmap", help="write the PGM heatmap only")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("classical", help="classical game values")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_classical)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=["prop1", "prop2", "prop3", "engine", "classical"])
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--seeds", type=int)
    p.add_argument("--steps", type=int, default=60)
    p.add_argument("--hadamard-steps", type=_hadamard_steps)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"qmd: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StrategyError, ValueError) as exc:
        print(f"qmd: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"qmd: I/O error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
