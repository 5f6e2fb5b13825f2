"""Command-line entry point: ``singcubic-bench run`` and ``singcubic-bench compare``."""

from __future__ import annotations

import argparse
import logging
import sys

from .bench import ALGORITHMS, PROBLEMS, ExperimentConfig, compare_runs, format_comparison, run_experiment
from .data import LibSVMParseError
from .trace import DivergenceError, TraceSchemaError

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _add_run_args(p):
    p.add_argument("--config", help="key=value file; command-line flags override it")
    p.add_argument("--algo", choices=ALGORITHMS, required=False, help="optimizer to run")
    p.add_argument("--problem", choices=PROBLEMS, default="convex")
    p.add_argument("--dataset", help="path to a LIBSVM file (.gz allowed)")
    p.add_argument("--format", dest="fmt", default="libsvm", choices=["libsvm"])
    p.add_argument("--labels", help="label mapping such as '-1:0,1:1' (default: inferred)")
    p.add_argument("--n-features", type=int)
    p.add_argument("--scale-features", action="store_true", help="max-abs scale each column")
    p.add_argument("--synth-n", type=int, default=50, help="components of the synthetic quadratic")
    p.add_argument("--synth-p", type=int, default=10, help="dimension of the synthetic quadratic")
    p.add_argument("--alpha", type=float, default=1e-3)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--epochs", type=float, default=10.0, help="effective-epoch budget")
    p.add_argument("--batch-frac", type=float, default=0.001)
    p.add_argument("--sigma0", type=float, default=0.01)
    p.add_argument("--lr", type=float, help="step size for sgd and saga")
    p.add_argument("--eps-tol", type=float, default=0.1, help="subproblem tolerance")
    p.add_argument("--grad-tol", type=float, default=1e-6)
    p.add_argument("--sample-frac", type=float, default=0.05, help="scr sample fraction")
    p.add_argument("--growth", choices=["constant", "geometric"], default="constant")
    p.add_argument("--sampling", choices=["cyclic", "random"], default="cyclic")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", help="trace CSV path")
    p.add_argument("--record-time", action="store_true", help="write wall_time_s to the trace")


def build_parser():
    parser = argparse.ArgumentParser(prog="singcubic-bench", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one optimizer and write its trace")
    _add_run_args(run)
    cmp_ = sub.add_parser("compare", help="align trace files on a common epoch grid")
    cmp_.add_argument("traces", nargs="+")
    cmp_.add_argument("--points", type=int, default=101)
    cmp_.add_argument("--out", help="write the table here instead of stdout")
    return parser, run


def read_config_file(path, run_parser):
    """Parse ``key = value`` lines into typed defaults for the run parser."""
    actions = {a.dest: a for a in run_parser._actions if a.dest not in ("help", "config")}
    aliases = {s.lstrip("-").replace("-", "_"): a.dest for a in actions.values() for s in a.option_strings}
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            key = key.strip().replace("-", "_")
            val = val.strip()
            if not sep or key not in aliases:
                raise ValueError(f"{path}:{lineno}: unknown or malformed setting {line!r}")
            action = actions[aliases[key]]
            if isinstance(action, argparse._StoreTrueAction):
                if val.lower() not in _TRUE | _FALSE:
                    raise ValueError(f"{path}:{lineno}: expected a boolean for {key}")
                values[action.dest] = val.lower() in _TRUE
                continue
            try:
                typed = action.type(val) if action.type else val
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad value {val!r} for {key}") from None
            if action.choices and typed not in action.choices:
                raise ValueError(f"{path}:{lineno}: {key} must be one of {', '.join(action.choices)}")
            values[action.dest] = typed
    return values


def _cmd_run(args, run_parser):
    if args.algo is None:
        run_parser.error("--algo is required (on the command line or in --config)")
    fields = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
    cfg = ExperimentConfig(**fields)
    try:
        cfg.validate()
    except ValueError as err:
        run_parser.error(str(err))
    try:
        _, summary = run_experiment(cfg)
    except DivergenceError as err:
        print(f"error: run diverged: {err}", file=sys.stderr)
        return 1
    except (LibSVMParseError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    for key, val in summary.items():
        print(f"{key}: {val}")
    return 0


def _cmd_compare(args, parser):
    if len(args.traces) < 2:
        parser.error("compare needs at least two trace files")
    try:
        grid, columns, best = compare_runs(args.traces, points=args.points)
    except (TraceSchemaError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    text = format_comparison(grid, columns, best)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None):
    parser, run_parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(argv)
    if args.command == "run" and args.config:
        try:
            run_parser.set_defaults(**read_config_file(args.config, run_parser))
        except (OSError, ValueError) as err:
            run_parser.error(str(err))
        args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    if args.command == "run":
        return _cmd_run(args, run_parser)
    return _cmd_compare(args, parser)


if __name__ == "__main__":
    sys.exit(main())
