"""Command line entry point: ``rkf gen-system | run | selftest | sweep``.

Exit codes: 0 success, 1 config error, 2 numerical failure, 3 check failure.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import experiment
from .errors import ConfigError, NumericalFailure, PreconditionError, RKFError
from .model import random_stable_system

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_CHECK = 0, 1, 2, 3


def _summary(rows, constants) -> str:
    last = rows[-1]
    b1 = "inapplicable (sigma_max(H) >= 1)" if not constants.applicable else f"{last.b1:.6g}"
    return (
        f"T={last.t} L={last.l_t:.6g} V={last.v_t:.6g} W={last.w_t:.6g} "
        f"B1={b1} B3={last.b3:.6g} avg_gap={last.avg_loss_gap:.6g}"
    )


def cmd_gen_system(args) -> int:
    model = random_stable_system(args.n, args.p, args.seed)
    text = model.to_text()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_run(args) -> int:
    config = experiment.load_config(args.config)
    out = args.output or config.output_path
    res = experiment.execute(config)
    experiment.emit_csv(res.rows, out)
    print(_summary(res.rows, res.constants))
    return EXIT_OK


def cmd_selftest(args) -> int:
    return experiment.selftest(inject=args.inject_fault)


def _sweep_one(job):
    config, seed, out_dir = job
    cfg = config.with_seed(seed)
    rows = experiment.run_experiment(cfg)
    experiment.emit_csv(rows, Path(out_dir) / f"run_seed{seed}.csv")
    return seed, rows[-1]


def cmd_sweep(args) -> int:
    config = experiment.load_config(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(config, s, out_dir) for s in args.seeds]
    workers = experiment.sweep_workers()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            finals = list(pool.map(_sweep_one, jobs))
    else:
        finals = [_sweep_one(j) for j in jobs]
    lines = ["seed," + experiment.CSV_HEADER]
    for seed, row in finals:
        lines.append(f"{seed}," + experiment.format_rows([row]).splitlines()[1])
    (out_dir / "aggregate.csv").write_text("\n".join(lines) + "\n")
    print(f"{len(finals)} runs written to {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rkf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-system", help="write a random stable model file")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", help="destination (default stdout)")
    g.set_defaults(func=cmd_gen_system)

    r = sub.add_parser("run", help="execute one experiment config")
    r.add_argument("config")
    r.add_argument("-o", "--output", help="CSV path (overrides run.output_path)")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("selftest", help="run built-in numerical checks")
    s.add_argument("--inject-fault", choices=sorted(experiment.SELFTEST_CHECKS), help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_selftest)

    w = sub.add_parser("sweep", help="repeat an experiment over seeds")
    w.add_argument("config")
    w.add_argument("--seeds", type=int, nargs="+", default=list(range(20)))
    w.add_argument("--out-dir", default="sweep")
    w.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, PreconditionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except RKFError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
