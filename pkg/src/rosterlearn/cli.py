"""``rosterlearn`` command line: learn, check, generate, eval.

Exit codes: 0 ok, 1 schedule violates the model, 2 usage, parse or schema
error, 3 generation budget exhausted.  Every random choice derives from
``--seed`` (default 0).
"""

from __future__ import annotations

import argparse
import glob
import logging
import os
import sys
from pathlib import Path

from ._io import atomic_write
from .errors import GenerationError, RosterLearnError
from .evaluation import EvalConfig, Scenario, builtin_scenario, run_experiment
from .generator import GeneratorConfig, Layout, generate_one
from .learner import BackgroundKnowledge, learn
from .model import check, load_model, render, serialize
from .tensor import dump_schedule, load_schedule

EXIT_OK, EXIT_VIOLATED, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
DEFAULT_SEED = 0

log = logging.getLogger("rosterlearn")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sizes(text: str) -> list[int]:
    try:
        sizes = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not sizes:
        raise argparse.ArgumentTypeError("need at least one train size")
    return sizes


def _expand(patterns) -> list[str]:
    paths = []
    for pattern in patterns:
        hits = sorted(glob.glob(pattern))
        if not hits:
            raise FileNotFoundError(f"no schedule file matches {pattern!r}")
        paths.extend(hits)
    return paths


def cmd_learn(args) -> int:
    paths = _expand(args.input)
    examples = [load_schedule(p) for p in paths]
    bk = BackgroundKnowledge.load(args.bk) if args.bk else None
    m = learn(examples, bk)
    with atomic_write(args.output) as fh:
        fh.write(serialize(m) + "\n")
    if not len(m):
        log.warning("no informative constraint survived filtering; wrote an empty model")
    for c in m:
        print(render(c))
    return EXIT_OK


def cmd_check(args) -> int:
    m = load_model(args.model)
    t = load_schedule(args.schedule)
    result = check(t, m)
    if result.satisfied:
        print("satisfied")
        return EXIT_OK
    print(f"violated: {len(result.violations)} violation(s)")
    for v in result.violations:
        print(f"  {render(v.constraint)}: {v}")
    return EXIT_VIOLATED


def cmd_generate(args) -> int:
    if args.n < 1:
        raise RosterLearnError("-n must be at least 1")
    m = load_model(args.model)
    cfg = GeneratorConfig(
        seed=args.seed, max_repair_steps=args.max_steps, restarts=args.restarts
    )
    layout = Layout(m.schema, m.constraints)
    out = Path(args.out)
    width = max(4, len(str(args.n - 1)))
    failed = 0
    for i in range(args.n):
        t = generate_one(m, i, cfg, layout)
        if t is None:
            failed += 1
            log.warning("sample %d exhausted its repair budget", i)
            continue
        with atomic_write(out / f"schedule_{i:0{width}d}.json") as fh:
            fh.write(dump_schedule(t) + "\n")
    print(f"wrote {args.n - failed} of {args.n} schedules to {out}")
    return EXIT_BUDGET if failed else EXIT_OK


def _scenario(ref: str) -> Scenario:
    if os.path.exists(ref):
        return Scenario.load(ref)
    try:
        return builtin_scenario(ref)
    except FileNotFoundError:
        raise FileNotFoundError(f"no scenario file or built-in scenario named {ref!r}") from None


def cmd_eval(args) -> int:
    sc = _scenario(args.scenario)
    cfg = EvalConfig(
        sc,
        pool_size=args.pool_size,
        train_sizes=args.train_sizes,
        trials=args.trials,
        seed=args.seed,
        precision_samples=args.precision_samples,
    )

    def progress(row):
        log.info(
            "size %d trial %d: recall %.3f precision %.3f learn %.3fs",
            row.train_size, row.trial, row.recall, row.precision, row.learn_seconds,
        )

    report = run_experiment(cfg, progress)
    out = Path(args.out)
    report.write_csv(out / f"{sc.name}.csv")
    report.write_svg(out / f"{sc.name}.svg")
    print("train_size  recall  recall_heldout  precision  learn_seconds")
    for size, avg in report.averages().items():
        print(
            f"{size:>10}  {avg['recall']:.3f}  {avg['recall_heldout']:>14.3f}  "
            f"{avg['precision']:>9.3f}  {avg['learn_seconds']:>13.4f}"
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rosterlearn", description="Learn, check and sample rostering constraints.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more log output")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("learn", help="learn a model from example schedules")
    s.add_argument("--input", nargs="+", required=True, help="schedule files or glob patterns")
    s.add_argument("--bk", help="background-knowledge JSON")
    s.add_argument("--output", required=True, help="model JSON to write")
    s.set_defaults(func=cmd_learn)

    s = sub.add_parser("check", help="check a schedule against a model")
    s.add_argument("--model", required=True)
    s.add_argument("--schedule", required=True)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("generate", help="sample schedules satisfying a model")
    s.add_argument("--model", required=True)
    s.add_argument("-n", type=int, required=True, help="number of schedules")
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--max-steps", type=int, default=GeneratorConfig.max_repair_steps)
    s.add_argument("--restarts", type=int, default=GeneratorConfig.restarts)
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("eval", help="recall/precision experiment on a scenario")
    s.add_argument("--scenario", required=True, help="scenario JSON, or small / medium / large")
    s.add_argument("--train-sizes", type=_sizes, default=[1, 5, 10, 20, 50])
    s.add_argument("--trials", type=int, default=5)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--pool-size", type=int, default=10_000)
    s.add_argument("--precision-samples", type=int, default=100)
    s.add_argument("--out", required=True, help="output directory for CSV and SVG")
    s.set_defaults(func=cmd_eval)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s: %(message)s",
    )
    try:
        return args.func(args)
    except GenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (RosterLearnError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
