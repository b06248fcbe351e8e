"""Command-line entry point: ``iparc solve|generate|verify|bench``.

Exit codes: 0 solved/ok, 2 honest negative (no solution, verification
failed), 1 error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import load_suite, run_bench
from .errors import IparcError
from .generate import GenParams, generate_suite, write_suite
from .morphology import default_se_library
from .program import print_program, run_program
from .synthesis import SynthConfig, load_config, solve, verify
from .taskio import Category, load_solution, load_task, save_solution

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2

_UNITS = {"ms": 1e-3, "s": 1.0, "m": 60.0, "h": 3600.0}


def parse_duration(text: str) -> float:
    """``"1ms"``, ``"30s"``, ``"2m"``, ``"1.5h"`` or bare seconds."""
    m = re.fullmatch(r"\s*([0-9]*\.?[0-9]+)\s*(ms|s|m|h)?\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"not a duration: {text!r}")
    return float(m.group(1)) * _UNITS[m.group(2) or "s"]


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return text == "on"


def _config(args) -> SynthConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else SynthConfig()
    cfg = cfg.with_env()
    changes = {}
    for flag, name in (
        ("seed", "seed"),
        ("budget", "time_budget"),
        ("pruning", "pruning_enabled"),
        ("randomize", "randomization_enabled"),
        ("snapshots", "use_snapshots"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            changes[name] = value
    return cfg.replace(**changes) if changes else cfg


def cmd_solve(args) -> int:
    task = load_task(args.task)
    cfg = _config(args)
    res = solve(task, cfg)
    if not res.solved:
        print(f"no solution: {res.reason}")
        print(res.stats.summary())
        return EXIT_NEGATIVE
    print(print_program(res.program))
    print(res.stats.summary())
    if args.out:
        save_solution(res.program, args.out)
    return EXIT_OK


def cmd_generate(args) -> int:
    category = Category.parse(args.category)
    params = GenParams(
        width=args.width,
        height=args.height,
        density=args.density,
        pairs_per_task=args.pairs,
        seed=args.seed,
        emit_snapshots=args.snapshots,
    )
    stats: list = []
    tasks = generate_suite(category, args.count, params, stats=stats)
    manifest = write_suite(tasks, args.out, category, params, stats)
    print(f"wrote {len(tasks)} {category.value} tasks and {manifest}")
    return EXIT_OK


def _diff_summary(expected, got) -> str:
    a, b = expected.cells, got.cells
    if a.shape != b.shape:
        return f"shape {b.shape} != expected {a.shape}"
    bad = np.argwhere(a != b)
    first = ", ".join(f"({r},{c}) got {int(b[r, c])} want {int(a[r, c])}" for r, c in bad[:5])
    more = " ..." if len(bad) > 5 else ""
    return f"{len(bad)} of {a.size} cells differ; {first}{more}"


def cmd_verify(args) -> int:
    task = load_task(args.task)
    program = load_solution(args.solution)
    lib = default_se_library()
    if verify(program, task, lib):
        print(f"{task.id}: ok ({len(task.pairs)} pairs)")
        return EXIT_OK
    for i, pair in enumerate(task.pairs):
        got = run_program(program, pair.input, lib)
        if got != pair.output:
            print(f"{task.id}: pair {i} fails: {_diff_summary(pair.output, got)}")
            break
    return EXIT_NEGATIVE


def cmd_bench(args) -> int:
    tasks = load_suite(args.suite)
    cfg = _config(args)
    report = run_bench(tasks, cfg, jobs=args.jobs, warmup=args.warmup)
    print(report.table())
    report_path = Path(args.report) if args.report else Path(args.suite) / "report.json"
    report.save(report_path)
    print(f"report: {report_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iparc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"iparc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def search_flags(p):
        p.add_argument("--config", help="JSON file of SynthConfig fields")
        p.add_argument("--seed", type=int)
        p.add_argument("--budget", type=parse_duration, help="time budget per task, e.g. 30s or 500ms")
        p.add_argument("--pruning", type=_on_off, metavar="on|off")
        p.add_argument("--randomize", type=_on_off, metavar="on|off")
        p.add_argument("--snapshots", type=_on_off, metavar="on|off")

    p = sub.add_parser("solve", help="search for a program solving one task")
    p.add_argument("task")
    p.add_argument("--out", help="write the solution text here")
    search_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("generate", help="write a suite of generated tasks and a manifest")
    p.add_argument("category")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--snapshots", action="store_true", help="embed one intermediate checkpoint per pair")
    p.add_argument("--width", type=int, default=15)
    p.add_argument("--height", type=int, default=15)
    p.add_argument("--density", type=float, default=0.3)
    p.add_argument("--pairs", type=int, default=4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("verify", help="check a solution file against a task")
    p.add_argument("task")
    p.add_argument("solution")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="solve a suite and report per-category results")
    p.add_argument("suite")
    search_flags(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--warmup", type=int, default=0, help="tasks solved before mining macros for the rest")
    p.add_argument("--report", help="report JSON path (default <suite>/report.json)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IparcError as exc:
        print(f"iparc: {exc}", file=sys.stderr)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"iparc: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
