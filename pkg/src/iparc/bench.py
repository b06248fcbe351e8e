"""Benchmark harness: solve a generated suite and tabulate the outcome per category."""

from __future__ import annotations

import json
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import TaskSchemaError
from .morphology import SELibrary, default_se_library
from .program import parse_program, print_program
from .synthesis import MacroLibrary, SynthConfig, mine_macros, solve
from .taskio import Task, load_task


@dataclass
class TaskResult:
    id: str
    category: str
    solved: bool
    elapsed: float
    candidates_tested: int
    candidates_enumerated: int
    candidates_pruned: int
    reduction_factor: float
    program: str | None = None
    reason: str | None = None


@dataclass
class CategoryRow:
    category: str
    attempted: int
    solved: int
    mean_time: float
    median_time: float
    mean_tested: float
    mean_reduction: float

    @classmethod
    def from_results(cls, category: str, results: list[TaskResult]) -> CategoryRow:
        times = [r.elapsed for r in results]
        return cls(
            category=category,
            attempted=len(results),
            solved=sum(r.solved for r in results),
            mean_time=statistics.fmean(times),
            median_time=statistics.median(times),
            mean_tested=statistics.fmean(r.candidates_tested for r in results),
            mean_reduction=statistics.fmean(r.reduction_factor for r in results),
        )


@dataclass
class BenchReport:
    rows: list[CategoryRow]
    config: dict
    seed: int
    tasks: list[TaskResult] = field(default_factory=list)
    warmup: int = 0

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "config": self.config,
            "warmup": self.warmup,
            "rows": [asdict(r) for r in self.rows],
            "tasks": [asdict(t) for t in self.tasks],
        }

    @classmethod
    def from_dict(cls, data: dict) -> BenchReport:
        return cls(
            rows=[CategoryRow(**r) for r in data["rows"]],
            config=dict(data["config"]),
            seed=int(data["seed"]),
            tasks=[TaskResult(**t) for t in data.get("tasks", [])],
            warmup=int(data.get("warmup", 0)),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> BenchReport:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def table(self) -> str:
        head = ("Category", "Tasks", "Solved", "Avg time/task", "Median time", "Avg tested", "Avg reduction")
        body = [
            (
                r.category,
                str(r.attempted),
                str(r.solved),
                f"{r.mean_time:.3f}s",
                f"{r.median_time:.3f}s",
                f"{r.mean_tested:.1f}",
                f"{r.mean_reduction:.3g}",
            )
            for r in self.rows
        ]
        widths = [max(len(row[i]) for row in [head, *body]) for i in range(len(head))]
        lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(row, widths))) for row in [head, *body]]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines)


def load_suite(suite_dir) -> list[Task]:
    """Tasks of a suite directory, in manifest order."""
    root = Path(suite_dir)
    manifest = root / "manifest.json"
    if not manifest.is_file():
        raise FileNotFoundError(f"{manifest} not found")
    try:
        entries = json.loads(manifest.read_text())["tasks"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise TaskSchemaError(f"{manifest}: malformed manifest ({exc})") from None
    return [load_task(root / e["file"]) for e in entries]


def _solve_one(task: Task, cfg: SynthConfig, lib: SELibrary, macros: MacroLibrary) -> TaskResult:
    # private hit counters so workers never share mutable state
    own = MacroLibrary(entries=macros.entries, hits={})
    res = solve(task, cfg, lib, own)
    st = res.stats
    return TaskResult(
        id=task.id,
        category=task.category.value,
        solved=res.solved,
        elapsed=st.elapsed,
        candidates_tested=st.candidates_tested,
        candidates_enumerated=st.candidates_enumerated,
        candidates_pruned=st.candidates_pruned,
        reduction_factor=st.reduction_factor,
        program=print_program(res.program) if res.solved else None,
        reason=None if res.solved else res.reason,
    )


def _run(tasks, cfg, lib, macros, jobs) -> list[TaskResult]:
    if jobs <= 1:
        return [_solve_one(t, cfg, lib, macros) for t in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        # map keeps manifest order whatever the completion order
        return list(pool.map(lambda t: _solve_one(t, cfg, lib, macros), tasks))


def run_bench(
    tasks: list[Task],
    cfg: SynthConfig,
    lib: SELibrary | None = None,
    jobs: int = 1,
    warmup: int = 0,
) -> BenchReport:
    """Solve ``tasks`` and summarise them per category.

    The first ``warmup`` tasks are solved without macros; macros mined from
    their solutions are then frozen and offered to the remaining tasks.
    """
    lib = lib or default_se_library()
    head, rest = tasks[:warmup], tasks[warmup:]
    results = _run(head, cfg, lib, MacroLibrary(), jobs)
    solved = [(t, parse_program(r.program)) for t, r in zip(head, results) if r.solved]
    macros = mine_macros(solved) if solved else MacroLibrary()
    results += _run(rest, cfg, lib, macros, jobs)
    by_cat: dict[str, list[TaskResult]] = {}
    for r in results:
        by_cat.setdefault(r.category, []).append(r)
    rows = [CategoryRow.from_results(c, rs) for c, rs in by_cat.items()]
    return BenchReport(rows=rows, config=cfg.to_dict(), seed=cfg.seed, tasks=results, warmup=min(warmup, len(tasks)))
