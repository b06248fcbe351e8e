"""Task files: loading, validation and deterministic saving.

Task file layout (JSON)::

    {"id": str, "category": "A-simple" | ... | "B-hard", "num_colors": int,
     "pairs": [{"input": [[int]], "output": [[int]], "snapshots": [[[int]]]?}],
     "solution": str?}

``solution`` holds a ground-truth program in program-text form.
"""

from __future__ import annotations

import enum
import json
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ProgramSyntaxError, TaskSchemaError, TaskValidationError
from .morphology import Image
from .program import MorphProgram, parse_program, print_program


class Category(enum.Enum):
    A_SIMPLE = "A-simple"
    A_HARD = "A-hard"
    B_SEQUENCE = "B-sequence"
    B_SELECTION = "B-selection"
    B_ITERATION = "B-iteration"
    B_HARD = "B-hard"

    @classmethod
    def parse(cls, text: str) -> Category:
        key = text.strip().lower().replace("_", "-")
        for c in cls:
            if c.value.lower() == key:
                return c
        raise ValueError(f"unknown category {text!r}; expected one of {[c.value for c in cls]}")

    @property
    def two_band(self) -> bool:
        return self in (Category.A_HARD, Category.B_SELECTION, Category.B_HARD)

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class TaskPair:
    input: Image
    output: Image
    snapshots: tuple[Image, ...] = ()


@dataclass(frozen=True)
class Task:
    id: str
    category: Category
    num_colors: int
    pairs: tuple[TaskPair, ...]
    ground_truth: MorphProgram | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.pairs[0].input.shape

    @property
    def snapshot_count(self) -> int:
        return len(self.pairs[0].snapshots) if self.pairs else 0

    def with_ground_truth(self, program: MorphProgram | None) -> Task:
        return Task(self.id, self.category, self.num_colors, self.pairs, program)

    def without_snapshots(self) -> Task:
        pairs = tuple(TaskPair(p.input, p.output) for p in self.pairs)
        return Task(self.id, self.category, self.num_colors, pairs, self.ground_truth)


@dataclass(frozen=True)
class Violation:
    code: str
    path: str
    message: str = field(default="", compare=False)

    def __str__(self) -> str:
        return f"{self.code} at {self.path}: {self.message}" if self.message else f"{self.code} at {self.path}"


def validate_task(task: Task) -> list[Violation]:
    out: list[Violation] = []
    if task.num_colors < 2:
        out.append(Violation("NUM_COLORS_INVALID", "num_colors", f"{task.num_colors} < 2"))
    if not task.pairs:
        out.append(Violation("NO_PAIRS", "pairs", "a task needs at least one pair"))
        return out
    shape = task.pairs[0].input.shape
    counts = {len(p.snapshots) for p in task.pairs}
    if len(counts) > 1:
        out.append(Violation("SNAPSHOT_COUNT_MISMATCH", "pairs", f"snapshot counts differ: {sorted(counts)}"))
    for i, pair in enumerate(task.pairs):
        images = [("input", pair.input), ("output", pair.output)]
        images += [(f"snapshots[{j}]", s) for j, s in enumerate(pair.snapshots)]
        if pair.input.shape != shape:
            out.append(
                Violation("PAIR_SHAPE_MISMATCH", f"pairs[{i}].input", f"{pair.input.shape} differs from pairs[0] {shape}")
            )
        for name, img in images[1:]:
            if img.shape != pair.input.shape:
                out.append(
                    Violation(
                        "DIMENSION_MISMATCH", f"pairs[{i}].{name}", f"{img.shape} differs from input {pair.input.shape}"
                    )
                )
        for name, img in images:
            if int(img.cells.max()) >= task.num_colors:
                out.append(
                    Violation(
                        "COLOR_OUT_OF_RANGE",
                        f"pairs[{i}].{name}",
                        f"colour {int(img.cells.max())} >= num_colors {task.num_colors}",
                    )
                )
    return out


def check_task(task: Task) -> Task:
    violations = validate_task(task)
    if violations:
        raise TaskValidationError(violations)
    return task


# -- serialisation -------------------------------------------------------------


def _grid(value, path: str) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise TaskSchemaError(f"{path}: expected a non-empty list of rows")
    widths = {len(r) for r in value}
    if len(widths) != 1 or 0 in widths:
        raise TaskSchemaError(f"{path}: rows must be non-empty and of equal length")
    if not all(isinstance(v, int) and not isinstance(v, bool) for r in value for v in r):
        raise TaskSchemaError(f"{path}: cells must be integers")
    arr = np.array(value, dtype=np.int64)
    if arr.min() < 0:
        raise TaskSchemaError(f"{path}: cells must be non-negative")
    return arr


def _image(value, path: str, k: int) -> Image:
    arr = _grid(value, path)
    # out-of-range colours are reported by validate_task, not here
    return Image(arr.astype(np.int16), max(k, int(arr.max()) + 1, 2))


def task_from_dict(data: dict) -> Task:
    if not isinstance(data, dict):
        raise TaskSchemaError("task file must hold a JSON object")
    for key in ("id", "category", "num_colors", "pairs"):
        if key not in data:
            raise TaskSchemaError(f"missing field {key!r}")
    try:
        category = Category.parse(str(data["category"]))
    except ValueError as exc:
        raise TaskSchemaError(f"category: {exc}") from None
    k = data["num_colors"]
    if not isinstance(k, int) or isinstance(k, bool):
        raise TaskSchemaError("num_colors: expected an integer")
    if not isinstance(data["pairs"], list):
        raise TaskSchemaError("pairs: expected a list")
    pairs = []
    for i, p in enumerate(data["pairs"]):
        if not isinstance(p, dict) or "input" not in p or "output" not in p:
            raise TaskSchemaError(f"pairs[{i}]: expected an object with 'input' and 'output'")
        snaps = p.get("snapshots", [])
        if not isinstance(snaps, list):
            raise TaskSchemaError(f"pairs[{i}].snapshots: expected a list of grids")
        pairs.append(
            TaskPair(
                _image(p["input"], f"pairs[{i}].input", k),
                _image(p["output"], f"pairs[{i}].output", k),
                tuple(_image(s, f"pairs[{i}].snapshots[{j}]", k) for j, s in enumerate(snaps)),
            )
        )
    solution = None
    if data.get("solution") is not None:
        try:
            solution = parse_program(str(data["solution"]))
        except ProgramSyntaxError as exc:
            raise TaskSchemaError(f"solution: {exc}") from None
    task = Task(str(data["id"]), category, k, tuple(pairs), solution)
    check_task(task)
    return _normalise_colors(task)


def _normalise_colors(task: Task) -> Task:
    def fix(img: Image) -> Image:
        return img if img.num_colors == task.num_colors else Image(img.cells, task.num_colors)

    pairs = tuple(TaskPair(fix(p.input), fix(p.output), tuple(fix(s) for s in p.snapshots)) for p in task.pairs)
    return Task(task.id, task.category, task.num_colors, pairs, task.ground_truth)


def task_to_dict(task: Task) -> dict:
    pairs = []
    for p in task.pairs:
        entry = {"input": p.input.to_rows(), "output": p.output.to_rows()}
        if p.snapshots:
            entry["snapshots"] = [s.to_rows() for s in p.snapshots]
        pairs.append(entry)
    data = {
        "id": task.id,
        "category": task.category.value,
        "num_colors": task.num_colors,
        "pairs": pairs,
    }
    if task.ground_truth is not None:
        data["solution"] = print_program(task.ground_truth)
    return data


def dumps_task(task: Task) -> str:
    return json.dumps(task_to_dict(task), separators=(",", ":")) + "\n"


def load_task(path) -> Task:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TaskSchemaError(f"{path}: not valid JSON ({exc})") from None
    return task_from_dict(data)


def save_task(task: Task, path) -> None:
    Path(path).write_text(dumps_task(task))


def load_solution(path) -> MorphProgram:
    return parse_program(Path(path).read_text())


def save_solution(program: MorphProgram, path) -> None:
    text = print_program(program)
    Path(path).write_text(text + "\n" if text else "")


# -- foreign formats -------------------------------------------------------------

_IMPORTERS: dict[str, Callable[[Path], Task]] = {"native": load_task}


def register_importer(fmt: str, fn: Callable[[Path], Task]) -> None:
    """Register a reader for another on-disk task layout.

    ``fn`` receives a path and must return a Task; the result is validated
    by ``import_task``. The official IPARC repository layout is not
    registered because its schema is not published alongside the tasks.
    """
    _IMPORTERS[fmt] = fn


def import_task(path, fmt: str = "native") -> Task:
    try:
        reader = _IMPORTERS[fmt]
    except KeyError:
        raise ValueError(f"no importer registered for format {fmt!r}; known: {sorted(_IMPORTERS)}") from None
    return check_task(reader(Path(path)))
