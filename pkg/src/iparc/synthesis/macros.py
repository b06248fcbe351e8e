"""Sub-pipelines shared across solved tasks, reused before fresh search."""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field

from ..program import Apply, MorphProgram
from ..taskio import Category, Task


@dataclass(frozen=True)
class Macro:
    steps: tuple[Apply, ...]
    count: int

    @property
    def token(self) -> tuple[tuple[str, str], ...]:
        return tuple((a.op, a.se_id) for a in self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def __str__(self) -> str:
        return ", ".join(str(a) for a in self.steps)


@dataclass
class MacroLibrary:
    """Per-category macros. Entries are frozen once added; only hit counts change."""

    entries: dict[Category, list[Macro]] = field(default_factory=dict)
    hits: dict[tuple[Category, int], int] = field(default_factory=dict)

    def get(self, category: Category) -> list[Macro]:
        return list(self.entries.get(category, ()))

    def add(self, category: Category, macro: Macro) -> None:
        bucket = self.entries.setdefault(category, [])
        if any(m.steps == macro.steps for m in bucket):
            return
        bucket.append(macro)

    def record_hit(self, category: Category, index: int) -> None:
        self.hits[category, index] = self.hits.get((category, index), 0) + 1

    def __len__(self) -> int:
        return sum(len(v) for v in self.entries.values())

    def to_dict(self) -> dict:
        return {
            c.value: [{"steps": [str(a) for a in m.steps], "count": m.count} for m in ms]
            for c, ms in self.entries.items()
        }


def _windows(steps: tuple[Apply, ...]) -> set[tuple[Apply, ...]]:
    n = len(steps)
    return {steps[i:j] for i in range(n) for j in range(i + 2, n + 1)}


def _contains(big: tuple, small: tuple) -> bool:
    k = len(small)
    return any(big[i : i + k] == small for i in range(len(big) - k + 1))


def mine_macros(solved: Iterable[tuple[Task, MorphProgram]], library: MacroLibrary | None = None) -> MacroLibrary:
    """Collect maximal sub-pipelines of length >= 2 shared by >= 2 programs.

    A shared window is maximal when no longer window containing it occurs in
    the same number of programs. Entries are ordered by frequency, then
    length, then first appearance.
    """
    library = library or MacroLibrary()
    by_cat: dict[Category, list[MorphProgram]] = {}
    for task, program in solved:
        by_cat.setdefault(task.category, []).append(program)
    for cat, programs in by_cat.items():
        counts: Counter = Counter()
        first: dict[tuple, int] = {}
        for p in programs:
            windows = set()
            for bp in p.pipelines:
                windows |= _windows(bp.unfolded())
            for w in sorted(windows, key=lambda w: (len(w), [str(a) for a in w])):
                counts[w] += 1
                first.setdefault(w, len(first))
        shared = {w: c for w, c in counts.items() if c >= 2}
        maximal = [
            w for w, c in shared.items() if not any(len(v) > len(w) and c2 == c and _contains(v, w) for v, c2 in shared.items())
        ]
        maximal.sort(key=lambda w: (-shared[w], -len(w), first[w]))
        for w in maximal:
            library.add(cat, Macro(w, shared[w]))
    return library
