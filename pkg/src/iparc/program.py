"""Structured morphological programs.

A program is an optional hit-or-miss split, one step pipeline per band and
an optional colour rule. Three program shapes are executable:

* no split, no rule: band 1 is the foreground (value >= 1) of the input and
  the result is its indicator image;
* split: the hit-or-miss split recolours matches to 2, band 2 is the
  matches and band 1 the remaining foreground; the rule combines them;
* rule without split: band ``b`` is the set of input cells of colour ``b``.

The text form follows the listing style ``Band 1 - Iterate 2× Dilation SE6``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .errors import InvalidArgument, ProgramSyntaxError
from .morphology import (
    BinaryBand,
    ColorRule,
    Image,
    SELibrary,
    apply_color_rule,
    dilate,
    erode,
    extract_band,
    foreground,
    hit_or_miss,
    hit_or_miss_colored,
    indicator,
)

OP_NAMES = {"D": "Dilation", "E": "Erosion", "H": "Hit-Or-Miss"}
_OP_CODES = {v.lower(): k for k, v in OP_NAMES.items()}
REPEAT = "×"


@dataclass(frozen=True)
class Apply:
    """A single operator application: op is "D", "E" or "H"."""

    op: str
    se_id: str

    def __post_init__(self):
        if self.op not in OP_NAMES:
            raise InvalidArgument(f"unknown operator code {self.op!r}")

    def unfold(self) -> tuple[Apply, ...]:
        return (self,)

    def __str__(self) -> str:
        return f"{OP_NAMES[self.op]} {self.se_id}"


@dataclass(frozen=True)
class Iterate:
    count: int
    inner: Apply

    def __post_init__(self):
        if not isinstance(self.inner, Apply):
            raise InvalidArgument("Iterate can only wrap a single operator")
        if self.count < 1:
            raise InvalidArgument(f"iteration count must be >= 1, got {self.count}")

    def unfold(self) -> tuple[Apply, ...]:
        return (self.inner,) * self.count

    def __str__(self) -> str:
        return f"Iterate {self.count}{REPEAT} {self.inner}"


Step = Apply | Iterate


def Dilation(se_id: str) -> Apply:
    return Apply("D", se_id)


def Erosion(se_id: str) -> Apply:
    return Apply("E", se_id)


def HitOrMiss(se_id: str) -> Apply:
    return Apply("H", se_id)


def _normal_step(step: Step) -> Step:
    if isinstance(step, Iterate) and step.count == 1:
        return step.inner
    return step


@dataclass(frozen=True)
class BandPipeline:
    band_id: int
    steps: tuple[Step, ...] = ()

    def __post_init__(self):
        if self.band_id < 1:
            raise InvalidArgument(f"band ids start at 1, got {self.band_id}")
        object.__setattr__(self, "steps", tuple(_normal_step(s) for s in self.steps))

    def unfolded(self) -> tuple[Apply, ...]:
        return tuple(a for s in self.steps for a in s.unfold())


@dataclass(frozen=True)
class MorphProgram:
    split: str | None = None
    pipelines: tuple[BandPipeline, ...] = ()
    color_rule: ColorRule | None = None

    def __post_init__(self):
        pipes = tuple(self.pipelines)
        ids = [p.band_id for p in pipes]
        if len(set(ids)) != len(ids):
            raise InvalidArgument(f"duplicate band ids {ids}")
        allowed = {1} if self.color_rule is None else {1, 2}
        if not set(ids) <= allowed:
            raise InvalidArgument(f"band ids {sorted(ids)} not allowed here (expected within {sorted(allowed)})")
        if self.split is not None and self.color_rule is None:
            raise InvalidArgument("a hit-or-miss split needs a colour rule")
        # empty pipelines are the identity and carry no information
        pipes = tuple(sorted((p for p in pipes if p.steps), key=lambda p: p.band_id))
        object.__setattr__(self, "pipelines", pipes)

    @classmethod
    def from_steps(cls, bands: dict[int, list], split=None, color_rule=None) -> MorphProgram:
        if isinstance(color_rule, list):
            color_rule = ColorRule.from_list(color_rule)
        return cls(split, tuple(BandPipeline(b, tuple(s)) for b, s in bands.items()), color_rule)

    def steps(self, band_id: int) -> tuple[Step, ...]:
        for p in self.pipelines:
            if p.band_id == band_id:
                return p.steps
        return ()

    @property
    def band_ids(self) -> list[int]:
        return [1] if self.color_rule is None else [1, 2]

    def se_ids(self) -> list[str]:
        ids = [self.split] if self.split else []
        for p in self.pipelines:
            ids.extend(a.se_id for a in p.unfolded())
        return ids

    def __str__(self) -> str:
        return print_program(self)


# -- interpreter -------------------------------------------------------------


def run_steps(band: BinaryBand, steps, lib: SELibrary) -> BinaryBand:
    ops = {"D": dilate, "E": erode, "H": hit_or_miss}
    for step in steps:
        for a in step.unfold():
            band = ops[a.op](band, lib[a.se_id])
    return band


def resolve(p: MorphProgram, lib: SELibrary) -> None:
    """Raise UnresolvedSEError for the first SE id that ``lib`` lacks."""
    for se_id in p.se_ids():
        lib[se_id]


def input_bands(p: MorphProgram, img: Image, lib: SELibrary) -> list[BinaryBand]:
    if p.split is not None:
        split = hit_or_miss_colored(img, lib[p.split])
        return [extract_band(split, 1), extract_band(split, 2)]
    if p.color_rule is not None:
        return [BinaryBand(img.cells == b) for b in (1, 2)]
    return [foreground(img)]


def run_program(p: MorphProgram, img: Image, lib: SELibrary) -> Image:
    resolve(p, lib)
    bands = input_bands(p, img, lib)
    outs = [run_steps(b, p.steps(i + 1), lib) for i, b in enumerate(bands)]
    if p.color_rule is None:
        return indicator(outs[0], img.num_colors)
    return apply_color_rule(outs[0], outs[1], p.color_rule, img.num_colors)


# -- normal forms --------------------------------------------------------------


def _map_pipelines(p: MorphProgram, fn) -> MorphProgram:
    return MorphProgram(
        p.split,
        tuple(BandPipeline(bp.band_id, tuple(fn(bp.steps))) for bp in p.pipelines),
        p.color_rule,
    )


def unfold_steps(steps) -> list[Apply]:
    return [a for s in steps for a in s.unfold()]


def fold_steps(steps) -> list[Step]:
    out: list[Step] = []
    flat = unfold_steps(steps)
    i = 0
    while i < len(flat):
        j = i
        while j < len(flat) and flat[j] == flat[i]:
            j += 1
        out.append(_normal_step(Iterate(j - i, flat[i])))
        i = j
    return out


def fold_iterations(p: MorphProgram) -> MorphProgram:
    return _map_pipelines(p, fold_steps)


def unfold_iterations(p: MorphProgram) -> MorphProgram:
    return _map_pipelines(p, unfold_steps)


def program_size(p: MorphProgram) -> int:
    return sum(len(bp.unfolded()) for bp in p.pipelines) + (1 if p.split else 0)


# -- text format -------------------------------------------------------------


def _rule_text(rule: ColorRule) -> str:
    return "[" + ", ".join("[" + ", ".join(str(v) for v in row) + "]" for row in rule.rows) + "]"


def print_program(p: MorphProgram) -> str:
    lines = []
    if p.split is not None:
        lines.append(f"Hit-Or-Miss {p.split}")
    for bp in p.pipelines:
        lines.extend(f"Band {bp.band_id} - {s}" for s in bp.steps)
    if p.color_rule is not None:
        lines.append(f"Colour rule: {_rule_text(p.color_rule)}")
    return "\n".join(lines)


_SEID = r"[A-Za-z0-9_']+"
_STEP_RE = re.compile(
    rf"^(?:iterate\s*(\d+)\s*(?:×|x|times)\s*)?(dilation|erosion|hit-or-miss)\s+({_SEID})$",
    re.IGNORECASE,
)
_SPLIT_RE = re.compile(rf"^hit-or-miss\s+({_SEID})$", re.IGNORECASE)
_BAND_RE = re.compile(r"^band\s*(\d+)\s*[-–—]\s*(.*)$", re.IGNORECASE)
_RULE_RE = re.compile(r"^colou?r\s+rule\s*:\s*(.*)$", re.IGNORECASE)
# one-line listings separate statements with commas
_CLAUSE_SPLIT = re.compile(r",\s*(?=(?:band\b|hit-or-miss\b|colou?r\s+rule\b))", re.IGNORECASE)


def _parse_rule(text: str, line: int, num_colors: int | None) -> ColorRule:
    body = text.strip().strip("$").strip()
    try:
        rows = json.loads(body)
    except json.JSONDecodeError:
        raise ProgramSyntaxError(line, f"expected a nested list of [b1, b2, out] triples, got {body!r}") from None
    if not isinstance(rows, list) or not all(
        isinstance(r, list) and len(r) == 3 and all(isinstance(v, int) for v in r) for r in rows
    ):
        raise ProgramSyntaxError(line, "colour rule must be a list of [b1, b2, out] integer triples")
    for r in rows:
        if r[0] not in (0, 1) or r[1] not in (0, 1):
            raise ProgramSyntaxError(line, f"colour rule row {r} has band bits outside {{0, 1}}")
        if r[2] < 0 or (num_colors is not None and r[2] >= num_colors):
            raise ProgramSyntaxError(line, f"colour rule row {r} has an out-of-range colour")
    try:
        return ColorRule.from_list(rows)
    except InvalidArgument as exc:
        raise ProgramSyntaxError(line, str(exc)) from None


def _parse_step(text: str, line: int) -> Step:
    m = _STEP_RE.match(text.strip())
    if not m:
        raise ProgramSyntaxError(
            line, f"expected ['Iterate' N ×] ('Dilation' | 'Erosion' | 'Hit-Or-Miss') SE-id, got {text.strip()!r}"
        )
    count, op, se_id = m.groups()
    step: Step = Apply(_OP_CODES[op.lower()], se_id)
    if count is not None:
        if int(count) < 1:
            raise ProgramSyntaxError(line, "iteration count must be >= 1")
        step = _normal_step(Iterate(int(count), step))
    return step


def _clauses(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        for part in _CLAUSE_SPLIT.split(raw):
            part = " ".join(part.replace(" ", " ").split())
            if part:
                yield lineno, part


def parse_program(text: str, num_colors: int | None = None) -> MorphProgram:
    split = None
    bands: dict[int, list[Step]] = {}
    rule = None
    rule_line = 0
    pending_rule: list[str] | None = None
    seen_band = False

    for lineno, clause in _clauses(text):
        if pending_rule is not None:
            pending_rule.append(clause)
            joined = " ".join(pending_rule)
            if joined.count("[") and joined.count("[") == joined.count("]"):
                rule = _parse_rule(joined, rule_line, num_colors)
                pending_rule = None
            continue
        m = _RULE_RE.match(clause)
        if rule is not None:
            if m:
                raise ProgramSyntaxError(lineno, "duplicate colour rule")
            raise ProgramSyntaxError(lineno, f"nothing may follow the colour rule, got {clause!r}")
        if m:
            rule_line = lineno
            rest = m.group(1).strip()
            if rest.count("[") and rest.count("[") == rest.count("]"):
                rule = _parse_rule(rest, lineno, num_colors)
            else:
                pending_rule = [rest]
            continue
        m = _BAND_RE.match(clause)
        if m:
            seen_band = True
            bands.setdefault(int(m.group(1)), []).append(_parse_step(m.group(2), lineno))
            continue
        m = _SPLIT_RE.match(clause)
        if m:
            if split is not None:
                raise ProgramSyntaxError(lineno, "duplicate Hit-Or-Miss split line")
            if seen_band:
                raise ProgramSyntaxError(lineno, "the Hit-Or-Miss split must precede all band lines")
            split = m.group(1)
            continue
        if re.match(r"^colou?r\s+rule\b", clause, re.IGNORECASE):
            raise ProgramSyntaxError(lineno, "expected ':' after 'Colour rule'")
        raise ProgramSyntaxError(lineno, f"expected 'Hit-Or-Miss', 'Band' or 'Colour rule', got {clause!r}")

    if pending_rule is not None:
        raise ProgramSyntaxError(rule_line, "unterminated colour rule list")
    try:
        return MorphProgram(split, tuple(BandPipeline(b, tuple(s)) for b, s in bands.items()), rule)
    except InvalidArgument as exc:
        raise ProgramSyntaxError(max(rule_line, 1), str(exc)) from None
