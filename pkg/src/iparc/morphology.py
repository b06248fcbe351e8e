"""Binary mathematical morphology on ARC-like grid images.

Images are grids of colour indices; bands are boolean layers of an image.
The three operators treat every cell outside the grid as background, so
outputs always have the same shape as their inputs.
"""

from __future__ import annotations

import json
from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IncompleteRuleError, InvalidArgument, UnresolvedSEError

FG = 1
BG = 0
DONT_CARE = -1

_SYMBOLS = {"#": FG, ".": BG, "?": DONT_CARE}
_CHARS = {v: k for k, v in _SYMBOLS.items()}


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Image:
    cells: np.ndarray
    num_colors: int

    def __post_init__(self):
        cells = np.asarray(self.cells)
        if cells.ndim != 2 or cells.shape[0] < 1 or cells.shape[1] < 1:
            raise InvalidArgument(f"image must be a non-empty 2-D grid, got shape {cells.shape}")
        if self.num_colors < 2:
            raise InvalidArgument(f"num_colors must be >= 2, got {self.num_colors}")
        if cells.dtype.kind not in "iub":
            raise InvalidArgument(f"image cells must be integers, got {cells.dtype}")
        if cells.min() < 0 or cells.max() >= self.num_colors:
            raise InvalidArgument(f"cell values must lie in [0, {self.num_colors})")
        object.__setattr__(self, "cells", _frozen(cells.astype(np.int16)))

    @classmethod
    def from_rows(cls, rows, num_colors: int) -> Image:
        return cls(np.array(rows, dtype=np.int16), num_colors)

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def to_rows(self) -> list[list[int]]:
        return self.cells.tolist()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return self.num_colors == other.num_colors and np.array_equal(self.cells, other.cells)

    def __hash__(self) -> int:
        return hash((self.num_colors, self.cells.shape, self.cells.tobytes()))

    def __repr__(self) -> str:
        return f"Image({self.height}x{self.width}, k={self.num_colors})"


@dataclass(frozen=True, eq=False)
class BinaryBand:
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2 or bits.shape[0] < 1 or bits.shape[1] < 1:
            raise InvalidArgument(f"band must be a non-empty 2-D grid, got shape {bits.shape}")
        object.__setattr__(self, "bits", _frozen(bits.astype(bool)))

    @classmethod
    def zeros(cls, height: int, width: int) -> BinaryBand:
        return cls(np.zeros((height, width), dtype=bool))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.bits.shape

    def count(self) -> int:
        return int(self.bits.sum())

    def issubset(self, other: BinaryBand) -> bool:
        return not np.any(self.bits & ~other.bits)

    def complement(self) -> BinaryBand:
        return BinaryBand(~self.bits)

    def to_image(self, num_colors: int = 2) -> Image:
        return Image(self.bits.astype(np.int16), num_colors)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryBand):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash((self.bits.shape, np.packbits(self.bits).tobytes()))

    def __repr__(self) -> str:
        return f"BinaryBand({self.height}x{self.width}, fg={self.count()})"


@dataclass(frozen=True, eq=False)
class StructuringElement:
    """A small FG/BG/DONT_CARE pattern with an origin cell.

    Dilation and erosion only read the FG cells; hit-or-miss also requires
    the BG cells to land on background.
    """

    id: str
    pattern: np.ndarray
    origin: tuple[int, int] | None = None

    def __post_init__(self):
        pattern = np.asarray(self.pattern, dtype=np.int8)
        if pattern.ndim != 2:
            raise InvalidArgument(f"{self.id}: pattern must be 2-D")
        rows, cols = pattern.shape
        if rows % 2 == 0 or cols % 2 == 0 or rows > 5 or cols > 5:
            raise InvalidArgument(f"{self.id}: pattern dimensions must be odd and <= 5, got {rows}x{cols}")
        if not np.isin(pattern, (FG, BG, DONT_CARE)).all():
            raise InvalidArgument(f"{self.id}: pattern cells must be FG, BG or DONT_CARE")
        if not (pattern == FG).any():
            raise InvalidArgument(f"{self.id}: pattern needs at least one FG cell")
        origin = self.origin if self.origin is not None else (rows // 2, cols // 2)
        origin = (int(origin[0]), int(origin[1]))
        if not (0 <= origin[0] < rows and 0 <= origin[1] < cols):
            raise InvalidArgument(f"{self.id}: origin {origin} lies outside the pattern")
        object.__setattr__(self, "pattern", _frozen(pattern))
        object.__setattr__(self, "origin", origin)

    @classmethod
    def from_strings(cls, se_id: str, rows: list[str], origin=None) -> StructuringElement:
        try:
            pattern = [[_SYMBOLS[ch] for ch in row] for row in rows]
        except KeyError as exc:
            raise InvalidArgument(f"{se_id}: unknown pattern symbol {exc.args[0]!r}") from None
        if len({len(r) for r in pattern}) != 1:
            raise InvalidArgument(f"{se_id}: ragged pattern")
        return cls(se_id, np.array(pattern, dtype=np.int8), origin)

    def to_strings(self) -> list[str]:
        return ["".join(_CHARS[int(v)] for v in row) for row in self.pattern]

    def _offsets(self, value: int) -> tuple[tuple[int, int], ...]:
        r0, c0 = self.origin
        rs, cs = np.nonzero(self.pattern == value)
        return tuple((int(r) - r0, int(c) - c0) for r, c in zip(rs, cs))

    @property
    def fg_offsets(self) -> tuple[tuple[int, int], ...]:
        return self._offsets(FG)

    @property
    def bg_offsets(self) -> tuple[tuple[int, int], ...]:
        return self._offsets(BG)

    @property
    def radius(self) -> int:
        offs = self.fg_offsets + self.bg_offsets
        return max(max(abs(dr), abs(dc)) for dr, dc in offs)

    @property
    def origin_is_fg(self) -> bool:
        return int(self.pattern[self.origin]) == FG

    def reflect(self) -> StructuringElement:
        rows, cols = self.pattern.shape
        r0, c0 = self.origin
        return StructuringElement(self.id + "'", self.pattern[::-1, ::-1], (rows - 1 - r0, cols - 1 - c0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, StructuringElement):
            return NotImplemented
        return (
            self.id == other.id
            and self.origin == other.origin
            and np.array_equal(self.pattern, other.pattern)
        )

    def __hash__(self) -> int:
        return hash((self.id, self.origin, self.pattern.tobytes()))

    def __repr__(self) -> str:
        return f"StructuringElement({self.id!r}, {'/'.join(self.to_strings())})"


class SELibrary(Mapping):
    """Ordered, immutable id -> StructuringElement map.

    Iteration order is insertion order; search enumeration depends on it.
    """

    def __init__(self, ses):
        items: dict[str, StructuringElement] = {}
        for se in ses:
            if se.id in items:
                raise InvalidArgument(f"duplicate structuring element id {se.id!r}")
            items[se.id] = se
        if not items:
            raise InvalidArgument("structuring element library is empty")
        self._items = items

    def __getitem__(self, se_id: str) -> StructuringElement:
        try:
            return self._items[se_id]
        except KeyError:
            raise UnresolvedSEError(se_id) from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def ids(self) -> list[str]:
        return list(self._items)

    @property
    def max_radius(self) -> int:
        return max(se.radius for se in self._items.values())

    def to_json(self) -> dict:
        out = []
        for se in self._items.values():
            entry = {"id": se.id, "pattern": [list(row) for row in se.to_strings()]}
            rows, cols = se.pattern.shape
            if se.origin != (rows // 2, cols // 2):
                entry["origin"] = list(se.origin)
            out.append(entry)
        return {"ses": out}

    @classmethod
    def from_json(cls, data: dict) -> SELibrary:
        try:
            entries = data["ses"]
        except (KeyError, TypeError):
            raise InvalidArgument('SE library config needs a top-level "ses" list') from None
        ses = []
        for i, entry in enumerate(entries):
            if "id" not in entry or "pattern" not in entry:
                raise InvalidArgument(f"ses[{i}] needs 'id' and 'pattern'")
            rows = ["".join(r) if isinstance(r, list) else r for r in entry["pattern"]]
            ses.append(StructuringElement.from_strings(entry["id"], rows, entry.get("origin")))
        return cls(ses)

    def __repr__(self) -> str:
        return f"SELibrary({self.ids()})"


def load_se_library(path) -> SELibrary:
    return SELibrary.from_json(json.loads(Path(path).read_text()))


_DEFAULT_PATTERNS = [
    ("SE1", ["...", ".#.", "..."]),
    ("SE2", ["###", "###", "###"]),
    ("SE3", [".#.", "###", ".#."]),
    ("SE4", ["#..", ".#.", "..#"]),
    ("SE5", ["..#", ".#.", "#.."]),
    ("SE6", ["???", "###", "???"]),
    ("SE7", ["?#?", "?#?", "?#?"]),
    ("SE8", ["#.#", ".#.", "#.#"]),
]


def default_se_library() -> SELibrary:
    """Eight 3x3 structuring elements SE1..SE8, each with an FG origin."""
    return SELibrary(StructuringElement.from_strings(i, rows) for i, rows in _DEFAULT_PATTERNS)


@dataclass(frozen=True)
class ColorRule:
    """Lookup table (band1 bit, band2 bit) -> output colour."""

    rows: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.rows)
        seen = set()
        for row in rows:
            if len(row) != 3:
                raise InvalidArgument(f"colour rule rows must be [b1, b2, out] triples, got {list(row)}")
            b1, b2, out = row
            if b1 not in (0, 1) or b2 not in (0, 1):
                raise InvalidArgument(f"band bits must be 0 or 1, got {list(row)}")
            if out < 0:
                raise InvalidArgument(f"output colour must be non-negative, got {list(row)}")
            if (b1, b2) in seen:
                raise InvalidArgument(f"duplicate colour rule row for {[b1, b2]}")
            seen.add((b1, b2))
        object.__setattr__(self, "rows", tuple(sorted(rows)))

    @classmethod
    def from_list(cls, rows) -> ColorRule:
        return cls(tuple(tuple(r) for r in rows))

    def to_list(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    @property
    def table(self) -> dict[tuple[int, int], int]:
        return {(b1, b2): out for b1, b2, out in self.rows}

    @property
    def is_total(self) -> bool:
        return len(self.rows) == 4

    @property
    def max_color(self) -> int:
        return max(out for _, _, out in self.rows)


def _shifted(padded: np.ndarray, pad: int, dr: int, dc: int, shape) -> np.ndarray:
    # view whose (r, c) entry is the original grid at (r + dr, c + dc)
    h, w = shape
    return padded[pad + dr : pad + dr + h, pad + dc : pad + dc + w]


def _pad(band: BinaryBand, se: StructuringElement) -> tuple[np.ndarray, int]:
    pad = se.radius
    return np.pad(band.bits, pad, constant_values=False), pad


def dilate(band: BinaryBand, se: StructuringElement) -> BinaryBand:
    padded, pad = _pad(band, se)
    out = np.zeros(band.shape, dtype=bool)
    for dr, dc in se.fg_offsets:
        out |= _shifted(padded, pad, -dr, -dc, band.shape)
    return BinaryBand(out)


def erode(band: BinaryBand, se: StructuringElement) -> BinaryBand:
    padded, pad = _pad(band, se)
    out = np.ones(band.shape, dtype=bool)
    for dr, dc in se.fg_offsets:
        out &= _shifted(padded, pad, dr, dc, band.shape)
    return BinaryBand(out)


def hit_or_miss(band: BinaryBand, se: StructuringElement) -> BinaryBand:
    padded, pad = _pad(band, se)
    out = np.ones(band.shape, dtype=bool)
    for dr, dc in se.fg_offsets:
        out &= _shifted(padded, pad, dr, dc, band.shape)
    for dr, dc in se.bg_offsets:
        out &= ~_shifted(padded, pad, dr, dc, band.shape)
    return BinaryBand(out)


def foreground(image: Image) -> BinaryBand:
    return BinaryBand(image.cells >= 1)


def indicator(band: BinaryBand, num_colors: int) -> Image:
    return Image(band.bits.astype(np.int16), num_colors)


def hit_or_miss_colored(image: Image, se: StructuringElement) -> Image:
    """Foreground indicator of ``image`` with every hit-or-miss match recoloured to 2."""
    if image.num_colors < 3:
        raise InvalidArgument("hit_or_miss_colored needs an image with at least 3 colours")
    fg = foreground(image)
    mask = hit_or_miss(fg, se)
    cells = fg.bits.astype(np.int16)
    cells[mask.bits] = 2
    return Image(cells, image.num_colors)


def extract_band(image: Image, colour: int) -> BinaryBand:
    if not 0 <= colour < image.num_colors:
        raise InvalidArgument(f"colour {colour} out of range [0, {image.num_colors})")
    return BinaryBand(image.cells == colour)


def apply_color_rule(
    band1: BinaryBand, band2: BinaryBand, rule: ColorRule, num_colors: int | None = None
) -> Image:
    if band1.shape != band2.shape:
        raise InvalidArgument(f"band shapes differ: {band1.shape} vs {band2.shape}")
    table = rule.table
    out = np.zeros(band1.shape, dtype=np.int16)
    b1, b2 = band1.bits, band2.bits
    for pair, mask in (
        ((0, 0), ~b1 & ~b2),
        ((0, 1), ~b1 & b2),
        ((1, 0), b1 & ~b2),
        ((1, 1), b1 & b2),
    ):
        if not mask.any():
            continue
        if pair not in table:
            raise IncompleteRuleError(pair)
        out[mask] = table[pair]
    if num_colors is None:
        num_colors = max(2, rule.max_color + 1)
    return Image(out, num_colors)
