"""Colour-rule inference and rule hypotheses used to steer band pruning."""

from __future__ import annotations

from dataclasses import dataclass
from collections.abc import Sequence
from itertools import product

import numpy as np

from ..bitboard import Board
from ..morphology import BinaryBand, ColorRule, Image

COMBOS = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class Conflict:
    """One (b1, b2) combination seen with two target colours."""

    pair: int
    pixel: tuple[int, int]
    bits: tuple[int, int]
    expected: int
    found: int

    def __str__(self) -> str:
        return (
            f"bits {list(self.bits)} map to colour {self.expected} earlier but to {self.found} "
            f"at pair {self.pair}, pixel {self.pixel}"
        )


def infer_color_rule(
    band1s: Sequence[BinaryBand], band2s: Sequence[BinaryBand], outputs: Sequence[Image]
) -> ColorRule | Conflict:
    """The rule mapping each observed (b1, b2) to its target colour.

    Unobserved combinations default to colour 0. Pairs are scanned in order
    and pixels in row-major order; the first disagreement is the witness.
    """
    table: dict[tuple[int, int], int] = {}
    for p, (b1, b2, out) in enumerate(zip(band1s, band2s, outputs)):
        codes = b1.bits.astype(np.int8) * 2 + b2.bits.astype(np.int8)
        cells = out.cells
        clean = True
        update = {}
        for code, bits in enumerate(COMBOS):
            colours = np.unique(cells[codes == code])
            if colours.size == 0:
                continue
            want = table.get(bits, int(colours[0]))
            if colours.size > 1 or int(colours[0]) != want:
                clean = False
                break
            update[bits] = want
        if not clean:
            return _witness(p, codes, cells, table)
        table.update(update)
    return ColorRule(tuple((b1, b2, table.get((b1, b2), 0)) for b1, b2 in COMBOS))


def _witness(p: int, codes: np.ndarray, cells: np.ndarray, table: dict) -> Conflict:
    local = dict(table)
    h, w = cells.shape
    for r in range(h):
        for c in range(w):
            bits = COMBOS[int(codes[r, c])]
            colour = int(cells[r, c])
            if bits not in local:
                local[bits] = colour
            elif local[bits] != colour:
                return Conflict(p, (r, c), bits, local[bits], colour)
    raise AssertionError("no conflict in pair")


# -- hypotheses --------------------------------------------------------------------


@dataclass(frozen=True)
class Hypothesis:
    """Colours that force each band on: pixel of colour c needs bit b = 1."""

    force1: frozenset[int]
    force2: frozenset[int]
    area: int

    def forced(self, band: int) -> frozenset[int]:
        return self.force1 if band == 1 else self.force2


def rule_hypotheses(observed: Sequence[int], areas: dict[int, int]) -> list[Hypothesis]:
    """Distinct force signatures over all rules whose image covers ``observed``.

    Ordered tightest first (largest forced pixel area), ties broken by the
    sorted colour sets so the order is deterministic.
    """
    colours = sorted(set(observed))
    options = colours + [None]  # None: combination never occurs
    seen = set()
    out = []
    for image in product(options, repeat=4):
        if set(colours) - set(image):
            continue
        force = []
        for band in (0, 1):
            fs = frozenset(c for c in colours if all(bits[band] == 1 for bits, o in zip(COMBOS, image) if o == c))
            force.append(fs)
        key = (force[0], force[1])
        if key in seen:
            continue
        seen.add(key)
        area = sum(areas.get(c, 0) for c in force[0]) + sum(areas.get(c, 0) for c in force[1])
        out.append(Hypothesis(force[0], force[1], area))
    out.sort(key=lambda h: (-h.area, sorted(h.force1), sorted(h.force2)))
    return out


# -- vectorised pair checks -----------------------------------------------------------


class PairChecker:
    """Tests (band 1, band 2) final states for a consistent colour rule."""

    def __init__(self, board: Board, colour_masks: dict[int, int]):
        self.board = board
        self.colours = sorted(colour_masks)
        self.masks = {c: colour_masks[c] for c in self.colours}
        nw = board.nwords
        self.nw = nw
        self.O = np.stack([board.to_words(colour_masks[c], nw) for c in self.colours])  # (C, W)
        self.valid = board.to_words(board.valid, nw)

    def matrix(self, states: Sequence[int]) -> np.ndarray:
        nbytes = self.nw * 8
        raw = b"".join(x.to_bytes(nbytes, "little") for x in states)
        return np.frombuffer(raw, dtype=np.uint64).reshape(len(states), self.nw)

    def prepare(self, B2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return B2, ~B2

    def consistent(self, b1: np.ndarray, prepared) -> np.ndarray:
        """Boolean vector: which band-2 rows admit a rule together with ``b1``.

        A row fails when some (b1, b2) combination covers pixels of two
        different target colours.
        """
        on, off = prepared
        bad = np.zeros(on.shape[0], dtype=bool)
        for side in (b1, ~b1):
            rows = [m for m in self.O & side if m.any()]
            if len(rows) < 2:
                continue
            for part in (on, off):
                count = np.zeros(on.shape[0], dtype=np.int8)
                for m in rows:
                    count += (part & m).any(axis=1)
                bad |= count > 1
        return ~bad

    def rule_for(self, b1: int, b2: int) -> ColorRule:
        table = {}
        for bits in COMBOS:
            region = (b1 if bits[0] else ~b1) & (b2 if bits[1] else ~b2) & self.board.valid
            for c in self.colours:
                if region & self.masks[c]:
                    table[bits] = c
                    break
        return ColorRule(tuple((x, y, table.get((x, y), 0)) for x, y in COMBOS))
