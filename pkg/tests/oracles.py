"""Brute-force reference implementations used as test oracles.

Everything here is written from the set definitions with plain loops over
pixels and SE cells, sharing no code with the library's shifted-array or
bit-board implementations.
"""

from __future__ import annotations

from itertools import product

import numpy as np

from iparc.morphology import BG, FG, BinaryBand, StructuringElement


def _cells(se: StructuringElement, value: int):
    r0, c0 = se.origin
    rows, cols = se.pattern.shape
    return [(i - r0, j - c0) for i in range(rows) for j in range(cols) if se.pattern[i, j] == value]


def _at(bits: np.ndarray, r: int, c: int) -> bool:
    h, w = bits.shape
    return 0 <= r < h and 0 <= c < w and bool(bits[r, c])


def dilate_ref(band: BinaryBand, se: StructuringElement) -> np.ndarray:
    bits = band.bits
    h, w = bits.shape
    out = np.zeros((h, w), dtype=bool)
    for qr, qc in product(range(h), range(w)):
        if not bits[qr, qc]:
            continue
        for dr, dc in _cells(se, FG):
            r, c = qr + dr, qc + dc
            if 0 <= r < h and 0 <= c < w:
                out[r, c] = True
    return out


def erode_ref(band: BinaryBand, se: StructuringElement) -> np.ndarray:
    bits = band.bits
    h, w = bits.shape
    out = np.zeros((h, w), dtype=bool)
    for r, c in product(range(h), range(w)):
        out[r, c] = all(_at(bits, r + dr, c + dc) for dr, dc in _cells(se, FG))
    return out


def hit_or_miss_ref(band: BinaryBand, se: StructuringElement) -> np.ndarray:
    bits = band.bits
    h, w = bits.shape
    out = np.zeros((h, w), dtype=bool)
    for r, c in product(range(h), range(w)):
        fits = all(_at(bits, r + dr, c + dc) for dr, dc in _cells(se, FG))
        misses = all(not _at(bits, r + dr, c + dc) for dr, dc in _cells(se, BG))
        out[r, c] = fits and misses
    return out


def random_band(rng: np.random.Generator, max_side: int = 8, density: float | None = None) -> BinaryBand:
    h, w = rng.integers(1, max_side + 1, size=2)
    p = rng.uniform(0.1, 0.9) if density is None else density
    return BinaryBand(rng.random((h, w)) < p)


def random_se(rng: np.random.Generator, kinds=(FG, BG, -1), fg_origin: bool = False, max_side: int = 3) -> StructuringElement:
    sides = [s for s in (1, 3, 5) if s <= max_side]
    rows, cols = rng.choice(sides), rng.choice(sides)
    pattern = rng.choice(np.array(kinds, dtype=np.int8), size=(rows, cols))
    if fg_origin:
        pattern[rows // 2, cols // 2] = FG
    if not (pattern == FG).any():
        pattern[rng.integers(rows), rng.integers(cols)] = FG
    return StructuringElement("T", pattern)


def run_steps_ref(bits: np.ndarray, steps, lib) -> np.ndarray:
    """Apply (op, se_id) steps with the reference operators."""
    ops = {"D": dilate_ref, "E": erode_ref, "H": hit_or_miss_ref}
    for op, se in steps:
        bits = ops[op](BinaryBand(bits), lib[se])
    return bits
