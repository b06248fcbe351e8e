"""Packed bit-board bands for fast search.

A ``Board`` stacks the same band of every task pair into one Python int.
Each pair occupies ``height`` rows of ``stride = width + pad`` bits, and
consecutive pairs are separated by ``pad`` empty rows, so shifting by at
most ``pad`` rows/columns never leaks foreground between pairs or wraps
around a row. After every operator the result is masked back onto the
grid cells, which keeps the "outside is background" border semantics.
"""

from __future__ import annotations

import numpy as np

from .morphology import BinaryBand, StructuringElement


class Board:
    def __init__(self, height: int, width: int, count: int, pad: int = 2):
        self.height = height
        self.width = width
        self.count = count
        self.pad = pad
        self.stride = width + pad
        self.block = (height + pad) * self.stride
        self.nbits = count * self.block
        row = (1 << width) - 1
        one = 0
        for r in range(height):
            one |= row << (r * self.stride)
        self.pair_masks = [one << (p * self.block) for p in range(count)]
        self.valid = 0
        for m in self.pair_masks:
            self.valid |= m
        self._ops: dict[tuple[str, str], tuple] = {}

    # -- packing -------------------------------------------------------------

    def pack(self, grids) -> int:
        """Pack ``count`` boolean (height, width) arrays into one int."""
        buf = np.zeros((self.count, self.height + self.pad, self.stride), dtype=bool)
        for p, g in enumerate(grids):
            buf[p, : self.height, : self.width] = np.asarray(g, dtype=bool)
        packed = np.packbits(buf.reshape(-1), bitorder="little")
        return int.from_bytes(packed.tobytes(), "little")

    def unpack(self, x: int) -> list[np.ndarray]:
        nbytes = (self.nbits + 7) // 8
        raw = np.frombuffer(x.to_bytes(nbytes, "little"), dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder="little")[: self.nbits]
        buf = bits.reshape(self.count, self.height + self.pad, self.stride).astype(bool)
        return [buf[p, : self.height, : self.width].copy() for p in range(self.count)]

    def pack_bands(self, bands) -> int:
        return self.pack([b.bits for b in bands])

    def unpack_bands(self, x: int) -> list[BinaryBand]:
        return [BinaryBand(g) for g in self.unpack(x)]

    def split(self, x: int) -> list[int]:
        """Per-pair slices of a board, each shifted down to bit 0."""
        return [(x & m) >> (p * self.block) for p, m in enumerate(self.pair_masks)]

    def to_words(self, x: int, nwords: int | None = None) -> np.ndarray:
        if nwords is None:
            nwords = self.nwords
        return np.frombuffer(x.to_bytes(nwords * 8, "little"), dtype=np.uint64)

    @property
    def nwords(self) -> int:
        return (self.nbits + 63) // 64

    # -- operators -------------------------------------------------------------

    def _shift(self, dr: int, dc: int) -> int:
        return dr * self.stride + dc

    def compile(self, op: str, se: StructuringElement) -> tuple:
        key = (op, se.id)
        cached = self._ops.get(key)
        if cached is not None:
            return cached
        if se.radius > self.pad:
            raise ValueError(f"{se.id} has radius {se.radius} > board pad {self.pad}")
        if op == "D":
            # output gains input shifted by +offset
            shifts = tuple(self._shift(dr, dc) for dr, dc in se.fg_offsets)
            compiled = (op, shifts, ())
        else:
            # output reads input at pos + offset, i.e. input shifted by -offset
            fg = tuple(-self._shift(dr, dc) for dr, dc in se.fg_offsets)
            bg = tuple(-self._shift(dr, dc) for dr, dc in se.bg_offsets) if op == "H" else ()
            compiled = (op, fg, bg)
        self._ops[key] = compiled
        return compiled

    def apply(self, x: int, compiled: tuple) -> int:
        op, fg, bg = compiled
        if op == "D":
            r = 0
            for s in fg:
                r |= x << s if s >= 0 else x >> -s
            return r & self.valid
        r = self.valid
        for s in fg:
            r &= x << s if s >= 0 else x >> -s
            if not r:
                return 0
        if bg:
            miss = 0
            for s in bg:
                miss |= x << s if s >= 0 else x >> -s
            r &= ~miss
        return r & self.valid

    def dilate(self, x: int, se: StructuringElement) -> int:
        return self.apply(x, self.compile("D", se))

    def erode(self, x: int, se: StructuringElement) -> int:
        return self.apply(x, self.compile("E", se))

    def hit_or_miss(self, x: int, se: StructuringElement) -> int:
        return self.apply(x, self.compile("H", se))

    def box_dilate(self, x: int, radius: int = 1) -> int:
        r = x
        for _ in range(radius):
            row = r | (r << 1) | (r >> 1)
            r = (row | (row << self.stride) | (row >> self.stride)) & self.valid
        return r

    def box_erode(self, x: int, radius: int = 1) -> int:
        r = x
        for _ in range(radius):
            row = r & (r << 1) & (r >> 1)
            r = row & (row << self.stride) & (row >> self.stride) & self.valid
        return r
