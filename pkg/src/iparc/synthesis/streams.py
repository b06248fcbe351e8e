"""Ordered candidate streams, reservoir sampling and the prefix pruning rule."""

from __future__ import annotations

import random
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from itertools import product

from ..errors import InvalidArgument
from ..morphology import BinaryBand, SELibrary, dilate, erode, hit_or_miss
from ..program import Apply, Iterate, fold_steps
from .config import SynthConfig

OP_ORDER = ("D", "E")


@dataclass(frozen=True)
class CandidateSequence:
    """A band pipeline as a flat list of (op, se_id) steps."""

    steps: tuple[tuple[str, str], ...]
    band_id: int = 1

    def __len__(self) -> int:
        return len(self.steps)

    def applies(self) -> list[Apply]:
        return [Apply(op, se) for op, se in self.steps]

    def to_steps(self) -> list:
        """Steps with runs of one operator folded into Iterate nodes."""
        return fold_steps(self.applies())

    def __str__(self) -> str:
        return ", ".join(str(a) for a in self.applies()) or "(identity)"


def _ids(lib_or_ids) -> list[str]:
    if isinstance(lib_or_ids, SELibrary):
        return lib_or_ids.ids()
    return list(lib_or_ids)


def enumerate_sequences(ops: Sequence[str], lib, max_len: int, band_id: int = 1) -> Iterator[CandidateSequence]:
    """All sequences of length 1..max_len, shortest first, then (op, SE) order."""
    if max_len < 1:
        raise InvalidArgument("max_len must be >= 1")
    alphabet = [(op, se) for op in ops for se in _ids(lib)]
    for n in range(1, max_len + 1):
        for steps in product(alphabet, repeat=n):
            yield CandidateSequence(steps, band_id)


def phased_count(n_ids: int, dilations: tuple[int, int], erosions: tuple[int, int], constrained: bool) -> int:
    """Closed-form size of a dilate-then-erode stream."""
    total = 0
    for d in range(dilations[0], dilations[1] + 1):
        m = d if constrained else n_ids
        total += n_ids**d * sum(m**e for e in range(erosions[0], erosions[1] + 1))
    return total


def phased_sequences(
    se_ids: Sequence[str],
    dilations: tuple[int, int],
    erosions: tuple[int, int],
    constrained: bool,
    band_id: int = 1,
) -> Iterator[CandidateSequence]:
    """Dilate-then-erode pipelines, shortest first.

    Within one length, children follow their parent's order: dilation
    extensions in SE order, then erosion extensions. Constrained erosions
    pick a *position* of the dilation phase, so repeated dilation SEs yield
    repeated erosion sequences.
    """
    ids = list(se_ids)
    if not ids:
        raise InvalidArgument("se_ids must be non-empty")
    dlo, dhi = dilations
    elo, ehi = erosions
    level = [((), ())]
    while level:
        nxt = []
        for dil, ero in level:
            d, e = len(dil), len(ero)
            if d >= dlo and e >= elo:
                yield CandidateSequence(tuple(("D", s) for s in dil) + tuple(("E", s) for s in ero), band_id)
            if not e and d < dhi:
                nxt.extend((dil + (s,), ()) for s in ids)
            if d >= dlo and e < ehi:
                nxt.extend((dil, ero + (s,)) for s in (dil if constrained else ids))
        level = nxt


def generate_band2_sequences(se_ids: Sequence[str], cfg: SynthConfig, band_id: int = 2) -> Iterator[CandidateSequence]:
    """Band-2 stream: d dilations then e erosions per the config ranges."""
    return phased_sequences(se_ids, cfg.dilation_counts, cfg.erosion_counts, cfg.erosion_ses_from_dilations, band_id)


def iteration_sequences(se_ids: Sequence[str], max_iterate: int, band_id: int = 1) -> Iterator[CandidateSequence]:
    """``Iterate k× Dilation s`` then ``Iterate k× Erosion s``; k ascending, then SE order."""
    for k in range(1, max_iterate + 1):
        for s in se_ids:
            yield CandidateSequence((("D", s),) * k + (("E", s),) * k, band_id)


def iteration_steps(se_id: str, k: int) -> list:
    return [Iterate(k, Apply("D", se_id)), Iterate(k, Apply("E", se_id))]


def sample_candidates(stream: Iterable, n: int, seed: int) -> list:
    """Uniform reservoir sample of ``n`` items, returned in stream order."""
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    rng = random.Random(seed)
    reservoir: list[tuple[int, object]] = []
    for i, item in enumerate(stream):
        if i < n:
            reservoir.append((i, item))
        else:
            j = rng.randrange(i + 1)
            if j < n:
                reservoir[j] = (i, item)
    reservoir.sort(key=lambda t: t[0])
    return [item for _, item in reservoir]


# -- pruning ---------------------------------------------------------------------


@dataclass(frozen=True)
class Keep:
    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Drop:
    reason: str  # "R1", "R2" or "R3"

    def __bool__(self) -> bool:
        return False


KEEP = Keep()

_OPS = {"D": dilate, "E": erode, "H": hit_or_miss}


def simulate(prefix: CandidateSequence, band: BinaryBand, lib: SELibrary) -> BinaryBand:
    for op, se in prefix.steps:
        band = _OPS[op](band, lib[se])
    return band


def prune(
    prefix: CandidateSequence,
    pairs: Sequence[tuple[BinaryBand, BinaryBand]],
    lib: SELibrary,
    at_boundary: bool = False,
    memo: dict | None = None,
    states: Sequence[BinaryBand] | None = None,
) -> Keep | Drop:
    """Decide whether a dilate-then-erode prefix can still reach its targets.

    ``pairs`` holds (source band, target band) per task pair. The target's
    foreground must end up covered by the band; ``at_boundary`` marks a
    prefix whose dilation phase is complete. ``memo`` carries the states
    seen so far across calls. ``states`` may supply already simulated bands.
    """
    if states is None:
        states = [simulate(prefix, src, lib) for src, _ in pairs]
    eroding = any(op == "E" for op, _ in prefix.steps)
    covers = all(tgt.issubset(cur) for cur, (_, tgt) in zip(states, pairs))
    if eroding and not covers:
        return Drop("R1")
    if at_boundary and not eroding and not covers:
        return Drop("R2")
    if memo is not None:
        key = ("E" if eroding else "D", tuple(s.bits.tobytes() for s in states))
        seen = memo.get(key)
        if seen is not None and seen <= len(prefix):
            return Drop("R3")
        memo[key] = len(prefix)
    return KEEP
