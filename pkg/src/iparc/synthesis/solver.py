"""Per-category solvers."""

from __future__ import annotations

import time
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np

from ..bitboard import Board
from ..errors import InvalidArgument
from ..morphology import ColorRule, SELibrary, default_se_library, extract_band, hit_or_miss_colored
from ..program import Apply, MorphProgram, fold_steps, run_program
from ..taskio import Category, Task
from .config import BudgetExhausted, Deadline, SearchStats, SynthConfig
from .macros import MacroLibrary
from .rules import PairChecker, rule_hypotheses
from .search import (
    BandList,
    Space,
    Token,
    exact_search,
    general_band,
    iteration_band,
    PairSampler,
    pair_search,
    phased_band,
    primitive_alphabet,
)
from .streams import phased_count


@dataclass
class Solution:
    program: MorphProgram
    stats: SearchStats

    solved = True


@dataclass
class NoSolution:
    stats: SearchStats
    reason: str = "search space exhausted"
    segments: list[SearchStats] = field(default_factory=list)

    solved = False
    program = None


def verify(p: MorphProgram, task: Task, lib: SELibrary | None = None) -> bool:
    lib = lib or default_se_library()
    return all(run_program(p, pair.input, lib) == pair.output for pair in task.pairs)


def make_board(task: Task, lib: SELibrary) -> Board:
    h, w = task.shape
    return Board(h, w, len(task.pairs), pad=max(1, lib.max_radius))


def _steps(token_seq: Token) -> list:
    return fold_steps([Apply(op, se) for op, se in token_seq])


# -- band sources and targets ------------------------------------------------------------


def fg_source(board: Board, images) -> int:
    return board.pack([img.cells >= 1 for img in images])


def colour_sources(board: Board, images) -> tuple[int, int]:
    return board.pack([img.cells == 1 for img in images]), board.pack([img.cells == 2 for img in images])


def split_sources(board: Board, images, lib: SELibrary, se_id: str) -> tuple[int, int]:
    split = [hit_or_miss_colored(img, lib[se_id]) for img in images]
    return (
        board.pack([extract_band(s, 1).bits for s in split]),
        board.pack([extract_band(s, 2).bits for s in split]),
    )


def packed_sources(board: Board, images) -> tuple[int, int]:
    """Bands of a two-band snapshot image packed as b1 + 2*b2."""
    return board.pack([(img.cells & 1) > 0 for img in images]), board.pack([(img.cells & 2) > 0 for img in images])


def colour_masks(board: Board, images) -> dict[int, int]:
    present = sorted({int(v) for img in images for v in np.unique(img.cells)})
    return {c: board.pack([img.cells == c for img in images]) for c in present}


# -- engines -----------------------------------------------------------------------------


def _single_band(
    space: Space,
    category: Category,
    source: int,
    target: int,
    cfg: SynthConfig,
    macros: MacroLibrary,
) -> list[Apply] | None:
    ids = space.lib.ids()
    st = space.stats
    entries = macros.get(category)
    for entry in entries:
        st.candidates_enumerated += 1
        st.candidates_tested += 1
        if space.run(source, entry.token) == target:
            entry_hit = entries.index(entry)
            macros.record_hit(category, entry_hit)
            return [Apply(op, se) for op, se in entry.token]
    if category is Category.B_ITERATION:
        for k in range(1, cfg.max_iterate + 1):
            for s in ids:
                st.candidates_enumerated += 1
                st.candidates_tested += 1
                seq = (("D", s),) * k + (("E", s),) * k
                if space.run(source, seq) == target:
                    return [Apply(op, se) for op, se in seq]
    alphabet = [e.token for e in entries] + primitive_alphabet(ids)
    found = exact_search(space, [source], [target], alphabet, cfg.max_seq_len, cfg.pruning_enabled)
    if found is None:
        return None
    return [Apply(op, se) for ti in found for op, se in alphabet[ti]]


@dataclass(frozen=True)
class BandStream:
    """A band's candidate stream: its closed-form size and a builder."""

    nominal: int
    build: Callable[[Space, int, int, bool], BandList]


def _band_makers(category: Category, cfg: SynthConfig, ids: list[str]) -> list[tuple[BandStream, BandStream]]:
    """Band-1/band-2 streams, tried in order."""
    n = len(ids)
    alphabet = primitive_alphabet(ids)
    constrained = cfg.erosion_ses_from_dilations

    def phased(dil, ero):
        return BandStream(
            phased_count(n, dil, ero, constrained),
            lambda sp, src, must, pr: phased_band(sp, src, must, ids, dil, ero, constrained, pr),
        )

    def general(length):
        return BandStream(
            sum(len(alphabet) ** j for j in range(length + 1)),
            lambda sp, src, must, pr: general_band(sp, src, must, alphabet, length, pr),
        )

    iteration = BandStream(
        cfg.max_iterate * n, lambda sp, src, must, pr: iteration_band(sp, src, must, ids, cfg.max_iterate, pr)
    )
    if category is Category.A_HARD:
        colour = phased(cfg.dilation_counts, cfg.erosion_counts)
        return [(colour, colour)]
    if category is Category.B_SELECTION:
        return [(general(cfg.selection_max_len), general(cfg.selection_max_len))]
    if category is Category.B_HARD:
        band2 = phased(cfg.dilation_counts, cfg.erosion_counts)
        return [(iteration, band2), (general(cfg.max_seq_len), band2)]
    raise InvalidArgument(f"{category.value} is not a two-band category")


def _two_band(
    space: Space,
    sources: Iterator[tuple[str | None, int, int]],
    makers: Sequence[tuple[BandStream, BandStream]],
    masks: dict[int, int],
    cfg: SynthConfig,
) -> tuple[str | None, Token, Token, ColorRule] | None:
    """Joint search over (split, rule hypothesis, band-1, band-2) units.

    Each hypothesis fixes which pixels each band must cover; the union of
    hypotheses covers every colour rule, so the search stays complete.
    Candidates are counted jointly: one candidate is a (band 1, band 2) pair.
    """
    st = space.stats
    checker = PairChecker(space.board, masks)
    areas = {c: m.bit_count() for c, m in masks.items()}
    if cfg.pruning_enabled:
        hyps = rule_hypotheses(list(masks), areas)
        musts = [(sum_masks(masks, h.force1), sum_masks(masks, h.force2)) for h in hyps]
    else:
        musts = [(0, 0)]
    sources = list(sources)
    group = 0
    for stream1, stream2 in makers:
        for split, s1, s2 in sources:
            cache: dict = {}

            def units():
                # one unit per hypothesis: its band lists, built lazily in order
                for must1, must2 in musts:
                    joint = stream1.nominal * stream2.nominal
                    st.candidates_enumerated += joint
                    if (1, must1) not in cache:
                        cache[1, must1] = stream1.build(space, s1, must1, cfg.pruning_enabled)
                    l1 = cache[1, must1]
                    if not len(l1):
                        st.candidates_pruned += joint
                        continue
                    if (2, must2) not in cache:
                        cache[2, must2] = stream2.build(space, s2, must2, cfg.pruning_enabled)
                    l2 = cache[2, must2]
                    st.candidates_pruned += joint - len(l1) * len(l2)
                    if len(l2):
                        yield l1, l2

            if cfg.randomization_enabled:
                hit = _sampled(space, list(units()), checker, cfg, group)
            else:
                hit = next(((l1, l2, ij) for l1, l2 in units() if (ij := pair_search(space, l1, l2, checker))), None)
            group += 1
            if hit is not None:
                l1, l2, (i, j) = hit
                rule = checker.rule_for(l1.states[i], l2.states[j])
                return split, l1.steps[i], l2.steps[j], rule
    return None


def _sampled(space: Space, units: list, checker: PairChecker, cfg: SynthConfig, group: int):
    """Round-robin random rounds over every hypothesis unit of one split."""
    samplers = [
        (l1, l2, PairSampler(space, l1, l2, checker, cfg.sample_count, (cfg.seed + 7919 * group + 104729 * k) % 2**64))
        for k, (l1, l2) in enumerate(units)
    ]
    while True:
        live = [s for s in samplers if not s[2].done]
        if not live:
            return None
        for l1, l2, sampler in live:
            ij = sampler.step()
            if ij is not None:
                return l1, l2, ij


def sum_masks(masks: dict[int, int], colours) -> int:
    out = 0
    for c in colours:
        out |= masks[c]
    return out


def _program(split, steps1: Token, steps2: Token, rule: ColorRule) -> MorphProgram:
    return MorphProgram.from_steps({1: _steps(steps1), 2: _steps(steps2)}, split=split, color_rule=rule)


def _split_ids(lib: SELibrary) -> list[str]:
    return lib.ids()


def _search(task: Task, cfg: SynthConfig, lib: SELibrary, macros: MacroLibrary, space: Space) -> MorphProgram | None:
    board = space.board
    inputs = [p.input for p in task.pairs]
    outputs = [p.output for p in task.pairs]
    cat = task.category
    if not cat.two_band:
        if any(int(o.cells.max()) > 1 for o in outputs):
            return None
        steps = _single_band(space, cat, fg_source(board, inputs), fg_source(board, outputs), cfg, macros)
        return None if steps is None else MorphProgram.from_steps({1: fold_steps(steps)})
    masks = colour_masks(board, outputs)
    if cat is Category.A_HARD:
        sources = iter([(None, *colour_sources(board, inputs))])
    else:
        sources = ((s, *split_sources(board, inputs, lib, s)) for s in _split_ids(lib))
    found = _two_band(space, sources, _band_makers(cat, cfg, lib.ids()), masks, cfg)
    if found is None:
        return None
    return _program(*found)


def solve(
    task: Task,
    cfg: SynthConfig | None = None,
    lib: SELibrary | None = None,
    macros: MacroLibrary | None = None,
) -> Solution | NoSolution:
    cfg = cfg or SynthConfig()
    lib = lib or default_se_library()
    macros = macros or MacroLibrary()
    if cfg.use_snapshots and task.snapshot_count:
        return solve_with_snapshots(task, cfg, lib, macros)
    stats = SearchStats(seed=cfg.seed)
    start = time.monotonic()
    space = Space(make_board(task, lib), lib, Deadline(cfg.time_budget), stats)
    try:
        program = _search(task, cfg, lib, macros, space)
        reason = "search space exhausted"
    except BudgetExhausted:
        program = None
        reason = "time budget exhausted"
    stats.elapsed = time.monotonic() - start
    if program is None:
        return NoSolution(stats, reason)
    if not verify(program, task, lib):
        raise AssertionError(f"{task.id}: search accepted a program that does not verify")
    stats.solved = True
    return Solution(program, stats)


from .snapshots import solve_with_snapshots  # noqa: E402
