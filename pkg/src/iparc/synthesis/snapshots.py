"""Solving tasks split into segments by intermediate checkpoint images.

A single-band snapshot is the band's indicator image; a two-band snapshot
packs the band states as ``b1 + 2*b2``. Each segment is searched on its own
budget and the segment programs are concatenated band by band.
"""

from __future__ import annotations

import time

from ..morphology import SELibrary, default_se_library
from ..program import Apply, MorphProgram, fold_steps
from ..taskio import Category, Task
from .config import BudgetExhausted, Deadline, SearchStats, SynthConfig
from .macros import MacroLibrary
from .search import (
    BandList,
    Space,
    Token,
    exact_search,
    general_band,
    phased_band,
    phased_nominal,
    primitive_alphabet,
)


class _Template:
    """How one band's pipeline is shaped, for resuming across checkpoints."""

    def head(self, space: Space, source: int, target: int, node, pruning: bool) -> list:
        """Continuations from ``node`` whose band equals ``target``, as (steps, node) pairs in stream order."""
        raise NotImplementedError

    def tails(self, node) -> tuple:
        """(stream resuming from ``node``, stream ignoring how the checkpoint was reached)."""
        raise NotImplementedError


def _exact_matches(space: Space, band: BandList, target: int) -> list:
    """Matches of the shortest matching length (the stream is shortest first)."""
    st = space.stats
    st.candidates_enumerated += band.nominal
    st.candidates_pruned += band.pruned
    out = []
    for i, x in enumerate(band.states):
        if out and len(band.steps[i]) > len(out[0][0]):
            break
        st.candidates_tested += 1
        if x == target:
            out.append((band.steps[i], band.nodes[i]))
    return out


def _prefixed(band: BandList, prefix: Token) -> BandList:
    if not prefix:
        return band
    return BandList([prefix + s for s in band.steps], band.states, band.nominal, band.nodes)


class _Phased(_Template):
    def __init__(self, ids, dilations, erosions, constrained):
        self.ids, self.dil, self.ero, self.constrained = list(ids), dilations, erosions, constrained

    def head(self, space, source, target, node, pruning):
        node = node or ((), ())
        band = phased_band(
            space, source, target if pruning else 0, self.ids, self.dil, self.ero, self.constrained, pruning,
            root=node, prefixes=True,
        )
        return _exact_matches(space, band, target)

    def tails(self, node):
        from .solver import BandStream

        node = node or ((), ())
        ids, dil, ero, con = self.ids, self.dil, self.ero, self.constrained
        depth = (len(node[0]), len(node[1]))
        resume = BandStream(
            phased_nominal(len(ids), dil, ero, con, depth),
            lambda sp, src, must, pr: phased_band(sp, src, must, ids, dil, ero, con, pr, root=node),
        )
        # any dilate-then-erode tail, in case the head took a different route to the checkpoint
        loose_d, loose_e = (0, dil[1]), (0, ero[1])
        loose = BandStream(
            phased_nominal(len(ids), loose_d, loose_e, False),
            lambda sp, src, must, pr: phased_band(sp, src, must, ids, loose_d, loose_e, False, pr),
        )
        return resume, loose


class _Iteration(_Template):
    """``Iterate k× Dilation s`` then ``Iterate k× Erosion s``; a node is (s, dilations, erosions)."""

    def __init__(self, ids, max_iterate):
        self.ids, self.k = list(ids), max_iterate

    def _continuations(self, node, complete: bool):
        se, a0, b0 = node or (None, 0, 0)
        out = [((), node or (None, 0, 0))] if not complete or (a0 and a0 == b0) else []
        for s in [se] if se else self.ids:
            for a in range(0 if b0 else 0, (self.k - a0 if not b0 else 0) + 1):
                for b in range(0, a0 + a - b0 + 1):
                    if a == 0 and b == 0:
                        continue
                    if complete and b0 + b != a0 + a:
                        continue
                    out.append(((("D", s),) * a + (("E", s),) * b, (s, a0 + a, b0 + b)))
        out.sort(key=lambda t: (len(t[0]), [(op == "E", self.ids.index(se)) for op, se in t[0]]))
        return out

    def _band(self, space, source, must, node, pruning, complete):
        steps, states, nodes = [], [], []
        seqs = self._continuations(node, complete)
        for seq, nd in seqs:
            space.deadline.poll()
            x = space.run(source, seq)
            if pruning and x & must != must:
                continue
            steps.append(seq)
            states.append(x)
            nodes.append(nd)
        return BandList(steps, states, len(seqs), nodes)

    def head(self, space, source, target, node, pruning):
        band = self._band(space, source, target if pruning else 0, node, pruning, complete=False)
        return _exact_matches(space, band, target)

    def tails(self, node):
        from .solver import BandStream

        resume = BandStream(
            len(self._continuations(node, True)),
            lambda sp, src, must, pr: self._band(sp, src, must, node, pr, complete=True),
        )
        loose = BandStream(
            len(self._continuations(None, False)),
            lambda sp, src, must, pr: self._band(sp, src, must, None, pr, complete=False),
        )
        return resume, loose


class _General(_Template):
    def __init__(self, ids, max_len, macros=()):
        self.alphabet = list(macros) + primitive_alphabet(ids)
        self.max_len = max_len

    def head(self, space, source, target, node, pruning):
        found = exact_search(space, [source], [target], self.alphabet, self.max_len, pruning)
        if found is None:
            return []
        return [(tuple(step for ti in found for step in self.alphabet[ti]), None)]

    def tails(self, node):
        from .solver import BandStream

        alphabet, n = self.alphabet, self.max_len
        stream = BandStream(
            sum(len(alphabet) ** j for j in range(n + 1)),
            lambda sp, src, must, pr: general_band(sp, src, must, alphabet, n, pr),
        )
        return stream, None


MAX_ROUTES = 16


def _with_prefix(build, prefix: Token):
    return lambda sp, src, must, pr: _prefixed(build(sp, src, must, pr), prefix)


def _templates(category: Category, cfg: SynthConfig, ids: list[str], macros: list[Token]) -> list[_Template]:
    phased = _Phased(ids, cfg.dilation_counts, cfg.erosion_counts, cfg.erosion_ses_from_dilations)
    if category is Category.A_HARD:
        return [phased, phased]
    if category is Category.B_SELECTION:
        return [_General(ids, cfg.selection_max_len), _General(ids, cfg.selection_max_len)]
    if category is Category.B_HARD:
        return [_Iteration(ids, cfg.max_iterate), phased]
    return [_General(ids, cfg.max_seq_len, macros)]


def solve_with_snapshots(
    task: Task, cfg: SynthConfig | None = None, lib: SELibrary | None = None, macros: MacroLibrary | None = None
):
    from .solver import (
        NoSolution,
        Solution,
        _two_band,
        colour_masks,
        colour_sources,
        fg_source,
        make_board,
        packed_sources,
        split_sources,
        verify,
    )

    cfg = cfg or SynthConfig()
    lib = lib or default_se_library()
    macros = macros or MacroLibrary()
    s = task.snapshot_count
    if s < 1:
        raise ValueError(f"{task.id} carries no snapshots")
    stages = [[p.input for p in task.pairs]]
    stages += [[p.snapshots[t] for p in task.pairs] for t in range(s)]
    outputs = [p.output for p in task.pairs]
    board = make_board(task, lib)
    ids = lib.ids()
    two_band = task.category.two_band
    templates = _templates(task.category, cfg, ids, [m.token for m in macros.get(task.category)])
    budget = cfg.time_budget / (s + 1)
    total = SearchStats(seed=cfg.seed)
    start = time.monotonic()
    # per band: the routes (steps so far, template node) that reach the latest checkpoint
    routes: list[list] = [[((), None)] for _ in templates]
    split = None
    rule = None
    failed = None

    def heads(space, sources, targets):
        out = []
        for tpl, band_routes, src, tgt in zip(templates, routes, sources, targets):
            found = []
            for prefix, node in band_routes:
                found += [(prefix + steps, nd) for steps, nd in tpl.head(space, src, tgt, node, cfg.pruning_enabled)]
            if not found:
                return None
            out.append(found[:MAX_ROUTES])
        return out

    def final_makers():
        from .solver import BandStream

        per_band = []
        for tpl, band_routes in zip(templates, routes):
            streams = []
            for prefix, node in band_routes:
                resume, _ = tpl.tails(node)
                streams.append((0, BandStream(resume.nominal, _with_prefix(resume.build, prefix))))
            _, loose = tpl.tails(None)
            if loose is not None:
                streams.append((1, BandStream(loose.nominal, _with_prefix(loose.build, band_routes[0][0]))))
            per_band.append(streams)
        # resumed pairs first, then pairs with one loose band, then fully loose
        pairs = [(la + lb, a, b) for la, a in per_band[0] for lb, b in per_band[1]]
        return [(a, b) for _, a, b in sorted(pairs, key=lambda t: t[0])]

    def band_sources(images):
        return packed_sources(board, images) if two_band else (fg_source(board, images),)

    try:
        for seg in range(s + 1):
            st = SearchStats(seed=cfg.seed)
            total.segments.append(st)
            seg_start = time.monotonic()
            space = Space(board, lib, Deadline(budget), st)
            found = None
            try:
                if not two_band and seg == s:
                    found = heads(space, band_sources(stages[seg]), band_sources(outputs))
                elif seg < s:
                    targets = band_sources(stages[seg + 1])
                    if seg > 0 or not two_band:
                        found = heads(space, band_sources(stages[seg]), targets)
                    elif task.category is Category.A_HARD:
                        found = heads(space, colour_sources(board, stages[0]), targets)
                    else:
                        for sid in ids:
                            found = heads(space, split_sources(board, stages[0], lib, sid), targets)
                            if found is not None:
                                split = sid
                                break
                else:
                    hit = _two_band(
                        space,
                        iter([(split, *band_sources(stages[seg]))]),
                        final_makers(),
                        colour_masks(board, outputs),
                        cfg,
                    )
                    if hit is not None:
                        _, t1, t2, rule = hit
                        found = [[(t1, None)], [(t2, None)]]
            except BudgetExhausted:
                found = None
            st.elapsed = time.monotonic() - seg_start
            total.add(st)
            if found is None:
                failed = seg
                break
            st.solved = True
            routes = found
    finally:
        total.elapsed = time.monotonic() - start
    if failed is not None:
        return NoSolution(total, f"segment {failed + 1} of {s + 1} unsolved", list(total.segments))
    bands = {b + 1: fold_steps([Apply(op, se) for op, se in r[0][0]]) for b, r in enumerate(routes) if r[0][0]}
    if two_band:
        program = MorphProgram.from_steps(bands, split=split, color_rule=rule)
    else:
        program = MorphProgram.from_steps(bands)
    if not verify(program, task, lib):
        raise AssertionError(f"{task.id}: concatenated segment programs do not verify")
    total.solved = True
    return Solution(program, total)
