"""Search engines over packed bit-boards.

Every engine walks its candidates in a fixed order and reports how many it
enumerated (including whole subtrees dropped by pruning), pruned and tested.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ..bitboard import Board
from ..morphology import SELibrary
from .config import Deadline, SearchStats
from .rules import PairChecker
from .streams import sample_candidates

Token = tuple[tuple[str, str], ...]


class Space:
    """Shared state for one search: board, SE library, budget and counters."""

    def __init__(self, board: Board, lib: SELibrary, deadline: Deadline, stats: SearchStats):
        self.board = board
        self.lib = lib
        self.deadline = deadline
        self.stats = stats

    def op(self, code: str, se_id: str) -> tuple:
        return self.board.compile(code, self.lib[se_id])

    def run(self, x: int, steps: Sequence[tuple[str, str]]) -> int:
        apply = self.board.apply
        for code, se in steps:
            x = apply(x, self.op(code, se))
        return x


def primitive_alphabet(se_ids: Sequence[str], ops=("D", "E")) -> list[Token]:
    return [((op, s),) for op in ops for s in se_ids]


def _geometric(a: int, depth: int) -> int:
    return sum(a**j for j in range(depth + 1))


# -- exact single-band search ---------------------------------------------------------


def exact_search(
    space: Space,
    sources: Sequence[int],
    targets: Sequence[int],
    alphabet: Sequence[Token],
    max_depth: int,
    pruning: bool,
) -> tuple[int, ...] | None:
    """Shortest token sequence mapping every source band onto its target exactly.

    ``sources``/``targets`` hold one packed board per band; all bands run the
    same tokens. Returns token indices or None when the space is exhausted.
    With pruning, a state already reached at the same or smaller depth is
    dropped with its subtree.
    """
    st = space.stats
    src = tuple(sources)
    tgt = tuple(targets)
    st.candidates_enumerated += 1
    st.candidates_tested += 1
    if src == tgt:
        return ()
    if max_depth < 1:
        return None
    compiled = [[space.op(c, s) for c, s in tok] for tok in alphabet]
    if pruning:
        return _exact_bfs(space, src, tgt, compiled, max_depth)
    for depth in range(1, max_depth + 1):
        found = _exact_dfs(space, src, tgt, compiled, depth)
        if found is not None:
            return found
    return None


def _apply_token(apply, states, ops):
    out = []
    for x in states:
        for c in ops:
            x = apply(x, c)
        out.append(x)
    return tuple(out)


def _exact_bfs(space, src, tgt, compiled, max_depth):
    st = space.stats
    apply = space.board.apply
    poll = space.deadline.poll
    a = len(compiled)
    sub = [_geometric(a, max_depth - level) for level in range(max_depth + 1)]
    seen = {src: 0}
    frontier = [((), src)]
    for depth in range(1, max_depth + 1):
        nxt = []
        for seq, state in frontier:
            for ti, ops in enumerate(compiled):
                poll()
                x = _apply_token(apply, state, ops)
                if x in seen:
                    st.candidates_enumerated += sub[depth]
                    st.candidates_pruned += sub[depth]
                    continue
                st.candidates_enumerated += 1
                st.candidates_tested += 1
                path = seq + (ti,)
                if x == tgt:
                    return path
                seen[x] = depth
                nxt.append((path, x))
        frontier = nxt
        if not frontier:
            break
    return None


def _exact_dfs(space, src, tgt, compiled, depth):
    st = space.stats
    apply = space.board.apply
    poll = space.deadline.poll
    path: list[int] = []

    def visit(state, level):
        for ti, ops in enumerate(compiled):
            poll()
            x = _apply_token(apply, state, ops)
            path.append(ti)
            if level + 1 == depth:
                st.candidates_enumerated += 1
                st.candidates_tested += 1
                if x == tgt:
                    return True
            elif visit(x, level + 1):
                return True
            path.pop()
        return False

    return tuple(path) if visit(src, 0) else None


# -- per-band candidate lists for rule targets ----------------------------------------


@dataclass
class BandList:
    """Surviving candidates of one band stream, in stream order.

    ``nodes`` optionally records where each candidate ends inside its
    template, so a later segment can resume from there.
    """

    steps: list[Token]
    states: list[int]
    nominal: int
    nodes: list | None = None

    @property
    def pruned(self) -> int:
        return self.nominal - len(self.states)

    def __len__(self) -> int:
        return len(self.states)


def _covers(x: int, must: int) -> bool:
    return x & must == must


def phased_nominal(
    n: int,
    dilations: tuple[int, int],
    erosions: tuple[int, int],
    constrained: bool,
    root: tuple[int, int] = (0, 0),
    prefixes: bool = False,
) -> int:
    """Candidates below (and including) a template node at depth ``root`` = (d, e)."""
    dlo, dhi = dilations
    elo, ehi = erosions

    def cand(d, e):
        return 1 if prefixes or (d >= dlo and e >= elo) else 0

    def count_e(d, e):
        m = d if constrained else n
        return cand(d, e) + (m * count_e(d, e + 1) if e < ehi else 0)

    def count_d(d):
        m = d if constrained else n
        total = cand(d, 0) + (n * count_d(d + 1) if d < dhi else 0)
        if d >= dlo and ehi >= 1 and m:
            total += m * count_e(d, 1)
        return total

    d0, e0 = root
    return count_d(d0) if e0 == 0 else count_e(d0, e0)


def phased_band(
    space: Space,
    source: int,
    must: int,
    se_ids: Sequence[str],
    dilations: tuple[int, int],
    erosions: tuple[int, int],
    constrained: bool,
    pruning: bool,
    root: tuple[tuple[int, ...], tuple[int, ...]] = ((), ()),
    prefixes: bool = False,
) -> BandList:
    """Dilate-then-erode stream with prefix pruning, shortest first.

    ``must`` is the set of pixels every final band has to contain. In the
    erosion phase a band that misses one of them is dropped with its whole
    subtree; a dilation phase that ends short of them skips all erosions.
    A state seen before at the same phase and depth (with the same erosion
    SE support when erosions are constrained) through a prefix no longer
    than the current one is dropped as a duplicate.

    ``root`` = (dilation SE indices, erosion SE indices) already applied to
    ``source``; only the remaining steps are emitted. With ``prefixes`` every
    template prefix is a candidate, not just complete pipelines.
    """
    ids = list(se_ids)
    n = len(ids)
    dlo, dhi = dilations
    elo, ehi = erosions
    apply = space.board.apply
    poll = space.deadline.poll
    dil_ops = [space.op("D", s) for s in ids]
    ero_ops = [space.op("E", s) for s in ids]
    root_dil, root_ero = tuple(root[0]), tuple(root[1])
    base_d, base_e = len(root_dil), len(root_ero)

    steps_out: list[Token] = []
    states_out: list[int] = []
    nodes_out: list = []
    seen: dict = {}

    def candidate(d, e):
        return prefixes or (d >= dlo and e >= elo)

    # breadth-first over template nodes (dil, ero, state): shortest first, and
    # parents in lexicographic order keep each level lexicographic
    level = [(root_dil, root_ero, source)]
    while level:
        nxt = []
        for dil, ero, x in level:
            poll()
            d, e = len(dil), len(ero)
            support = frozenset(dil) if constrained else None
            if pruning:
                covered = _covers(x, must)
                if e and not covered:
                    continue  # erosions never restore a lost pixel
                key = ("E" if e else "D", e or d, support, x)
                if key in seen:
                    continue
                seen[key] = d + e
            else:
                covered = True
            if candidate(d, e) and covered:
                steps_out.append(
                    tuple(("D", ids[i]) for i in dil[base_d:]) + tuple(("E", ids[i]) for i in ero[base_e:])
                )
                states_out.append(x)
                nodes_out.append((dil, ero))
            if not e and d < dhi:
                for i in range(n):
                    nxt.append((dil + (i,), (), apply(x, dil_ops[i])))
            # a dilation phase ending short of the required pixels cannot erode its way there
            if d >= dlo and e < ehi and (e or covered):
                for i in dil if constrained else range(n):
                    nxt.append((dil, ero + (i,), apply(x, ero_ops[i])))
        level = nxt
    nominal = phased_nominal(n, dilations, erosions, constrained, (base_d, base_e), prefixes)
    return BandList(steps_out, states_out, nominal, nodes_out)


def general_band(
    space: Space,
    source: int,
    must: int,
    alphabet: Sequence[Token],
    max_len: int,
    pruning: bool,
) -> BandList:
    """Every token sequence of length 0..max_len, shortest first.

    With pruning, states reached before at the same or smaller depth are
    dropped with their subtree, and a candidate whose final band misses a
    ``must`` pixel is dropped on its own.
    """
    apply = space.board.apply
    poll = space.deadline.poll
    compiled = [[space.op(c, s) for c, s in tok] for tok in alphabet]
    a = len(compiled)
    nominal = _geometric(a, max_len)
    steps_out: list[Token] = []
    states_out: list[int] = []
    seen = {source: 0}
    frontier = [((), source)]
    if not pruning or _covers(source, must):
        steps_out.append(())
        states_out.append(source)
    for depth in range(1, max_len + 1):
        nxt = []
        for seq, x0 in frontier:
            for ti, ops in enumerate(compiled):
                poll()
                x = x0
                for c in ops:
                    x = apply(x, c)
                if pruning:
                    if x in seen:
                        continue
                    seen[x] = depth
                path = seq + alphabet[ti]
                if not pruning or _covers(x, must):
                    steps_out.append(path)
                    states_out.append(x)
                nxt.append((path, x))
        frontier = nxt
    return BandList(steps_out, states_out, nominal)


def iteration_band(
    space: Space, source: int, must: int, se_ids: Sequence[str], max_iterate: int, pruning: bool
) -> BandList:
    """``D^k s`` then ``E^k s`` for k = 1..max_iterate and every SE s."""
    apply = space.board.apply
    dil = {}
    for s in se_ids:
        x = source
        op = space.op("D", s)
        for k in range(1, max_iterate + 1):
            x = apply(x, op)
            dil[s, k] = x
    steps_out: list[Token] = []
    states_out: list[int] = []
    finals: set[int] = set()
    for k in range(1, max_iterate + 1):
        for s in se_ids:
            space.deadline.poll()
            x = dil[s, k]
            op = space.op("E", s)
            for _ in range(k):
                x = apply(x, op)
            if pruning:
                if not _covers(x, must) or x in finals:
                    continue
                finals.add(x)
            steps_out.append((("D", s),) * k + (("E", s),) * k)
            states_out.append(x)
    return BandList(steps_out, states_out, max_iterate * len(se_ids))


# -- joint two-band search ----------------------------------------------------------------


def pair_search(space: Space, band1: BandList, band2: BandList, checker: PairChecker) -> tuple[int, int] | None:
    """First (i, j) in nested stream order whose final bands admit a colour rule."""
    st = space.stats
    if not len(band1) or not len(band2):
        return None
    B1 = checker.matrix(band1.states)
    prepared = checker.prepare(checker.matrix(band2.states))
    for i in range(len(band1)):
        space.deadline.check()
        hits = np.flatnonzero(checker.consistent(B1[i], prepared))
        if hits.size:
            j = int(hits[0])
            st.candidates_tested += j + 1
            return i, j
        st.candidates_tested += len(band2)
    return None


class PairSampler:
    """Random rounds over one (band 1, band 2) unit.

    Each round draws ``n`` fresh candidates per band and tests the pairs
    they newly cover: new band-1 rows against every band-2 row drawn so
    far, then earlier band-1 rows against the new band-2 rows. Rounds
    continue until both lists are used up, so no pair is skipped.
    """

    def __init__(self, space: Space, band1: BandList, band2: BandList, checker: PairChecker, n: int, seed: int):
        self.space = space
        self.checker = checker
        self.n = n
        self.seed = seed
        self.round = 0
        self.B1 = checker.matrix(band1.states)
        self.B2 = checker.matrix(band2.states)
        self.rest1 = list(range(len(band1)))
        self.rest2 = list(range(len(band2)))
        self.seen1: list[int] = []
        self.seen2: list[int] = []

    @property
    def done(self) -> bool:
        return not (self.rest1 or self.rest2)

    def step(self) -> tuple[int, int] | None:
        st = self.space.stats
        seed = (self.seed * 1_000_003 + self.round) % 2**64
        self.round += 1
        new1 = _draw(self.rest1, self.n, seed)
        new2 = _draw(self.rest2, self.n, seed ^ 0x5DEECE66D)
        all2 = sorted(self.seen2 + new2)
        for rows, cols in ((new1, all2), (self.seen1, new2)):
            if not rows or not cols:
                continue
            prepared = self.checker.prepare(self.B2[cols])
            for i in rows:
                self.space.deadline.check()
                hits = np.flatnonzero(self.checker.consistent(self.B1[i], prepared))
                if hits.size:
                    st.candidates_tested += int(hits[0]) + 1
                    return i, cols[int(hits[0])]
                st.candidates_tested += len(cols)
        self.seen1 = sorted(self.seen1 + new1)
        self.seen2 = all2
        return None


def _draw(rest: list[int], n: int, seed: int) -> list[int]:
    """Remove and return a uniform reservoir sample of ``n`` indices, in stream order."""
    if not rest:
        return []
    picked = sample_candidates(range(len(rest)), n, seed)
    out = [rest[k] for k in picked]
    keep = set(picked)
    rest[:] = [v for k, v in enumerate(rest) if k not in keep]
    return out
