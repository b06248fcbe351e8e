from itertools import product

import numpy as np
import pytest

from iparc.bitboard import Board
from iparc.morphology import ColorRule, apply_color_rule
from iparc.synthesis import infer_color_rule
from iparc.synthesis.config import Deadline, SearchStats
from iparc.synthesis.rules import COMBOS, PairChecker
from iparc.synthesis.search import (
    BandList,
    Space,
    exact_search,
    general_band,
    iteration_band,
    pair_search,
    phased_band,
    phased_nominal,
    primitive_alphabet,
)
from iparc.synthesis.streams import phased_sequences

from oracles import run_steps_ref

IDS = ["SE1", "SE2", "SE3", "SE4"]


def make_space(lib, shape=(6, 6), count=2):
    return Space(Board(*shape, count), lib, Deadline(60), SearchStats())


def random_source(space, rng, p=0.3):
    b = space.board
    grids = [rng.random((b.height, b.width)) < p for _ in range(b.count)]
    return grids, b.pack(grids)


def reference_state(space, grids, steps, lib):
    return space.board.pack([run_steps_ref(g, steps, lib) for g in grids])


# -- phased band ---------------------------------------------------------------------


@pytest.mark.parametrize("constrained", [True, False])
def test_phased_unpruned_is_the_stream(lib, constrained):
    rng = np.random.default_rng(1)
    space = make_space(lib)
    grids, src = random_source(space, rng)
    dil, ero = (1, 2), (0, 2)
    got = phased_band(space, src, 0, IDS, dil, ero, constrained, pruning=False)
    want = [s.steps for s in phased_sequences(IDS, dil, ero, constrained)]
    assert got.steps == want
    assert got.nominal == len(want) == phased_nominal(4, dil, ero, constrained)
    for steps, state in list(zip(got.steps, got.states))[::7]:
        assert state == reference_state(space, grids, steps, lib)


def kept_is_sound(full: BandList, kept: BandList, must: int):
    """Every covering final state of the full stream is kept, no later than its first occurrence."""
    first = {}
    for steps, x in zip(full.steps, full.states):
        if x & must == must:
            first.setdefault(x, len(steps))
    best = {}
    for steps, x in zip(kept.steps, kept.states):
        assert x & must == must
        best.setdefault(x, len(steps))
    for x, length in first.items():
        assert x in best and best[x] <= length


@pytest.mark.parametrize("constrained", [True, False])
@pytest.mark.parametrize("seed", range(4))
def test_phased_pruning_is_sound(lib, constrained, seed):
    rng = np.random.default_rng(seed)
    space = make_space(lib)
    _, src = random_source(space, rng)
    dil, ero = (1, 3), (1, 2)
    full = phased_band(space, src, 0, IDS, dil, ero, constrained, pruning=False)
    # require a random part of some reachable final band
    target = full.states[int(rng.integers(len(full)))]
    must = target & space.board.pack([rng.random((6, 6)) < 0.5 for _ in range(2)])
    kept = phased_band(space, src, must, IDS, dil, ero, constrained, pruning=True)
    assert len(kept) < len(full)
    kept_is_sound(full, kept, must)


def test_phased_root_resumes(lib):
    rng = np.random.default_rng(5)
    space = make_space(lib)
    grids, src = random_source(space, rng)
    mid = reference_state(space, grids, [("D", "SE2")], lib)
    tail = phased_band(space, mid, 0, IDS, (1, 2), (0, 1), True, False, root=((1,), ()))
    full = phased_band(space, src, 0, IDS, (1, 2), (0, 1), True, False)
    below = {(("D", "SE2"),) + s: x for s, x in zip(tail.steps, tail.states)}
    assert below == {s: x for s, x in zip(full.steps, full.states) if s[:1] == (("D", "SE2"),)}
    assert tail.nominal == phased_nominal(4, (1, 2), (0, 1), True, (1, 0))


def test_phased_prefixes_lists_every_node(lib):
    space = make_space(lib)
    src = space.board.pack([np.eye(6, dtype=bool)] * 2)
    got = phased_band(space, src, 0, ["SE1", "SE2"], (1, 1), (1, 1), False, False, prefixes=True)
    assert got.steps[0] == ()
    assert len(got) == got.nominal == 1 + 2 + 2 * 2


# -- general and iteration bands ------------------------------------------------------------


@pytest.mark.parametrize("seed", range(3))
def test_general_band(lib, seed):
    rng = np.random.default_rng(seed)
    space = make_space(lib)
    grids, src = random_source(space, rng)
    alphabet = primitive_alphabet(IDS[:3])
    full = general_band(space, src, 0, alphabet, 3, False)
    assert full.nominal == len(full) == 1 + 6 + 36 + 216
    ref = [()] + [sum(t, ()) for n in (1, 2, 3) for t in product(alphabet, repeat=n)]
    assert full.steps == ref
    for steps, x in list(zip(full.steps, full.states))[::13]:
        assert x == reference_state(space, grids, steps, lib)
    must = full.states[-1] & full.states[40]
    kept_is_sound(full, general_band(space, src, must, alphabet, 3, True), must)


def test_iteration_band(lib):
    rng = np.random.default_rng(7)
    space = make_space(lib)
    grids, src = random_source(space, rng)
    full = iteration_band(space, src, 0, IDS, 3, False)
    assert full.nominal == len(full) == 12
    for steps, x in zip(full.steps, full.states):
        k = len(steps) // 2
        assert steps[:k] == (steps[0],) * k and steps[k:] == (steps[-1],) * k
        assert x == reference_state(space, grids, steps, lib)
    must = full.states[5]
    kept_is_sound(full, iteration_band(space, src, must, IDS, 3, True), must)


# -- joint pair search ----------------------------------------------------------------------


def test_pair_search_matches_brute_force(lib):
    rng = np.random.default_rng(8)
    space = make_space(lib, (5, 5), 2)
    board = space.board
    for trial in range(10):
        _, s1 = random_source(space, rng, 0.4)
        _, s2 = random_source(space, rng, 0.2)
        band1 = general_band(space, s1, 0, primitive_alphabet(IDS[:2]), 2, False)
        band2 = general_band(space, s2, 0, primitive_alphabet(IDS[:2]), 2, False)
        i0, j0 = int(rng.integers(len(band1))), int(rng.integers(len(band2)))
        rule = ColorRule(tuple((x, y, int(rng.integers(0, 3))) for x, y in COMBOS))
        b1s, b2s = board.unpack_bands(band1.states[i0]), board.unpack_bands(band2.states[j0])
        outs = [apply_color_rule(x, y, rule) for x, y in zip(b1s, b2s)]
        present = sorted({int(v) for o in outs for v in np.unique(o.cells)})
        checker = PairChecker(board, {c: board.pack([o.cells == c for o in outs]) for c in present})
        want = next(
            (i, j)
            for i in range(len(band1))
            for j in range(len(band2))
            if isinstance(
                infer_color_rule(board.unpack_bands(band1.states[i]), board.unpack_bands(band2.states[j]), outs),
                ColorRule,
            )
        )
        before = space.stats.candidates_tested
        assert pair_search(space, band1, band2, checker) == want
        assert space.stats.candidates_tested - before == want[0] * len(band2) + want[1] + 1


# -- exact search ---------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(6))
def test_exact_search_bfs_and_dfs_agree(lib, seed):
    rng = np.random.default_rng(seed)
    alphabet = primitive_alphabet(IDS)
    space = make_space(lib)
    grids, src = random_source(space, rng)
    steps = [alphabet[int(i)][0] for i in rng.integers(0, len(alphabet), int(rng.integers(0, 4)))]
    tgt = reference_state(space, grids, steps, lib)
    a = make_space(lib)
    b = make_space(lib)
    pruned = exact_search(a, [src], [tgt], alphabet, 3, True)
    plain = exact_search(b, [src], [tgt], alphabet, 3, False)
    assert pruned is not None and len(pruned) == len(plain) <= len(steps)
    for found in (pruned, plain):
        assert space.run(src, [alphabet[i][0] for i in found]) == tgt
    assert a.stats.candidates_tested <= b.stats.candidates_tested
    assert a.stats.candidates_pruned + a.stats.candidates_tested <= a.stats.candidates_enumerated


def test_exact_search_exhausts(lib):
    space = make_space(lib)
    src = space.board.pack([np.zeros((6, 6), dtype=bool)] * 2)
    tgt = space.board.pack([np.ones((6, 6), dtype=bool)] * 2)
    assert exact_search(space, [src], [tgt], primitive_alphabet(IDS), 2, True) is None
    assert space.stats.candidates_enumerated == 1 + 8 + 64
