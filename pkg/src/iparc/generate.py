"""Random task generation with known ground-truth programs.

Each category has a small program grammar. A task samples one program,
then samples input images and runs the program to obtain outputs,
rejecting pairs whose output is trivial.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateProgramError, InvalidArgument
from .morphology import BG, FG, ColorRule, Image, SELibrary, default_se_library, foreground
from .program import Apply, BandPipeline, Dilation, Erosion, Iterate, MorphProgram, input_bands, run_program, run_steps
from .taskio import Category, Task, TaskPair, check_task, save_task

# grammar constants, mirrored by the solver defaults in SynthConfig
SIMPLE_LENGTHS = (2, 6)
BAND_DILATIONS = (3, 4)
BAND_EROSIONS = (1, 3)
SELECTION_BAND_LENGTHS = (1, 2)
ITERATION_COUNTS = (2, 4)
HARD_EROSIONS = 3
PROGRAM_RESAMPLES = 50


@dataclass(frozen=True)
class GenParams:
    width: int = 15
    height: int = 15
    density: float = 0.3
    pairs_per_task: int = 4
    num_colors: int = 3
    seed: int = 0
    emit_snapshots: bool = False
    max_rejects: int = 1000

    def __post_init__(self):
        if not 0.0 < self.density < 1.0:
            raise InvalidArgument(f"density must lie strictly between 0 and 1, got {self.density}")
        if self.pairs_per_task < 2:
            raise InvalidArgument("pairs_per_task must be >= 2")
        if self.width < 1 or self.height < 1:
            raise InvalidArgument("grid dimensions must be positive")
        if self.num_colors < 3:
            raise InvalidArgument("num_colors must be >= 3 (band splits recolour matches to 2)")
        if not 0 <= self.seed < 2**64:
            raise InvalidArgument("seed must be an unsigned 64-bit integer")


def _rng(*keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in keys]))


def sequence_macro(lib: SELibrary) -> tuple[Apply, ...]:
    """The shared sub-pipeline every B-sequence task contains."""
    ids = lib.ids()
    pick = lambda i: ids[i % len(ids)]  # noqa: E731
    return (Dilation(pick(2)), Dilation(pick(5)), Erosion(pick(1)))


def _random_rule(rng: np.random.Generator, k: int) -> ColorRule:
    a, b = (int(c) for c in rng.choice(np.arange(1, k), size=2, replace=False))
    both = a if rng.random() < 0.5 else b
    return ColorRule(((0, 0, 0), (0, 1, b), (1, 0, a), (1, 1, both)))


def _de_steps(rng, ids, n: int) -> list[Apply]:
    return [Apply("D" if rng.random() < 0.5 else "E", ids[rng.integers(len(ids))]) for _ in range(n)]


def _phased(rng, ids, dilations: int, erosions: int) -> list[Apply]:
    dil = [ids[rng.integers(len(ids))] for _ in range(dilations)]
    ero = [dil[rng.integers(len(dil))] for _ in range(erosions)]
    return [Dilation(s) for s in dil] + [Erosion(s) for s in ero]


def _iteration_template(rng, ids) -> list:
    se = ids[rng.integers(len(ids))]
    k = int(rng.integers(ITERATION_COUNTS[0], ITERATION_COUNTS[1] + 1))
    return [Iterate(k, Dilation(se)), Iterate(k, Erosion(se))]


def _split_ids(lib: SELibrary) -> list[str]:
    # a split is only selective when the template constrains some background
    return [i for i in lib.ids() if lib[i].bg_offsets] or lib.ids()


def generate_program(category: Category, lib: SELibrary, seed: int, num_colors: int = 3) -> MorphProgram:
    rng = _rng(seed, 0x9E37)
    ids = lib.ids()
    k = num_colors
    if category is Category.A_SIMPLE:
        n = int(rng.integers(SIMPLE_LENGTHS[0], SIMPLE_LENGTHS[1] + 1))
        return MorphProgram.from_steps({1: _de_steps(rng, ids, n)})
    if category is Category.A_HARD:
        bands = {}
        for b in (1, 2):
            d = int(rng.integers(BAND_DILATIONS[0], BAND_DILATIONS[1] + 1))
            e = int(rng.integers(BAND_EROSIONS[0], BAND_EROSIONS[1] + 1))
            bands[b] = _phased(rng, ids, d, e)
        return MorphProgram.from_steps(bands, color_rule=_random_rule(rng, k))
    if category is Category.B_SEQUENCE:
        pre = _de_steps(rng, ids, int(rng.integers(0, 2)))
        post = _de_steps(rng, ids, int(rng.integers(0, 2)))
        return MorphProgram.from_steps({1: pre + list(sequence_macro(lib)) + post})
    if category is Category.B_ITERATION:
        return MorphProgram.from_steps({1: _iteration_template(rng, ids)})
    split = _split_ids(lib)
    split_id = split[rng.integers(len(split))]
    if category is Category.B_SELECTION:
        bands = {
            b: _de_steps(rng, ids, int(rng.integers(SELECTION_BAND_LENGTHS[0], SELECTION_BAND_LENGTHS[1] + 1)))
            for b in (1, 2)
        }
        return MorphProgram.from_steps(bands, split=split_id, color_rule=_random_rule(rng, k))
    if category is Category.B_HARD:
        d = int(rng.integers(BAND_DILATIONS[0], BAND_DILATIONS[1] + 1))
        bands = {1: _iteration_template(rng, ids), 2: _phased(rng, ids, d, HARD_EROSIONS)}
        return MorphProgram.from_steps(bands, split=split_id, color_rule=_random_rule(rng, k))
    raise InvalidArgument(f"unknown category {category!r}")


# -- images ----------------------------------------------------------------------


def _plant(cells: np.ndarray, pattern: np.ndarray, rng, copies: int) -> None:
    h, w = cells.shape
    ph, pw = pattern.shape
    if ph > h or pw > w:
        return
    for _ in range(copies):
        r = int(rng.integers(0, h - ph + 1))
        c = int(rng.integers(0, w - pw + 1))
        window = cells[r : r + ph, c : c + pw]
        window[pattern == FG] = 1
        window[pattern == BG] = 0


def _sample_input(category: Category, program: MorphProgram, params: GenParams, lib: SELibrary, rng) -> np.ndarray:
    shape = (params.height, params.width)
    fg = rng.random(shape) < params.density
    if category is Category.A_HARD:
        colours = rng.integers(1, 3, size=shape)
        return np.where(fg, colours, 0).astype(np.int16)
    cells = fg.astype(np.int16)
    if program.split is not None:
        _plant(cells, lib[program.split].pattern, rng, int(rng.integers(1, 4)))
    return cells


def _degenerate(inp: Image, out: Image) -> bool:
    ind = foreground(inp).bits
    cells = out.cells
    return bool(np.array_equal(cells, ind.astype(cells.dtype)) or not cells.any() or (cells > 0).all())


def snapshot_image(program: MorphProgram, img: Image, lib: SELibrary, step: int, num_colors: int) -> Image:
    """Band states after ``step`` unfolded steps, packed as b1 + 2*b2."""
    bands = input_bands(program, img, lib)
    cells = np.zeros(img.shape, dtype=np.int16)
    for i, band in enumerate(bands):
        steps = BandPipeline(i + 1, program.steps(i + 1)).unfolded()
        cells += (run_steps(band, steps[:step], lib).bits.astype(np.int16)) << i
    return Image(cells, num_colors)


def _snapshot_step(program: MorphProgram, rng) -> int | None:
    longest = max((len(bp.unfolded()) for bp in program.pipelines), default=0)
    if longest < 2:
        return None
    return int(rng.integers(1, longest))


def task_colors(category: Category, params: GenParams) -> int:
    # packed two-band snapshots use colours up to 3
    if params.emit_snapshots and category.two_band:
        return max(params.num_colors, 4)
    return params.num_colors


def generate_task(
    category: Category,
    params: GenParams,
    lib: SELibrary | None = None,
    program: MorphProgram | None = None,
    task_id: str | None = None,
    stats: dict | None = None,
) -> Task:
    """One task from ``program`` (sampled when absent). ``stats`` receives the pair rejection count."""
    lib = lib or default_se_library()
    k = task_colors(category, params)
    if program is None:
        program = generate_program(category, lib, params.seed, k)
    rng = _rng(params.seed, 0x51ED)
    step = None
    if params.emit_snapshots:
        step = _snapshot_step(program, rng)
        if step is None:
            raise DegenerateProgramError("program has no interior step to snapshot")
    pairs = []
    rejects = 0
    while len(pairs) < params.pairs_per_task:
        inp = Image(_sample_input(category, program, params, lib, rng), k)
        out = run_program(program, inp, lib)
        if _degenerate(inp, out):
            rejects += 1
            if rejects > params.max_rejects:
                raise DegenerateProgramError(f"more than {params.max_rejects} degenerate pairs for {category.value}")
            continue
        snaps = (snapshot_image(program, inp, lib, step, k),) if step is not None else ()
        pairs.append(TaskPair(inp, out, snaps))
    tid = task_id or f"{category.value}-{params.seed}"
    if stats is not None:
        stats["pair_rejects"] = rejects
    return check_task(Task(tid, category, k, tuple(pairs), program))


def generate_suite(
    category: Category, count: int, params: GenParams, lib: SELibrary | None = None, stats: list | None = None
) -> list[Task]:
    """``count`` reproducible tasks; ``stats`` (if given) gets one rejection record per task."""
    if count < 1:
        raise InvalidArgument("count must be >= 1")
    lib = lib or default_se_library()
    tasks = []
    for index in range(count):
        seed = (params.seed + index) % 2**64
        tid = f"{category.value}-{params.seed}-{index}"
        task = None
        record: dict = {}
        for attempt in range(PROGRAM_RESAMPLES):
            program_seed = seed if attempt == 0 else int(_rng(seed, attempt).integers(2**63))
            p = GenParams(**{**asdict(params), "seed": program_seed})
            try:
                task = generate_task(category, p, lib, task_id=tid, stats=record)
                record["program_resamples"] = attempt
                break
            except DegenerateProgramError:
                continue
        if task is None:
            raise DegenerateProgramError(f"{tid}: no usable program after {PROGRAM_RESAMPLES} resamples")
        tasks.append(task)
        if stats is not None:
            stats.append(record)
    return tasks


def write_suite(tasks: list[Task], out_dir, category: Category, params: GenParams, stats: list | None = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for index, task in enumerate(tasks):
        name = f"{task.id}.json"
        save_task(task, out / name)
        entry = {"id": task.id, "file": name, "seed": (params.seed + index) % 2**64}
        if stats is not None:
            entry.update(stats[index])
        entries.append(entry)
    manifest = {"category": category.value, "count": len(tasks), "params": asdict(params), "tasks": entries}
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path
