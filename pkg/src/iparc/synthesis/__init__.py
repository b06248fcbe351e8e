"""Program search: candidate streams, pruning, rule inference and solvers."""

from .config import SearchStats, SynthConfig, load_config
from .macros import Macro, MacroLibrary, mine_macros
from .rules import Conflict, infer_color_rule
from .snapshots import solve_with_snapshots
from .solver import NoSolution, Solution, solve, verify
from .streams import (
    KEEP,
    CandidateSequence,
    Drop,
    Keep,
    enumerate_sequences,
    generate_band2_sequences,
    phased_count,
    prune,
    sample_candidates,
)

__all__ = [
    "KEEP",
    "CandidateSequence",
    "Conflict",
    "Drop",
    "Keep",
    "Macro",
    "MacroLibrary",
    "NoSolution",
    "SearchStats",
    "Solution",
    "SynthConfig",
    "enumerate_sequences",
    "generate_band2_sequences",
    "infer_color_rule",
    "load_config",
    "mine_macros",
    "phased_count",
    "prune",
    "sample_candidates",
    "solve",
    "solve_with_snapshots",
    "verify",
]
