"""Search configuration and instrumentation."""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from ..errors import InvalidArgument

ENV_PREFIX = "IPARC_"


def _range(value) -> tuple[int, int]:
    if isinstance(value, int):
        return (value, value)
    if isinstance(value, str):
        # "3..4", "3,4", "[3, 4]" or a single count
        text = value.strip().strip("[]()").replace("..", ",")
        parts = [p for p in text.split(",") if p.strip()]
        if not 1 <= len(parts) <= 2:
            raise InvalidArgument(f"not a count range: {value!r}")
        return (int(parts[0]), int(parts[-1]))
    lo, hi = value
    return (int(lo), int(hi))


def _bool(value) -> bool:
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("1", "true", "yes", "on"):
            return True
        if v in ("0", "false", "no", "off"):
            return False
        raise InvalidArgument(f"not a boolean: {value!r}")
    return bool(value)


@dataclass(frozen=True)
class SynthConfig:
    """Search knobs. Ranges are inclusive (lo, hi) pairs.

    ``dilation_counts``/``erosion_counts`` shape the dilate-then-erode band
    pipelines of A-hard (both colour bands) and B-hard (band 2) programs;
    ``selection_max_len`` bounds each band of a B-selection program.
    ``time_budget`` is in seconds per task.
    """

    max_seq_len: int = 6
    dilation_counts: tuple[int, int] = (3, 4)
    erosion_counts: tuple[int, int] = (1, 3)
    erosion_ses_from_dilations: bool = True
    sample_count: int = 100
    seed: int = 0
    time_budget: float = 120.0
    pruning_enabled: bool = True
    randomization_enabled: bool = False
    max_iterate: int = 4
    selection_max_len: int = 2
    use_snapshots: bool = True

    def __post_init__(self):
        for name in ("dilation_counts", "erosion_counts"):
            lo, hi = _range(getattr(self, name))
            if lo < 0 or hi < lo:
                raise InvalidArgument(f"{name} must be a non-empty range of non-negative counts, got {(lo, hi)}")
            object.__setattr__(self, name, (lo, hi))
        if self.sample_count < 1:
            raise InvalidArgument("sample_count must be >= 1")
        if self.max_seq_len < 1:
            raise InvalidArgument("max_seq_len must be >= 1")
        if self.max_iterate < 1:
            raise InvalidArgument("max_iterate must be >= 1")
        if self.selection_max_len < 0:
            raise InvalidArgument("selection_max_len must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise InvalidArgument("seed must be an unsigned 64-bit integer")
        if not self.time_budget > 0:
            raise InvalidArgument("time_budget must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> SynthConfig:
        known = {f.name: f for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise InvalidArgument(f"unknown config fields: {sorted(unknown)}")
        return cls(**{k: _coerce(known[k], v) for k, v in data.items()})

    def replace(self, **changes) -> SynthConfig:
        return replace(self, **changes)

    def with_env(self, environ=None) -> SynthConfig:
        """Apply ``IPARC_<FIELD>`` environment overrides."""
        environ = os.environ if environ is None else environ
        changes = {}
        for f in fields(self):
            key = ENV_PREFIX + f.name.upper()
            if key in environ:
                changes[f.name] = _coerce(f, environ[key])
        return replace(self, **changes) if changes else self


def _coerce(f, value):
    kind = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", str(f.type))
    if kind.startswith("tuple"):
        return _range(value)
    if kind == "bool":
        return _bool(value)
    if kind == "int":
        return int(value)
    if kind == "float":
        return float(value)
    return value


def load_config(path) -> SynthConfig:
    return SynthConfig.from_dict(json.loads(Path(path).read_text()))


@dataclass
class SearchStats:
    candidates_enumerated: int = 0
    candidates_pruned: int = 0
    candidates_tested: int = 0
    elapsed: float = 0.0
    solved: bool = False
    seed: int = 0
    segments: list[SearchStats] = field(default_factory=list)

    @property
    def reduction_factor(self) -> float:
        kept = self.candidates_enumerated - self.candidates_pruned
        if self.candidates_enumerated == 0:
            return 1.0
        if kept <= 0:
            return math.inf
        return self.candidates_enumerated / kept

    def add(self, other: SearchStats) -> None:
        self.candidates_enumerated += other.candidates_enumerated
        self.candidates_pruned += other.candidates_pruned
        self.candidates_tested += other.candidates_tested

    def to_dict(self) -> dict:
        d = {
            "candidates_enumerated": self.candidates_enumerated,
            "candidates_pruned": self.candidates_pruned,
            "candidates_tested": self.candidates_tested,
            "reduction_factor": self.reduction_factor,
            "elapsed": round(self.elapsed, 6),
            "solved": self.solved,
            "seed": self.seed,
        }
        if self.segments:
            d["segments"] = [s.to_dict() for s in self.segments]
        return d

    def summary(self) -> str:
        return (
            f"solved={self.solved} enumerated={self.candidates_enumerated} pruned={self.candidates_pruned} "
            f"tested={self.candidates_tested} reduction={self.reduction_factor:.3g} "
            f"elapsed={self.elapsed:.3f}s seed={self.seed}"
        )


class BudgetExhausted(Exception):
    pass


class Deadline:
    """Monotonic-clock budget checked between candidate evaluations."""

    def __init__(self, seconds: float):
        self.seconds = seconds
        self.start = time.monotonic()
        self.end = self.start + seconds
        self._tick = 0

    def check(self) -> None:
        if time.monotonic() > self.end:
            raise BudgetExhausted

    def poll(self) -> None:
        # cheap variant for tight loops
        self._tick += 1
        if self._tick & 255 == 0 and time.monotonic() > self.end:
            raise BudgetExhausted

    @property
    def remaining(self) -> float:
        return max(0.0, self.end - time.monotonic())
