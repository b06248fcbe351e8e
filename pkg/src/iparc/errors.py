"""Exception types shared across the package."""

from __future__ import annotations


class IparcError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgument(IparcError, ValueError):
    pass


class IncompleteRuleError(IparcError, ValueError):
    """A colour rule has no row for a (band1, band2) bit pair that occurs."""

    def __init__(self, pair: tuple[int, int]):
        self.pair = pair
        super().__init__(f"colour rule has no row for band bits {list(pair)}")


class UnresolvedSEError(IparcError, KeyError):
    def __init__(self, se_id: str):
        self.se_id = se_id
        super().__init__(se_id)

    def __str__(self) -> str:
        return f"unknown structuring element {self.se_id!r}"


class ProgramSyntaxError(IparcError, ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")


class TaskSchemaError(IparcError, ValueError):
    pass


class TaskValidationError(IparcError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        detail = "; ".join(f"{v.code} at {v.path}" for v in self.violations)
        super().__init__(f"invalid task: {detail}")


class DegenerateProgramError(IparcError, RuntimeError):
    """The generator could not find non-degenerate pairs for a program."""
