"""Exception types shared across the package."""

from __future__ import annotations


class HoleReachError(Exception):
    """Base class for every error raised by this package."""


class ModelSyntaxError(HoleReachError):
    """A model file could not be parsed."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.reason = message


class ModelValidationError(HoleReachError):
    """A parsed model violates a structural invariant."""

    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = list(diagnostics)


class StepDisabled(HoleReachError):
    """A run step cannot fire from the given configuration."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class BudgetExceeded(HoleReachError):
    """A search exceeded its configured node budget."""

    def __init__(self, explored: int, cap: int):
        super().__init__(f"explored {explored} nodes, cap is {cap}")
        self.explored = explored
        self.cap = cap


class StateSpaceTooLarge(HoleReachError):
    """The clamped timed state space exceeds the configured cap."""


class NotInWr(HoleReachError):
    """A pair was expected in the well-nested relation but is absent."""


class NotInWrt(HoleReachError):
    """A timed entry was expected in the well-nested relation but is absent."""


class NotAccepting(HoleReachError):
    """A run that was required to be accepting is not."""


class InternalInconsistency(HoleReachError):
    """Witness reconstruction could not re-derive a search step."""
