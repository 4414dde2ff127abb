"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ConfigurationError -> 2,
NumericalBlowupError -> 3, assertion failures in experiment reports -> 1.
"""


class SlipnsError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SlipnsError):
    """Invalid grid, physics, or run configuration."""


class DomainError(SlipnsError):
    """Input outside an operation's mathematical domain (e.g. negative density)."""


class ContractViolation(SlipnsError):
    """An operation was called with unfilled ghosts or inconsistent fields."""


class NumericalBlowupError(SlipnsError):
    """NaN/Inf detected in field data."""

    def __init__(self, message, step=None, time=None):
        super().__init__(message)
        self.step = step
        self.time = time


class PositivityError(SlipnsError):
    """Density went negative beyond the clip tolerance."""


class StiffnessError(SlipnsError):
    """The stable time step fell below dt_min."""


class CompatibilityError(SlipnsError):
    """Right-hand side violates a solvability condition (nonzero mean)."""


class CheckpointError(SlipnsError):
    """Malformed, truncated, or mismatched checkpoint file."""
