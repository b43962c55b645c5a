"""Exception hierarchy and CLI exit codes.

Every error carries the structured fields a caller needs to react to it,
and a formatted message for humans.
"""

from __future__ import annotations

from enum import IntEnum


class ExitCode(IntEnum):
    """Process exit codes of the command-line front end."""

    OK = 0
    INPUT = 2
    ORACLE_MISMATCH = 3
    STATISTICAL_FAILURE = 4


class ToolkitError(Exception):
    """Base class for all toolkit errors."""

    exit_code: ExitCode = ExitCode.INPUT


class DistributionError(ToolkitError):
    """A joint distribution (or its file) violates a structural invariant."""

    def __init__(self, invariant: str, detail: str = "") -> None:
        self.invariant = invariant
        self.detail = detail
        message = invariant if not detail else f"{invariant}: {detail}"
        super().__init__(message)


class VariableError(ToolkitError):
    """Unknown or overlapping variable names."""


class PreconditionError(ToolkitError):
    """A structural precondition of an evaluator does not hold."""

    def __init__(self, operation: str, reason: str) -> None:
        self.operation = operation
        self.reason = reason
        super().__init__(f"{operation}: {reason}")


class GaussianNumericalError(ToolkitError):
    """A covariance (sub)matrix is singular or not positive semidefinite."""

    def __init__(self, matrix: str, condition: float, detail: str = "") -> None:
        self.matrix = matrix
        self.condition = condition
        self.detail = detail
        msg = f"ill-conditioned matrix {matrix} (condition number {condition:.3e})"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)


class InfeasibleSystemError(ToolkitError):
    """A linear system has an empty feasible set."""


class UnboundedRegionError(ToolkitError):
    """A polyhedron is unbounded; ``direction`` is a recession direction."""

    def __init__(self, direction: tuple[float, ...], variables: tuple[str, ...] = ()) -> None:
        self.direction = direction
        self.variables = variables
        if variables:
            named = ", ".join(f"{v}={d:g}" for v, d in zip(variables, direction, strict=True))
        else:
            named = ", ".join(f"{d:g}" for d in direction)
        super().__init__(f"unbounded along direction ({named})")


class ChannelError(ToolkitError):
    """Invalid Gaussian channel or coding parameters."""


class LatticeConfigError(ToolkitError):
    """Invalid lattice simulation configuration."""
