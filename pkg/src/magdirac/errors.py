"""Exception hierarchy."""
from __future__ import annotations


class MagDiracError(Exception):
    """Base class for all package errors."""


class DomainError(MagDiracError, ValueError):
    """Argument outside the domain of a function."""


class PoleError(DomainError):
    """Gamma evaluated at a nonpositive integer."""


class ParameterError(MagDiracError, ValueError):
    """Invalid or inconsistent parameters."""


class GridError(ParameterError):
    """Grid not strictly increasing, not positive, or mismatched with a gauge."""


class OnSpectrumError(DomainError):
    """Spectral parameter too close to a Landau level."""


class CoincidentPointError(DomainError):
    """Green kernel requested at x == x'."""


class BandwidthError(ParameterError):
    """Potential bandwidth exceeds the channel window."""


class ToleranceOverlapError(ParameterError):
    """Cluster and gap tolerances overlap or exceed half the level spacing."""


class IllConditionedError(MagDiracError, ArithmeticError):
    """Gram matrix too ill-conditioned for a generalized eigenproblem."""


class TailUnderflowError(MagDiracError, ArithmeticError):
    """Too few tail nodes above the amplitude floor for a decay fit."""


class TooFewChannelsError(MagDiracError, ArithmeticError):
    """Not enough populated channels for a channel-decay fit."""


class SolverError(MagDiracError, RuntimeError):
    """Eigensolver failed to converge or violated its residual contract.

    ``diagnostics`` carries whatever the solver knew at failure time.
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ConfigError(MagDiracError, ValueError):
    """Scenario configuration failed to parse or validate."""

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        loc = f"line {line}: " if line is not None else ""
        where = f"{key}: " if key else ""
        super().__init__(f"{loc}{where}{message}")
        self.line = line
        self.key = key


class NotGapStateError(MagDiracError, ValueError):
    """Selected eigenvalue is not a gap state."""
