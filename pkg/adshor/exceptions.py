"""
Error hierarchy for the workbench.

Argument problems also derive from ValueError so callers that only know
about the builtin still catch them.
"""


class AdshorError(Exception):
    """Base class for every workbench failure."""


class DimensionError(AdshorError, ValueError):
    """Qubit index, arity or register length does not fit."""


class NormalizationError(AdshorError, ValueError):
    """Input state or density matrix is not normalized or not physical."""


class ZeroProbabilityBranch(AdshorError):
    """Post-selection asked for an outcome that cannot occur."""


class OrthogonalityError(AdshorError):
    """Error states of a recovery are not mutually orthogonal."""


class UncorrectableSyndrome(AdshorError):
    """No recovery procedure is defined for the measured syndrome."""

    def __init__(self, syndrome, message=None):
        self.syndrome = str(syndrome)
        super().__init__(message or f"Syndrome {self.syndrome} is not correctable")


class TruncationError(AdshorError):
    """Certified truncation mass of a branch enumeration is above tolerance."""


class QubitLimitError(AdshorError, ValueError):
    """Register is larger than the configured qubit guard."""
