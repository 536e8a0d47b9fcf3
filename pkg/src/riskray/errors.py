"""Exception types shared across the package."""


class RiskrayError(ValueError):
    """Base class for all domain errors raised by riskray."""


class DataError(RiskrayError):
    """Malformed input data (CSV parsing, ragged rows, bad cells)."""


class DegeneracyError(RiskrayError):
    """An operation needs a full-dimensional object but got a flat one.

    Carries ``affine_dim`` and ``dim`` so callers can report which
    dimensions are missing.
    """

    def __init__(self, message, affine_dim=None, dim=None):
        super().__init__(message)
        self.affine_dim = affine_dim
        self.dim = dim


class BudgetError(RiskrayError):
    """A hard enumeration budget would be exceeded (e.g. n! blow-up)."""
