"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ResolutionError(ValueError):
    """Sampled data is too coarse for the requested operation."""


class GridError(ValueError):
    """A radial grid is incompatible with the requested computation."""


class DataError(ValueError):
    """Input data fails a structural precondition (lengths, signs, spans)."""


class ConvergenceError(RuntimeError):
    """An adaptive series or iteration could not certify the tolerance."""


class AccuracyError(RuntimeError):
    """A quadrature or evaluation cannot reach the requested accuracy."""


class BudgetError(RuntimeError):
    """An oscillation or node budget was exceeded."""


class ZeroResonanceError(RuntimeError):
    """The zero-resonance assumption failed for the supplied potential."""
