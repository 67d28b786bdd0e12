"""Exception types shared across the package.

Plain ``ValueError`` is used for argument errors; the classes here mark
failures that callers may want to handle separately (and that the CLI maps
to exit code 2).
"""


class OdpcaError(Exception):
    """Base class for library-specific runtime failures."""


class ConvergenceError(OdpcaError):
    """Eigensolver failed to converge.

    Carries the off-diagonal Frobenius residual of the input for diagnosis.
    """

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class RankDeficiencyError(OdpcaError):
    """Columns are numerically dependent where independence is required."""


class IdentifiabilityError(OdpcaError):
    """The spectrum has no positive eigengap at the requested rank."""


class StateError(OdpcaError):
    """Streaming state used out of order (step past horizon, early finalize)."""


class IngestionError(OdpcaError):
    """Dataset loading failed: parse error, inconsistent rows, insufficient
    rows for the requested stream, or memory-cap refusal."""
