"""Exception hierarchy for the procurement lab."""


class ProcurementError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(ProcurementError, ValueError):
    """An input violated a precondition (non-finite value, sigma <= 0, n < 2, ...)."""


class UnsupportedPathError(ProcurementError, NotImplementedError):
    """The requested computation is not available for these inputs."""


class DatasetError(ProcurementError, ValueError):
    """A market dataset failed to load or validate."""


class GridEvaluationError(ProcurementError, RuntimeError):
    """The objective failed on one grid cell."""

    def __init__(self, A, B, cause):
        self.A = A
        self.B = B
        self.cause = cause
        super().__init__(f"objective failed at (A, B) = ({A:.6g}, {B:.6g}): {cause}")
