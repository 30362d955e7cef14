"""Exception types shared across the package.

Everything raised on purpose derives from :class:`NNSError` so callers can
catch one base class at the CLI / service boundary and map it to an exit code
or HTTP status without enumerating modules.
"""

from __future__ import annotations


class NNSError(Exception):
    """Base class for all errors raised deliberately by this package."""


class ModelFormatError(NNSError):
    """A shape-model document is malformed; message names the offending field."""


class TrajectoryFormatError(NNSError):
    """A trajectory file violates the CSV contract (message carries the line number)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TrajectoryOrderingError(TrajectoryFormatError):
    """Frame timestamps are not strictly increasing in frame-index order."""


class DimensionError(NNSError):
    """Array arguments have inconsistent shapes for the requested operation."""


class InsufficientDataError(NNSError):
    """Fewer valid observations than the estimator needs."""


class DegenerateGeometryError(NNSError):
    """Point configuration does not constrain the estimate (collinear, collapsed)."""


class RankDeficiencyError(NNSError):
    """Unregularized normal equations are singular; caller should use ridge > 0."""


class EmptySessionError(NNSError):
    """No frame in the session could be fitted; there is no signal to analyze."""


class FilterDesignError(NNSError):
    """Bandpass parameters are unrealizable (cutoffs vs. Nyquist, bad order)."""


class SignalLengthError(NNSError):
    """Signal too short for stable zero-phase filtering."""


class SignalStageError(NNSError):
    """Operation applied at the wrong processing stage (e.g. detecting on raw data)."""


class ReportFormatError(NNSError):
    """A report document is malformed or truncated."""


class ReportVersionError(ReportFormatError):
    """A report document declares a schema version this code does not understand."""


class StageError(NNSError):
    """Pipeline failure wrapper that remembers which stage failed.

    The original exception is preserved as ``__cause__`` so tracebacks stay
    useful; ``stage`` is a short machine-readable label (``"fit"``,
    ``"filter"``, ...) used by the CLI and service for error reporting.
    """

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}': {cause}")
        self.__cause__ = cause
