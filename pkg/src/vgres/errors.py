"""Exception and warning types shared across the package."""


class VgresError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(VgresError, ValueError):
    """An argument is outside the mathematical or physical domain."""


class DegenerateGeometryError(VgresError):
    """Circle fit input is collinear or has fewer than three points."""


class NoResonanceError(VgresError):
    """No resonance dip could be detected in the sweep."""


class NoSignalError(VgresError):
    """A temperature series carries no frequency variation to fit."""


class FitConvergenceError(VgresError):
    """An iterative fit failed to converge.

    Attributes
    ----------
    trace : list of (iteration, cost) pairs accumulated before failure.
    best_params : best parameter vector seen, or None.
    """

    def __init__(self, message, trace=None, best_params=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []
        self.best_params = best_params


class UnphysicalMeasurementError(VgresError):
    """Measured data violates the assumptions of the analysis model."""


class InconsistentEnsembleError(VgresError):
    """Ensemble members were fitted with different fixed parameters."""


class ParseError(VgresError):
    """A data file could not be parsed.

    Attributes
    ----------
    path : offending file.
    line : 1-based line number, or None when not line specific.
    """

    def __init__(self, message, path=None, line=None):
        loc = str(path) if path is not None else "<input>"
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {message}")
        self.path = path
        self.line = line


class ConfigError(VgresError):
    """Run configuration is missing, malformed, or inconsistent."""


class PipelineRunError(VgresError):
    """Too many per-file failures for the run result to be meaningful."""

    def __init__(self, message, failures=None):
        super().__init__(message)
        self.failures = list(failures) if failures is not None else []


class BackgroundMarginWarning(UserWarning):
    """Resonance occupies the full span; background estimate is degraded."""


class MultiResonanceWarning(UserWarning):
    """More than one dip found in the sweep; the deepest one was fitted."""


class ClampedParameterWarning(UserWarning):
    """A fitted parameter escaped its physical range and was clamped."""


class ModelAssumptionWarning(UserWarning):
    """Input is valid but outside the regime a model approximation assumes."""


class FlaggedResultWarning(UserWarning):
    """A result is returned but inconsistent with the measurement model."""
