"""Exception types shared across the package.

The CLI maps these onto process exit codes, so new error conditions
should subclass one of the families below rather than raising bare
ValueError out of library code.
"""


class SurveyError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SurveyError):
    """Bad or missing configuration, scenario, or input file."""


class GeometryError(SurveyError):
    """Invalid or degenerate geometry (polygons, arcs, rays)."""


class NumericalError(SurveyError):
    """Numerical failure in the depth model."""


class FactorizationError(NumericalError):
    """Covariance factorization failed even after the jitter retry."""


class EmptyModelError(NumericalError):
    """Operation requires at least one observation in the model."""


class MissionAbort(SurveyError):
    """Mission exceeded a safety limit and stopped with a partial log."""
