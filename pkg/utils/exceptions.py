"""
Exception types raised by the library

The CLI maps ConfigError to exit code 1 and every other SoftManifoldError
to exit code 2.
"""


class SoftManifoldError(Exception):
    """Base class for all library errors"""


class ConfigError(SoftManifoldError):
    """Run configuration is missing, malformed or out of range"""


class DataValidationError(SoftManifoldError, ValueError):
    """Input data violates a precondition (malformed CSV, unsatisfiable mask, ...)"""


class EmbeddingDivergedError(SoftManifoldError):
    """The optimization produced a non-finite loss; `state` holds the last finite positions"""

    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state
