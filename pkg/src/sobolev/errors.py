"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class SobolevError(ValueError):
    """Base class for domain errors. ``exit_code`` is what the CLI exits with."""

    exit_code: int = 2


class InvalidSpecError(SobolevError):
    exit_code = 3


class InvalidParameterError(SobolevError):
    exit_code = 3


class InputDataError(SobolevError):
    """Samples that cannot be used: unreadable, malformed, non-finite."""

    def __init__(self, message: str, *, row: int | None = None) -> None:
        if row is not None:
            message = f"{message} (row {row})"
        super().__init__(message)
        self.row = row


class OutOfBoxError(InputDataError):
    pass


class EmptyAccumulatorError(SobolevError):
    pass


class SpecMismatchError(SobolevError):
    pass


class SingularCovarianceError(SobolevError):
    def __init__(self, message: str, *, condition: float) -> None:
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class QuadratureError(SobolevError):
    """A numerical oracle (quadrature or series) did not reach its tolerance."""


class UnsupportedOracleError(SobolevError, NotImplementedError):
    pass
