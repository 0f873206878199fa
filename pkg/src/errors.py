"""Exception hierarchy shared by the library and the command line front end."""

from __future__ import annotations

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


class RiskEngineError(Exception):
    """Root of every error raised on purpose by this package."""

    exit_code = EXIT_NUMERICAL


class DataError(RiskEngineError, ValueError):
    """Input data is malformed, too short or violates a precondition."""

    exit_code = EXIT_DATA


class DomainError(RiskEngineError, ValueError):
    """An argument lies outside the mathematical domain of a function."""

    exit_code = EXIT_DATA


class StructureParseError(DomainError):
    """Malformed hierarchical copula structure text."""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at position {position})")
        self.position = position


class NestingError(DomainError):
    """A hierarchical copula violates the sufficient nesting condition."""

    exit_code = EXIT_NUMERICAL


class NumericalError(RiskEngineError, ArithmeticError):
    """Non-finite values, solver failures or infeasible optimization problems."""

    exit_code = EXIT_NUMERICAL


class StageError(RiskEngineError):
    """Failure inside a labelled pipeline stage; the original error is ``__cause__``."""

    def __init__(self, stage: str, cause: BaseException) -> None:
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.exit_code = getattr(cause, "exit_code", EXIT_NUMERICAL)
