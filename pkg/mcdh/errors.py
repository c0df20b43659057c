from __future__ import annotations

from mcdh.enums import Enums


class McdhError(Exception):
    """Base class of every error raised deliberately by this library. The category is what the command line reports."""
    category = Enums.ErrorCategory.INTERNAL
    exit_code = 1


class InvalidArgumentError(McdhError, ValueError):
    category = Enums.ErrorCategory.USAGE
    exit_code = 2


class ConfigError(McdhError, ValueError):
    category = Enums.ErrorCategory.CONFIG
    exit_code = 3


class SchemaError(McdhError, ValueError):
    """Raised when an input table violates its schema. Carries the offending (1-based, header excluded) row numbers."""
    category = Enums.ErrorCategory.SCHEMA
    exit_code = 3

    def __init__(self, message: str, rows: list[int] = None) -> None:
        self.rows = sorted(rows or [])
        shown = f" (rows: {', '.join(str(row) for row in self.rows[:20])}{', ...' if len(self.rows) > 20 else ''})" if self.rows else ""
        super().__init__(f"{message}{shown}")


class NumericalInstabilityError(McdhError, ArithmeticError):
    category = Enums.ErrorCategory.NUMERICAL
    exit_code = 4


class InitializationError(NumericalInstabilityError):
    pass


class ConsistencyError(McdhError, LookupError):
    category = Enums.ErrorCategory.CONSISTENCY
    exit_code = 5


class UnscoreableIndividualError(ConsistencyError):
    pass


class DrawsVersionError(McdhError):
    category = Enums.ErrorCategory.VERSION
    exit_code = 3
