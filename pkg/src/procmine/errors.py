"""Exception hierarchy shared by every analysis module."""

from __future__ import annotations


class ProcessMiningError(Exception):
    """Base class for validation failures raised by the engine."""


class SchemaError(ProcessMiningError):
    """Input structure does not match the declared schema or configuration."""


class RowError(ProcessMiningError):
    """A single input row is malformed."""

    def __init__(self, row_number: int, message: str) -> None:
        super().__init__(f"row {row_number}: {message}")
        self.row_number = row_number


class EmptyLogError(ProcessMiningError):
    def __init__(self, message: str = "empty log") -> None:
        super().__init__(message)


class IntegrityError(ProcessMiningError):
    """Referential integrity violated (dangling ids, duplicates, ...)."""

    def __init__(self, message: str, ids: list[str] | None = None) -> None:
        super().__init__(message)
        self.ids = list(ids or [])


class QueryError(ProcessMiningError):
    """An analysis query references something the model does not contain."""


class ConfigError(ProcessMiningError):
    pass


class AssumptionError(ProcessMiningError):
    """Data violates a modelling assumption (e.g. activity shared by two processes)."""
