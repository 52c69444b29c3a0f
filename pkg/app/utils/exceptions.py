"""
Custom exception classes for the application.
"""

from typing import Optional

from utils.constants import (
    EXIT_BAD_CHECKPOINT,
    EXIT_BAD_CONFIG,
    EXIT_BAD_INPUT,
    EXIT_FAILURE,
)


class AppException(Exception):
    """Base exception for the application."""

    exit_code: int = EXIT_FAILURE

    def __init__(self, message: str, code: Optional[str] = None):
        self.message = message
        self.code = code
        super().__init__(self.message)


class ContractViolationError(AppException):
    """Raised when an operation's shape, size or range precondition fails."""
    pass


class InputError(AppException):
    """Raised for unreadable or inconsistent user inputs."""

    exit_code = EXIT_BAD_INPUT


class FlowFormatError(InputError):
    """Raised when a .flo file is malformed."""
    pass


class CheckpointError(AppException):
    """Raised when a checkpoint cannot be read, written or matched."""

    exit_code = EXIT_BAD_CHECKPOINT


class ConfigurationError(AppException):
    """Raised for unknown keys, invalid values or mismatched configurations."""

    exit_code = EXIT_BAD_CONFIG


class UndefinedMetricError(AppException):
    """Raised when a metric has no defined value (e.g. an empty mask)."""
    pass


class NonFiniteLossError(AppException):
    """Raised when training produces a NaN or infinite loss."""
    pass
