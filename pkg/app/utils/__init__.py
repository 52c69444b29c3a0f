"""Utils module."""

from utils.decorators import measure_time, log_exceptions
from utils.constants import ERROR_MESSAGES
from utils.exceptions import (
    AppException,
    CheckpointError,
    ConfigurationError,
    ContractViolationError,
    FlowFormatError,
    InputError,
    NonFiniteLossError,
    UndefinedMetricError,
)
from utils.log_config import get_logger, configure_logging, JSONFormatter
from utils.seeding import seed_everything

__all__ = [
    "measure_time",
    "log_exceptions",
    "ERROR_MESSAGES",
    "AppException",
    "CheckpointError",
    "ConfigurationError",
    "ContractViolationError",
    "FlowFormatError",
    "InputError",
    "NonFiniteLossError",
    "UndefinedMetricError",
    "get_logger",
    "configure_logging",
    "JSONFormatter",
    "seed_everything",
]
