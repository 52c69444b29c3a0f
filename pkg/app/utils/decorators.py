"""
Custom decorators for the application.
Includes the @measure_time decorator for command and training-step timing.
"""

import time
import functools
from typing import Callable, Any

from utils.log_config import get_logger

logger = get_logger(__name__)


def measure_time(func: Callable) -> Callable:
    """
    Decorator that measures and logs the execution time of a function.

    It logs the function name and execution time in milliseconds.

    Usage:
        @measure_time
        def run_eval(...):
            ...

    Args:
        func: The function to be measured

    Returns:
        Wrapped function with timing measurement

    Example output:
        INFO: [TIMING] run_eval executed in 15.23ms
    """

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        start_time = time.perf_counter()
        try:
            return func(*args, **kwargs)
        finally:
            execution_time_ms = (time.perf_counter() - start_time) * 1000
            logger.info(
                f"[TIMING] {func.__name__} executed in {execution_time_ms:.2f}ms",
                extra={"extra_data": {
                    "function": func.__name__,
                    "duration_ms": round(execution_time_ms, 3),
                }},
            )

    return wrapper


def log_exceptions(func: Callable) -> Callable:
    """
    Decorator that logs exceptions before re-raising them.

    Args:
        func: The function to be wrapped

    Returns:
        Wrapped function with exception logging
    """

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except Exception as e:
            logger.exception(f"Exception in {func.__name__}: {str(e)}")
            raise

    return wrapper
