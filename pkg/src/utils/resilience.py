"""
Error hierarchy and per-item fault isolation.

Every failure the toolkit can report maps onto one of the classes below, and the
CLI turns them into exit codes. Batch commands (lattice items, rho audits) run
each item through ``run_item`` so that one bad input degrades a single entry of
the report instead of aborting the whole run.
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import wraps
from typing import Any, Callable, List, Optional, Tuple, TypeVar

from loguru import logger


T = TypeVar('T')


class ExitCode(int, Enum):
    """Process exit codes"""
    SUCCESS = 0
    ITEM_FAILURE = 1  # at least one batch item failed a precondition
    CONFIG_ERROR = 2
    NUMERIC_FAILURE = 3  # divisor proximity or truncation cap


class ToolkitError(Exception):
    """Base class for every error raised by the toolkit"""
    pass


class ConfigurationError(ToolkitError):
    """
    Raised when a run configuration cannot be ingested.

    Carries one ``(line, location, message)`` entry per offending key so the CLI
    can point at the exact line of the JSON document.
    """

    def __init__(self, message: str, entries: Optional[List[Tuple[Optional[int], str, str]]] = None):
        super().__init__(message)
        self.entries = entries or []

    def render(self) -> str:
        lines = [str(self)]
        for line, location, message in self.entries:
            where = f"line {line}" if line is not None else "line ?"
            lines.append(f"  {where}: {location}: {message}")
        return "\n".join(lines)


class FieldValidationError(ToolkitError, ValueError):
    """Raised when a discriminant or defining polynomial is rejected"""
    pass


class NotIntegralError(ToolkitError, ArithmeticError):
    """Raised when an exact division leaves the ring of integers"""
    pass


class LatticeError(ToolkitError, ValueError):
    """Raised when a lattice violates the precondition of an operation"""
    pass


class NumericFailure(ToolkitError, ArithmeticError):
    """Base class for failures of the floating-point layer"""
    pass


class DivisorProximityError(NumericFailure):
    """Raised when a sample point lies on (or numerically at) the divisor"""
    pass


class TruncationCapError(NumericFailure):
    """Raised when the requested tolerance needs a radius beyond the configured cap"""
    pass


class DomainError(NumericFailure):
    """Raised when a point or argument lies outside the domain of a formula"""
    pass


@dataclass
class ItemOutcome:
    """Result of one batch item: either a value or a recorded failure"""
    label: str
    value: Any = None
    error_type: Optional[str] = None
    message: Optional[str] = None
    numeric: bool = False

    @property
    def ok(self) -> bool:
        return self.error_type is None

    def as_entry(self) -> Any:
        if self.ok:
            return self.value
        return {"error": self.error_type, "message": self.message}


def run_item(label: str, func: Callable[..., T], *args, **kwargs) -> ItemOutcome:
    """
    Run one batch item, converting toolkit errors into a failed outcome.

    Args:
        label: Name of the item used in logs and reports
        func: Callable computing the item
        *args, **kwargs: Forwarded to ``func``

    Returns:
        ItemOutcome holding either the value or the failure description
    """
    try:
        return ItemOutcome(label=label, value=func(*args, **kwargs))
    except ToolkitError as e:
        logger.warning(f"Item '{label}' failed: {type(e).__name__}: {e}")
        return ItemOutcome(
            label=label,
            error_type=type(e).__name__,
            message=str(e),
            numeric=isinstance(e, NumericFailure),
        )


@dataclass
class BatchStatus:
    """Aggregates item outcomes into a process exit code"""
    outcomes: List[ItemOutcome] = field(default_factory=list)

    def record(self, outcome: ItemOutcome) -> ItemOutcome:
        self.outcomes.append(outcome)
        return outcome

    @property
    def exit_code(self) -> ExitCode:
        failed = [o for o in self.outcomes if not o.ok]
        if not failed:
            return ExitCode.SUCCESS
        if any(o.numeric for o in failed):
            return ExitCode.NUMERIC_FAILURE
        return ExitCode.ITEM_FAILURE


def exit_code_for(error: BaseException) -> ExitCode:
    """Map an exception escaping a command to its exit code"""
    if isinstance(error, ConfigurationError):
        return ExitCode.CONFIG_ERROR
    if isinstance(error, FieldValidationError):
        return ExitCode.CONFIG_ERROR
    if isinstance(error, NumericFailure):
        return ExitCode.NUMERIC_FAILURE
    return ExitCode.ITEM_FAILURE


def log_failures(operation: str):
    """
    Decorator logging toolkit errors raised by ``operation`` before re-raising.

    Usage:
        @log_failures("green_full")
        def green_full(...):
            ...
    """
    def decorator(func: Callable[..., T]) -> Callable[..., T]:
        @wraps(func)
        def wrapper(*args, **kwargs) -> T:
            try:
                return func(*args, **kwargs)
            except NumericFailure as e:
                logger.error(f"{operation} failed numerically: {e}")
                raise
            except ToolkitError as e:
                logger.warning(f"{operation} rejected its input: {e}")
                raise
        return wrapper
    return decorator
