"""
Timing for the expensive kernels.

The α enumeration, the Green lattice sums and the isotropic search run inside
``measure``; each call logs its duration with loguru and feeds per-operation
counters that ``main`` logs at DEBUG level when a command finishes.
"""

import threading
import time
from collections import defaultdict
from contextlib import contextmanager
from functools import wraps
from typing import Any, Callable, Dict, Optional

from loguru import logger


class PerformanceMetrics:
    """Calls, failures and accumulated milliseconds per named operation"""

    def __init__(self):
        self._lock = threading.Lock()
        self._calls: Dict[str, int] = defaultdict(int)
        self._errors: Dict[str, int] = defaultdict(int)
        self._elapsed_ms: Dict[str, float] = defaultdict(float)

    @contextmanager
    def measure(self, operation: str, metadata: Optional[Dict[str, Any]] = None):
        """
        Usage:
            with get_metrics().measure("enumerate_F_minus", {"m": -1, "T": 4.0}):
                ...
        """
        start = time.perf_counter()
        failed = None
        try:
            yield
        except Exception as e:
            failed = type(e).__name__
            raise
        finally:
            elapsed = (time.perf_counter() - start) * 1000
            with self._lock:
                self._calls[operation] += 1
                self._elapsed_ms[operation] += elapsed
                if failed:
                    self._errors[operation] += 1
            bound = logger.bind(operation=operation, duration_ms=round(elapsed, 3), **(metadata or {}))
            if failed:
                bound.warning(f"{operation} raised {failed} after {elapsed:.1f}ms")
            else:
                bound.debug(f"{operation} took {elapsed:.1f}ms")

    def get_operation_stats(self, operation: str) -> Dict[str, Any]:
        with self._lock:
            calls = self._calls.get(operation, 0)
            errors = self._errors.get(operation, 0)
            elapsed = self._elapsed_ms.get(operation, 0.0)
        return {
            "operation": operation,
            "total_calls": calls,
            "errors": errors,
            "error_rate_percent": round(errors / calls * 100, 2) if calls else 0,
            "total_ms": round(elapsed, 3),
        }

    def log_summary(self) -> None:
        """One DEBUG line per operation seen so far, slowest first"""
        with self._lock:
            names = sorted(self._calls, key=lambda name: -self._elapsed_ms[name])
        for name in names:
            stats = self.get_operation_stats(name)
            logger.debug(
                f"{name}: {stats['total_calls']} calls, {stats['errors']} failed, {stats['total_ms']:.1f}ms"
            )


def track_performance(operation_name: str):
    """Run the decorated function inside ``get_metrics().measure(operation_name)``"""
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            with get_metrics().measure(operation_name):
                return func(*args, **kwargs)
        return wrapper
    return decorator


_metrics_instance: Optional[PerformanceMetrics] = None


def get_metrics() -> PerformanceMetrics:
    """Get the process-wide metrics tracker"""
    global _metrics_instance

    if _metrics_instance is None:
        _metrics_instance = PerformanceMetrics()

    return _metrics_instance
