"""
Utility modules
"""

from .resilience import ExitCode, ToolkitError

__all__ = ["ExitCode", "ToolkitError"]
