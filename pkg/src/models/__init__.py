"""
Data models for run configurations and reports
"""

from .schemas import (
    RunConfig,
    IntersectionReport,
    BoundaryReport,
    ThetaReport,
    LatticeReport,
    RhoAuditEntry,
    SplitType,
    Verdict,
)

__all__ = [
    "RunConfig",
    "IntersectionReport",
    "BoundaryReport",
    "ThetaReport",
    "LatticeReport",
    "RhoAuditEntry",
    "SplitType",
    "Verdict",
]
