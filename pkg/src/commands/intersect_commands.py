"""
Intersection numbers for every (m, v) pair of a run configuration.
"""

from pathlib import Path
from typing import Optional

from loguru import logger

from ..dependencies import get_base_field, get_real_field
from ..models.schemas import RunConfig
from ..services.intersect import total_and_prediction
from ..utils.report_export import get_report_exporter
from ..utils.resilience import ConfigurationError, ExitCode


def cmd_intersect(config: RunConfig, out: Optional[Path] = None, threads: int = 1) -> ExitCode:
    """
    Compute one IntersectionReport per (m, v) pair and write them as JSON.

    Args:
        config: Validated run configuration; needs F_poly, m_range and v_list
        out: Report path, stdout when None
        threads: Worker threads for the α sums

    Returns:
        ExitCode.SUCCESS; numeric failures propagate to the caller
    """
    if config.F_poly is None:
        raise ConfigurationError("intersect needs F_poly", [(None, "F_poly", "field required")])
    if not config.m_range or not config.v_list:
        raise ConfigurationError(
            "intersect needs non-empty m_range and v_list",
            [(None, "m_range" if not config.m_range else "v_list", "list is empty")],
        )

    k = get_base_field(config.d_k)
    F = get_real_field(config.F_poly, config.d_k)

    reports = []
    for m in config.m_range:
        for v in config.v_list:
            logger.info(f"Intersecting KR(m={m}, v={v}) with the CM cycle")
            reports.append(total_and_prediction(k, F, m, v, config.tol, threads))

    document = {"d_k": config.d_k, "F_poly": list(config.F_poly), "reports": reports}
    exporter = get_report_exporter()
    exporter.write(exporter.render_json(document), out)
    return ExitCode.SUCCESS
