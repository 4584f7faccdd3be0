"""
Boundary probes of the Kudla Green function along a ray towards the cusp.
"""

from pathlib import Path
from typing import List, Optional

from loguru import logger

from ..config import get_settings
from ..dependencies import get_base_field
from ..models.schemas import PROBE_CSV_HEADER, BoundaryReport, GreenSection, RunConfig, ThetaReport
from ..services.green import (
    CuspChart,
    GreenParams,
    LatticeVectorCoords,
    boundary_diagnostics,
    ray_points,
    theta_check,
)
from ..utils.report_export import get_report_exporter
from ..utils.resilience import ConfigurationError, ExitCode


def _params(section: GreenSection, config: RunConfig) -> GreenParams:
    settings = get_settings()
    return GreenParams(
        m=section.m,
        v=section.v,
        tol=section.tol if section.tol is not None else config.tol,
        max_radius=section.max_radius if section.max_radius is not None else settings.max_radius,
        divisor_floor=settings.divisor_precision_floor,
    )


def _boundary_vector(chart: CuspChart, section: GreenSection) -> LatticeVectorCoords:
    """f = (0, b, 0); b defaults to the first basis vector of Λ"""
    k = chart.k
    if section.theta is not None and section.theta.b:
        b = tuple(k.parse(pair) for pair in section.theta.b)
    else:
        b = tuple(k.one if i == 0 else k.zero for i in range(chart.n - 2))
    return LatticeVectorCoords(k.zero, b, k.zero)


def _summary_lines(report: BoundaryReport) -> List[str]:
    exponent = "none" if report.decay_exponent is None else repr(report.decay_exponent)
    flagged = sum(1 for row in report.rows if row.flagged)
    return [
        f"verdict={report.verdict.value}",
        f"decay_exponent={exponent}",
        f"bnd_variation={report.bnd_variation!r}",
        f"ind={report.ind}",
        f"tail_total={report.tail_total!r}",
        f"flagged_rows={flagged}",
    ]


def _theta_lines(report: ThetaReport) -> List[str]:
    lines = [f"theta k_exp={report.k_exp} trend_slope={report.trend_slope!r} verdict={report.verdict.value}"]
    for row in report.rows:
        lines.append(
            f"theta xi_v={row.xi_v!r} mass={row.scaled_mass_residual!r} "
            f"first={row.scaled_first_moment!r} second={row.scaled_second_moment_residual!r} "
            f"reciprocal_ratio={row.reciprocal_ratio!r}"
        )
    return lines


def cmd_green_probe(config: RunConfig, out: Optional[Path] = None, threads: int = 1) -> ExitCode:
    """
    Sample E_int and E_bnd along the configured ray and write them as CSV.

    The five data columns are followed by '#' lines holding the fitted decay
    exponent, the E_bnd variation and the verdict, plus the theta residuals when
    a theta section is present. Rows on the divisor are flagged as nan; the run
    fails only when every row is flagged.
    """
    section = config.green
    if section is None:
        raise ConfigurationError("green-probe needs a green section", [(None, "green", "field required")])

    k = get_base_field(config.d_k)
    chart = CuspChart.from_entries(k, section.A, section.epsilon)
    params = _params(section, config)
    points = ray_points(chart, section.ray)
    window = section.psi_window if section.psi_window is not None else get_settings().psi_window

    report = boundary_diagnostics(chart, params, points, window, threads)
    comments = _summary_lines(report)

    if section.theta is not None:
        theta = theta_check(
            chart,
            _boundary_vector(chart, section),
            points[0],
            section.theta.k_exp,
            section.theta.xi_v,
        )
        comments.extend(_theta_lines(theta))
        logger.info(f"Theta residual trend {theta.trend_slope:.3g}: {theta.verdict.value}")

    exporter = get_report_exporter()
    text = exporter.render_csv(PROBE_CSV_HEADER, (row.csv_values() for row in report.rows), comments)
    exporter.write(text, out)
    return ExitCode.SUCCESS
