"""
Audit of ρ(a), the number of O_K-ideals of relative norm a.
"""

from pathlib import Path
from typing import Dict, List, Optional, Sequence

from loguru import logger

from ..dependencies import get_base_field, get_real_field
from ..models.schemas import PrimeExponent, RhoAuditEntry, RunConfig
from ..services.base_field import ImagQuadField
from ..services.cm_field import (
    PrimeIdealF,
    TotallyRealField,
    factor_ideal,
    integral_ideals_up_to,
    rho_from_factorization,
    split_type,
)
from ..utils.metrics import get_metrics
from ..utils.report_export import get_report_exporter
from ..utils.resilience import BatchStatus, ConfigurationError, ExitCode, run_item


def _exponents(k: ImagQuadField, factorization: Dict[PrimeIdealF, int]) -> List[PrimeExponent]:
    return [
        PrimeExponent(p=P.p, index=P.index, f_deg=P.f_deg, split=split_type(k, P), ord=e)
        for P, e in sorted(factorization.items(), key=lambda item: (item[0].p, item[0].index))
    ]


def _audit_generators(k: ImagQuadField, F: TotallyRealField, label: str,
                      generators: Sequence[Sequence[int]]) -> RhoAuditEntry:
    if any(len(g) > F.n for g in generators):
        raise ConfigurationError(f"{label}: generators have at most {F.n} coordinates")
    elems = [F.elem(list(g) + [0] * (F.n - len(g))) for g in generators]
    if all(x.is_zero() for x in elems):
        raise ConfigurationError(f"{label}: the zero ideal has no ρ")
    a = F.ideal(elems)
    factorization = factor_ideal(F, a)
    # negative exponents make ρ vanish
    return RhoAuditEntry(
        label=label,
        norm=str(a.norm()),
        factorization=_exponents(k, factorization),
        rho=rho_from_factorization(k, factorization),
    )


def _audit_enumerated(k: ImagQuadField, label: str, factorization: Dict[PrimeIdealF, int],
                      norm: int) -> RhoAuditEntry:
    return RhoAuditEntry(
        label=label,
        norm=str(norm),
        factorization=_exponents(k, factorization),
        rho=rho_from_factorization(k, factorization),
    )


def cmd_rho(config: RunConfig, out: Optional[Path] = None, threads: int = 1) -> ExitCode:
    """
    ρ for every explicit ideal of the rho section and, with norm_bound, for every
    integral ideal of norm at most the bound. Each ideal is a separate item.
    """
    section = config.rho
    if section is None:
        raise ConfigurationError("rho needs a rho section", [(None, "rho", "field required")])
    if config.F_poly is None:
        raise ConfigurationError("rho needs F_poly", [(None, "F_poly", "field required")])

    k = get_base_field(config.d_k)
    F = get_real_field(config.F_poly, config.d_k)
    status = BatchStatus()
    entries: List[RhoAuditEntry] = []

    with get_metrics().measure("rho_audit", {"explicit": len(section.ideals), "bound": section.norm_bound}):
        for i, generators in enumerate(section.ideals):
            label = f"ideal[{i}]"
            outcome = status.record(run_item(label, _audit_generators, k, F, label, generators))
            entries.append(
                outcome.value if outcome.ok
                else RhoAuditEntry(label=label, error=outcome.error_type, message=outcome.message)
            )

        if section.norm_bound is not None:
            ideals = integral_ideals_up_to(F, section.norm_bound)
            logger.info(f"Auditing {len(ideals)} integral ideals of norm <= {section.norm_bound}")
            for i, (factorization, norm) in enumerate(ideals):
                label = f"norm<={section.norm_bound}[{i}]"
                outcome = status.record(run_item(label, _audit_enumerated, k, label, factorization, norm))
                entries.append(outcome.value)

    document = {"d_k": config.d_k, "F_poly": list(config.F_poly), "entries": entries}
    exporter = get_report_exporter()
    exporter.write(exporter.render_json(document), out)
    return status.exit_code
