"""
Invariants of a Hermitian lattice literal.

Each requested computation is an independent item: a failed precondition turns
into an error entry of the report and a nonzero exit code, while the remaining
items are still computed.
"""

from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from loguru import logger

from ..config import get_settings
from ..dependencies import get_base_field
from ..models.schemas import LatticeReport, LatticeSection, RunConfig
from ..services.base_field import ImagQuadField
from ..services.herm_lattice import (
    CuspLabel,
    HermLattice,
    NormalDecomposition,
    boundary_multiplicity,
    check_self_dual,
    count_vectors,
    find_isotropic,
    ind_table,
    normal_decomposition,
    random_unimodular,
    signature,
)
from ..utils.report_export import get_report_exporter
from ..utils.resilience import BatchStatus, ConfigurationError, ExitCode, LatticeError, run_item


def _pairs(vector) -> List[List]:
    return [x.as_pair() for x in vector]


def _matrix(rows) -> List[List[List]]:
    return [_pairs(row) for row in rows]


def _build_lattice(k: ImagQuadField, section: LatticeSection) -> HermLattice:
    try:
        return HermLattice.from_entries(k, section.rank, section.entries)
    except LatticeError as e:
        raise ConfigurationError("lattice literal rejected", [(None, "lattice.entries", str(e))]) from e


def _decomposition_entry(decomposition: NormalDecomposition) -> Dict:
    return {
        "e": _pairs(decomposition.e),
        "e_prime": _pairs(decomposition.e_prime),
        "basis_change": _matrix(decomposition.basis_change),
        "gram": _matrix(decomposition.gram),
        "chart_gram": _matrix(decomposition.chart_gram),
        "lambda_gram": _matrix(decomposition.lambda_gram),
        "block_sizes": list(decomposition.block_sizes),
    }


def _decompose(L: HermLattice, isotropic) -> NormalDecomposition:
    if not isotropic:
        raise LatticeError("no isotropic vector found under the search bound")
    return normal_decomposition(L, isotropic[0])


def _ind_entries(L: HermLattice, decomposition: Optional[NormalDecomposition], ms: List[int],
                 vs: List[float]) -> Dict:
    if decomposition is None:
        raise LatticeError("Ind table needs a normal decomposition")
    label = CuspLabel(HermLattice(L.k, decomposition.lambda_gram))
    table = ind_table(label, ms)
    for m in ms:
        if vs:
            table[str(m)]["multiplicity"] = {
                repr(v): boundary_multiplicity(label, m, v) for v in vs
            }
    return table


def _unimodular_counts(L: HermLattice, ms: List[int], seed: int) -> Dict:
    """Counts in a random basis of the same lattice; they must match the originals"""
    rng = np.random.default_rng(seed)
    u, _ = random_unimodular(L.k, L.rank, rng)
    moved = L.transform(u)
    return {
        "seed": seed,
        "gram": _matrix(moved.gram),
        "counts": {str(m): count_vectors(moved, m) for m in ms},
    }


def cmd_lattice(config: RunConfig, out: Optional[Path] = None, threads: int = 1) -> ExitCode:
    """
    Self-duality, signature, vector counts, isotropic vectors, normal
    decomposition and boundary indices of the configured lattice, as JSON.
    """
    section = config.lattice
    if section is None:
        raise ConfigurationError("lattice needs a lattice section", [(None, "lattice", "field required")])

    k = get_base_field(config.d_k)
    L = _build_lattice(k, section)
    bound = section.isotropic_bound or get_settings().isotropic_search_bound
    status = BatchStatus()

    self_dual = status.record(run_item("self_dual", check_self_dual, L))
    sig = status.record(run_item("signature", signature, L))

    counts = {}
    for m in section.counts:
        counts[str(m)] = status.record(run_item(f"count[{m}]", count_vectors, L, m)).as_entry()

    unimodular = None
    if section.counts and all(isinstance(c, int) for c in counts.values()):
        outcome = status.record(run_item("unimodular_check", _unimodular_counts, L, section.counts, config.seed))
        unimodular = outcome.as_entry()
        if outcome.ok and outcome.value["counts"] != counts:
            logger.error(f"Vector counts changed under a unimodular basis change: {outcome.value['counts']}")
            unimodular["mismatch"] = True

    isotropic = status.record(run_item("isotropic", find_isotropic, L, bound))

    decomposition = None
    if (section.decompose or section.ind) and sig.ok and sig.value.neg == 1:
        found = isotropic.value if isotropic.ok else []
        decomposition = status.record(run_item("decomposition", _decompose, L, found))

    table: Dict = {}
    if section.ind:
        decomposed = decomposition.value if decomposition is not None and decomposition.ok else None
        outcome = status.record(run_item(
            "ind_table", _ind_entries, L, decomposed, section.ind, config.v_list
        ))
        table = outcome.as_entry()

    report = LatticeReport(
        d_k=config.d_k,
        rank=L.rank,
        self_dual=self_dual.as_entry(),
        signature=sig.value.model_dump() if sig.ok else sig.as_entry(),
        counts=counts,
        isotropic_bound=bound,
        isotropic=[_pairs(x) for x in isotropic.value] if isotropic.ok else isotropic.as_entry(),
        decomposition=(
            None if decomposition is None
            else _decomposition_entry(decomposition.value) if decomposition.ok
            else decomposition.as_entry()
        ),
        ind_table=table,
        unimodular_check=unimodular,
    )

    exporter = get_report_exporter()
    exporter.write(exporter.render_json(report), out)
    code = status.exit_code
    if unimodular is not None and unimodular.get("mismatch"):
        code = max(code, ExitCode.ITEM_FAILURE)
    return ExitCode(code)
