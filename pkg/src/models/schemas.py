"""
Pydantic schemas for run configuration and machine-readable reports
"""

from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class SplitType(str, Enum):
    """How a prime of F behaves in K = k·F"""
    SPLIT = "split"
    INERT = "inert"
    RAMIFIED = "ramified"


class Verdict(str, Enum):
    """Outcome of a numerical boundedness diagnostic"""
    BOUNDED = "bounded"
    UNBOUNDED = "unbounded"
    INCONCLUSIVE = "inconclusive"


class Signature(BaseModel):
    """Inertia (pos, neg) of a nondegenerate Hermitian form"""
    model_config = ConfigDict(frozen=True)

    pos: int = Field(..., ge=0, description="Number of positive eigenvalues")
    neg: int = Field(..., ge=0, description="Number of negative eigenvalues")

    @property
    def rank(self) -> int:
        return self.pos + self.neg

    def as_tuple(self) -> tuple:
        return (self.pos, self.neg)


# ============= Run Configuration =============

class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RaySpec(_Strict):
    """A ray towards the boundary: u fixed, |q| decreasing geometrically"""
    u: List[List[float]] = Field(default_factory=list, description="u as [re, im] pairs, length n-2")
    z_real: float = Field(0.0, description="Re z along the ray")
    q_start: float = Field(1e-2, gt=0, lt=1, description="Largest |q| sampled")
    q_stop: float = Field(1e-8, gt=0, lt=1, description="Smallest |q| sampled")
    samples: int = Field(13, ge=2, description="Number of geometric samples")

    @model_validator(mode="after")
    def _decreasing(self):
        if not self.q_stop < self.q_start:
            raise ValueError("q_stop must be smaller than q_start")
        return self


class ThetaSpec(_Strict):
    """Theta-estimate probe on a boundary vector f = (a, b, 0)"""
    k_exp: int = Field(3, ge=1, description="Power of xi_v multiplying the residual")
    xi_v: List[float] = Field(
        default_factory=lambda: [2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0],
        description="Values of xi_v = xi/(4 pi v) to probe",
    )
    b: List[List[int]] = Field(default_factory=list, description="Λ-coordinates of f as [a, b] pairs")

    @field_validator("xi_v")
    @classmethod
    def _above_one(cls, values: List[float]) -> List[float]:
        if not values or any(x <= 1 for x in values):
            raise ValueError("every xi_v must exceed 1")
        return values


class GreenSection(_Strict):
    """Chart description for the Green function probes"""
    n: int = Field(..., ge=2, description="Rank of L (signature (n-1, 1))")
    A: List[List[List[int]]] = Field(
        default_factory=list,
        description="Gram matrix of Λ over O_k, entries [a, b] meaning a + bω",
    )
    m: int = Field(..., description="Norm of the KR divisor")
    v: float = Field(..., gt=0, description="Imaginary part of the modular parameter")
    tol: Optional[float] = Field(None, gt=0, description="Absolute tolerance per Green value")
    max_radius: Optional[float] = Field(None, gt=0)
    epsilon: Optional[float] = Field(None, gt=0, description="Chart size; inputs need xi > 1/epsilon")
    psi_window: Optional[float] = Field(None, gt=0)
    ray: RaySpec = Field(default_factory=RaySpec)
    theta: Optional[ThetaSpec] = None

    @model_validator(mode="after")
    def _shape(self):
        if self.m == 0:
            raise ValueError("m must be nonzero")
        if len(self.A) != self.n - 2 or any(len(row) != self.n - 2 for row in self.A):
            raise ValueError(f"A must be a {self.n - 2}x{self.n - 2} matrix for n={self.n}")
        if len(self.ray.u) != self.n - 2:
            raise ValueError(f"ray.u must have length n-2 = {self.n - 2}")
        if self.theta is not None and self.theta.b and len(self.theta.b) != self.n - 2:
            raise ValueError(f"theta.b must be empty or have length n-2 = {self.n - 2}")
        return self


class LatticeSection(_Strict):
    """A Hermitian lattice literal plus the computations requested on it"""
    rank: int = Field(..., ge=1)
    entries: List[List[int]] = Field(..., description="Row-major Gram entries [a, b]")
    counts: List[int] = Field(default_factory=list, description="m values for count_vectors")
    isotropic_bound: Optional[int] = Field(None, ge=1)
    decompose: bool = Field(True, description="Run normal_decomposition on the first isotropic vector")
    ind: List[int] = Field(default_factory=list, description="m values for the Ind_B table")

    @model_validator(mode="after")
    def _square(self):
        if len(self.entries) != self.rank * self.rank:
            raise ValueError(f"entries must hold rank^2 = {self.rank ** 2} pairs")
        if any(len(pair) != 2 for pair in self.entries):
            raise ValueError("every Gram entry is a pair [a, b]")
        return self


class RhoSection(_Strict):
    """Ideals to audit, as generator lists in the power basis (ascending)"""
    ideals: List[List[List[int]]] = Field(default_factory=list)
    norm_bound: Optional[int] = Field(None, ge=1, description="Audit every integral ideal up to this norm")


class RunConfig(_Strict):
    """Single JSON document driving every subcommand"""
    d_k: int = Field(..., description="Absolute discriminant of k (odd)")
    F_poly: Optional[List[int]] = Field(
        None, description="Monic defining polynomial of F, coefficients highest degree first"
    )
    m_range: List[int] = Field(default_factory=list)
    v_list: List[float] = Field(default_factory=list)
    tol: float = Field(1e-8, gt=0)
    green: Optional[GreenSection] = None
    lattice: Optional[LatticeSection] = None
    rho: Optional[RhoSection] = None
    seed: int = 0

    @field_validator("F_poly")
    @classmethod
    def _monic(cls, coeffs: Optional[List[int]]) -> Optional[List[int]]:
        if coeffs is None:
            return coeffs
        if len(coeffs) < 2 or coeffs[0] != 1:
            raise ValueError("F_poly must be monic of degree at least 1")
        return coeffs

    @field_validator("m_range")
    @classmethod
    def _nonzero(cls, values: List[int]) -> List[int]:
        if any(m == 0 for m in values):
            raise ValueError("m_range must not contain 0")
        return values

    @field_validator("v_list")
    @classmethod
    def _positive(cls, values: List[float]) -> List[float]:
        if any(v <= 0 for v in values):
            raise ValueError("every v must be positive")
        return values

    model_config = ConfigDict(
        extra="forbid",
        json_schema_extra={
            "example": {
                "d_k": 3,
                "F_poly": [1, -1, -1],
                "m_range": [-2, -1, 1, 2],
                "v_list": [1.0],
                "tol": 1e-8,
            }
        },
    )


# ============= Reports =============

PROBE_CSV_HEADER = ("abs_q", "xi", "E_int", "E_bnd", "tail_bound")


class PrimeCoefficient(BaseModel):
    """One log p term of the finite intersection number"""
    prime: int = Field(..., description="Rational prime p")
    coefficient: str = Field(..., description="Exact rational coefficient of log p")
    value: float = Field(..., description="coefficient * log p")


class IntersectionReport(BaseModel):
    """Intersection of KR(m, v) with the CM cycle and the coefficient it predicts"""
    m: int
    v: float
    i_fin: float
    i_fin_terms: List[PrimeCoefficient] = Field(default_factory=list)
    i_fin_alpha_first: float = Field(..., description="i_fin summed α-first (audit)")
    i_arch: float
    i_arch_tail_bound: float
    total: float
    predicted_c_phi: float
    r: int
    norm_rel_disc: int
    h_k: int
    w_k: int
    alpha_count: int = Field(..., description="Totally positive α of trace m")
    arch_alpha_count: int = Field(..., description="α in F_- enumerated for i_arch")
    error_bound: float


class ProbeRow(BaseModel):
    """One sample of a boundary ray"""
    abs_q: float
    xi: float
    E_int: float
    E_bnd: float
    tail_bound: float
    flagged: bool = False
    message: Optional[str] = None

    def csv_values(self) -> List[str]:
        return [repr(float(x)) for x in (self.abs_q, self.xi, self.E_int, self.E_bnd, self.tail_bound)]


class BoundaryReport(BaseModel):
    """Boundary behaviour of the Green function along one ray"""
    m: int
    v: float
    ind: int
    rows: List[ProbeRow]
    decay_exponent: Optional[float] = Field(None, description="Fitted slope of log|E_int| vs log|q|")
    bnd_variation: float = Field(..., description="sup - inf of E_bnd over the final decade")
    tail_total: float
    verdict: Verdict


class ThetaRow(BaseModel):
    """Residuals of the theta estimates at one xi_v"""
    xi_v: float
    mass_residual: float
    first_moment: float
    second_moment_residual: float
    reciprocal_sum: float
    scaled_mass_residual: float
    scaled_first_moment: float
    scaled_second_moment_residual: float
    reciprocal_ratio: float


class ThetaReport(BaseModel):
    k_exp: int
    rows: List[ThetaRow]
    trend_slope: float = Field(..., description="Least-squares slope of scaled residuals vs log2 xi_v")
    verdict: Verdict


class PrimeExponent(BaseModel):
    """ord_P of an ideal at one prime P"""
    p: int
    index: int = Field(..., description="Position of P among the primes above p")
    f_deg: int
    split: SplitType
    ord: int


class RhoAuditEntry(BaseModel):
    label: str
    norm: Optional[str] = Field(None, description="Exact norm, a rational for fractional ideals")
    factorization: List[PrimeExponent] = Field(default_factory=list)
    rho: Optional[int] = None
    error: Optional[str] = None
    message: Optional[str] = None


class LatticeReport(BaseModel):
    d_k: int
    rank: int
    self_dual: Any
    signature: Any
    counts: Dict[str, Any] = Field(default_factory=dict)
    isotropic_bound: int
    isotropic: Any = None
    decomposition: Any = None
    ind_table: Dict[str, Any] = Field(default_factory=dict)
    unimodular_check: Any = Field(None, description="Counts recomputed after a seeded unimodular basis change")
