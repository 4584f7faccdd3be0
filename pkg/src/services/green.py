"""
The Kudla Green function near a cusp, in the coordinates (z, u) of a cusp chart.

The lattice is L = O_k·e ⊕ Λ ⊕ O_k·e′ with Gram [[0,0,1],[0,A,0],[1,0,0]];
the chart works with the twisted vector E′ = −δ_k·e′, so a vector
f = a·e + b·λ + a′·e′ has chart coordinates (a, b, c) with c = −a′/δ_k and

    ⟨f, f⟩ = −2√d_k·Im(a·c̄) + ᵗbAb̄,
    Ψ_f(h) = δ_k·c̄·z + ᵗuAb̄ − δ_k·ā,
    ξ(h)   = 2√d_k·Im z − ᵗuAū.

The Green function of weight m at v is Σ_{⟨f,f⟩=m} β₁(4πv|Ψ_f|²/ξ). Terms are
enumerated over the positive definite majorant Q_h(f) = ⟨f,f⟩ + 2|Ψ_f|²/ξ, and
everything past the enumeration radius is bounded explicitly.
"""

from dataclasses import dataclass
from functools import cached_property
from itertools import count
from math import ceil, exp, floor, log, pi, sqrt
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from loguru import logger
from scipy.special import exp1

from ..config import get_settings
from ..models.schemas import BoundaryReport, ProbeRow, RaySpec, ThetaReport, ThetaRow, Verdict
from ..utils.enumeration import form_value, integral_form, ldl_coefficients, count_bound, short_vectors
from ..utils.metrics import get_metrics
from ..utils.parallel import ordered_map, stable_sum
from ..utils.resilience import (
    DivisorProximityError,
    DomainError,
    LatticeError,
    TruncationCapError,
    log_failures,
)
from .base_field import ImagQuadField, KElem
from .herm_lattice import (
    HermLattice,
    block_gram,
    count_vectors,
    is_positive_definite,
    trace_form,
    vectors_of_norm,
)


EULER_GAMMA = 0.57721566490153286061

# E_bnd may wander by at most this much over the last decade of |q| and still count as bounded
BND_VARIATION_LIMIT = 1.0


# ============= β₁ =============

def beta1(x):
    """
    β₁(x) = ∫₁^∞ e^{−xu} du/u, the exponential integral E₁.

    Accepts scalars or arrays; raises DomainError for x ≤ 0.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0) or np.any(np.isnan(arr)):
        raise DomainError(f"beta1 needs x > 0, got {x}")
    value = exp1(arr)
    return float(value) if np.ndim(value) == 0 else value


def beta1_log_series(x: float, terms: int = 20) -> Tuple[float, float]:
    """
    −γ − log x + Σ_{k≤terms} (−1)^{k+1} x^k/(k·k!), with the bound on the omitted tail.

    The series alternates with decreasing terms once k + 1 > x, so the first
    omitted term bounds the remainder there.
    """
    if x <= 0:
        raise DomainError(f"beta1_log_series needs x > 0, got {x}")
    total = -EULER_GAMMA - log(x)
    term = 1.0
    for k in range(1, terms + 1):
        term *= x / k
        total += (-1) ** (k + 1) * term / k
    remainder = term * x / (terms + 1) / (terms + 1)
    return total, remainder


# ============= Charts and points =============

@dataclass(frozen=True)
class DomainPoint:
    z: complex
    u: Tuple[complex, ...] = ()

    @property
    def u_vec(self) -> np.ndarray:
        return np.array(self.u, dtype=complex)


@dataclass(frozen=True)
class CuspChart:
    """Chart at the cusp attached to a normal decomposition with Λ-Gram A"""
    k: ImagQuadField
    lambda_gram: Tuple[Tuple[KElem, ...], ...]
    epsilon: float = 0.25

    def __post_init__(self):
        lam = HermLattice(self.k, self.lambda_gram)
        if not is_positive_definite(lam):
            raise LatticeError("the Λ block of a cusp chart must be positive definite")

    @classmethod
    def from_entries(cls, k: ImagQuadField, a_entries: Sequence[Sequence[Sequence[int]]],
                     epsilon: Optional[float] = None) -> "CuspChart":
        rows = tuple(tuple(k.parse(x) for x in row) for row in a_entries)
        eps = epsilon if epsilon is not None else get_settings().chart_epsilon
        return cls(k, rows, eps)

    @property
    def n(self) -> int:
        return len(self.lambda_gram) + 2

    @property
    def r(self) -> int:
        """r = d_k·N(𝔞₀) with 𝔞₀ = O_k"""
        return self.k.d_k

    @cached_property
    def A(self) -> np.ndarray:
        if not self.lambda_gram:
            return np.zeros((0, 0), dtype=complex)
        return self.k.embed_matrix(self.lambda_gram)

    @cached_property
    def delta(self) -> complex:
        return self.k.embed(self.k.delta)

    @cached_property
    def volume(self) -> float:
        """Covolume of δ_k·O_k in C"""
        return self.k.d_k ** 1.5 / 2

    @cached_property
    def lattice(self) -> HermLattice:
        return HermLattice(self.k, block_gram(self.k, self.lambda_gram, twisted=False))

    @cached_property
    def lambda_lattice(self) -> HermLattice:
        return HermLattice(self.k, self.lambda_gram)

    @cached_property
    def _form(self):
        s = trace_form(self.lattice)
        s_int, scale = integral_form(s)
        return np.array([[float(v) for v in row] for row in s]), s_int, scale

    def ind(self, m: int) -> int:
        """Ind(m) = #{b ∈ Λ : ⟨b, b⟩ = m}"""
        return count_vectors(self.lambda_lattice, m) if m > 0 else 0

    def herm(self, x: np.ndarray, y: np.ndarray) -> complex:
        """ᵗxAȳ"""
        if len(x) == 0:
            return 0j
        return complex(x @ self.A @ np.conj(y))


@dataclass(frozen=True)
class LatticeVectorCoords:
    """f = a·e + Σ b_i·λ_i + c·E′ with c ∈ δ_k⁻¹O_k"""
    a: KElem
    b: Tuple[KElem, ...]
    c: KElem

    @classmethod
    def from_integral(cls, k: ImagQuadField, a: KElem, b: Sequence[KElem], a_prime: KElem) -> "LatticeVectorCoords":
        return cls(a, tuple(b), -a_prime / k.delta)

    def norm(self, chart: CuspChart) -> KElem:
        """⟨f, f⟩ exactly"""
        k = chart.k
        a_prime = -(self.c * k.delta)
        return chart.lattice.inner((self.a,) + self.b + (a_prime,), (self.a,) + self.b + (a_prime,))


@dataclass(frozen=True)
class GreenParams:
    m: int
    v: float
    tol: float
    max_radius: float
    divisor_floor: float = 1e-8

    def __post_init__(self):
        if self.m == 0:
            raise ValueError("m must be nonzero")
        if not self.v > 0 or not self.tol > 0 or not self.max_radius > 0:
            raise ValueError("v, tol and max_radius must be positive")


def xi(chart: CuspChart, h: DomainPoint) -> float:
    u = h.u_vec
    value = 2 * chart.k.sqrt_d * h.z.imag - chart.herm(u, u).real
    if not value > 0:
        raise DomainError(f"point z={h.z}, u={h.u} lies outside the domain (xi = {value})")
    return value


def q_coordinate(chart: CuspChart, h: DomainPoint) -> complex:
    return complex(np.exp(2j * pi * h.z / chart.r))


def point_at(chart: CuspChart, abs_q: float, z_real: float, u: Sequence[complex]) -> DomainPoint:
    """The point with the given |q|, Re z and u"""
    if not 0 < abs_q < 1:
        raise DomainError(f"|q| must lie in (0, 1), got {abs_q}")
    y = -chart.r * log(abs_q) / (2 * pi)
    return DomainPoint(complex(z_real, y), tuple(complex(t) for t in u))


def xi_from_q(chart: CuspChart, h: DomainPoint) -> float:
    """ξ = −(d_k^{3/2}/2π)·log|q|² − ᵗuAū"""
    q = abs(q_coordinate(chart, h))
    u = h.u_vec
    return -(chart.k.d_k ** 1.5 / (2 * pi)) * log(q * q) - chart.herm(u, u).real


def check_in_chart(chart: CuspChart, h: DomainPoint) -> float:
    value = xi(chart, h)
    if value <= 1 / chart.epsilon:
        raise DomainError(f"xi = {value:.6g} is not above 1/epsilon = {1 / chart.epsilon:.6g}")
    return value


def _embed_vec(k: ImagQuadField, xs: Sequence[KElem]) -> np.ndarray:
    return np.array([k.embed(x) for x in xs], dtype=complex)


def psi(chart: CuspChart, f: LatticeVectorCoords, h: DomainPoint) -> complex:
    k = chart.k
    a, c = k.embed(f.a), k.embed(f.c)
    b = _embed_vec(k, f.b)
    return chart.delta * np.conj(c) * h.z + chart.herm(h.u_vec, b) - chart.delta * np.conj(a)


def Q_h(chart: CuspChart, f: LatticeVectorCoords, h: DomainPoint) -> float:
    """⟨f, f⟩ + 2|Ψ_f(h)|²/ξ(h)"""
    norm = float(f.norm(chart).a)
    return norm + 2 * abs(psi(chart, f, h)) ** 2 / xi(chart, h)


def Q_expansion(chart: CuspChart, f: LatticeVectorCoords, h: DomainPoint) -> float:
    """|c|²ξ/2 + ᵗ(b−cu)A·conj(b−cu) + (2/ξ)|W|²"""
    k = chart.k
    a, c = k.embed(f.a), k.embed(f.c)
    b = _embed_vec(k, f.b)
    u = h.u_vec
    x = xi(chart, h)
    shifted = b - c * u
    w = (chart.delta * c * h.z.real + (c / 2) * chart.herm(u, u).real
         - chart.delta * a - chart.herm(b, u))
    return abs(c) ** 2 * x / 2 + chart.herm(shifted, shifted).real + 2 * abs(w) ** 2 / x


# ============= Unipotent elements =============

@dataclass(frozen=True)
class UnipotentElement:
    """(z, u) ↦ (z + ᵗT·u + X, u + S)"""
    S: Tuple[KElem, ...]
    T: Tuple[KElem, ...]
    X: KElem


def integral_unipotent(chart: CuspChart, s: Sequence[KElem], q_shift: int) -> UnipotentElement:
    """
    The element with S = δ_k·s, T = A·s̄ and X = δ_k(p + q·ω), 2p + q = ᵗsAs̄.
    """
    k = chart.k
    s = tuple(s)
    if len(s) != chart.n - 2:
        raise ValueError(f"s must have length {chart.n - 2}")
    sas = chart.lambda_lattice.norm_value(s) if s else 0
    if (sas - q_shift) % 2:
        raise ValueError(f"q_shift must have the parity of sAs̄ = {sas}")
    p = (sas - q_shift) // 2
    big_s = tuple(k.delta * x for x in s)
    big_t = tuple(
        sum((chart.lambda_gram[i][j] * s[j].conj() for j in range(len(s))), k.zero)
        for i in range(len(s))
    )
    big_x = k.delta * k.elem(p, q_shift)
    return UnipotentElement(big_s, big_t, big_x)


def unipotent_action(chart: CuspChart, gamma: UnipotentElement, h: DomainPoint) -> DomainPoint:
    k = chart.k
    t = _embed_vec(k, gamma.T)
    s = _embed_vec(k, gamma.S)
    u = h.u_vec
    shift = complex(t @ u) if len(u) else 0j
    z = h.z + shift + k.embed(gamma.X)
    return DomainPoint(z, tuple(complex(x) for x in u + s))


# ============= Lattice sums =============

@dataclass(frozen=True)
class GreenSplit:
    """Gr = bnd + int, with the truncation bound shared by both parts"""
    bnd: float
    int: float
    tail_bound: float
    radius: float
    terms: int

    @property
    def value(self) -> float:
        return stable_sum([self.bnd, self.int])


def _tail_bound(q: np.ndarray, radius: float, m: int, v: float) -> float:
    """
    Bound for Σ_{Q_h(f) > R} β₁(2πv(Q_h(f) − m)), summing shells of width 1/(2πv).

    Each shell holds at most count_bound(q, upper edge) lattice points and every
    term in it is at most e^{−x}/x at its lower edge.
    """
    step = 1 / (2 * pi * v)
    total = 0.0
    for j in count():
        lower = radius + j * step
        x = 2 * pi * v * (lower - m)
        term = count_bound(q, lower + step) * exp(-x) / x
        total += term
        if term <= 1e-17 * total or term < 1e-300 or j > 100000:
            break
    return total


def _basis_psi(chart: CuspChart, h: DomainPoint) -> np.ndarray:
    """Ψ of each of the 2n integer coordinate vectors (Ψ is real-linear in them)"""
    k = chart.k
    size = 2 * chart.n
    values = []
    for t in range(size):
        coords = [0] * size
        coords[t] = 1
        vec = chart.lattice.vector(coords)
        f = LatticeVectorCoords.from_integral(k, vec[0], vec[1:-1], vec[-1])
        values.append(psi(chart, f, h))
    return np.array(values, dtype=complex)


@log_failures("green_split")
def green_split(chart: CuspChart, params: GreenParams, h: DomainPoint) -> GreenSplit:
    """
    Gr^bnd (terms with c = 0) and Gr^int (c ≠ 0) from a single enumeration.
    """
    x_h = check_in_chart(chart, h)
    s_float, s_int, scale = chart._form
    w = _basis_psi(chart, h)
    gram = s_float + (2 / x_h) * np.real(np.outer(w, np.conj(w)))
    q, _ = ldl_coefficients(gram)

    radius = max(float(params.m), 0.0) + 1.0
    tail = _tail_bound(q, radius, params.m, params.v)
    while tail > params.tol:
        radius *= 1.5
        if radius > params.max_radius:
            raise TruncationCapError(
                f"enumeration radius {radius:.4g} exceeds max_radius {params.max_radius:.4g} "
                f"(tail bound still {tail:.3g})"
            )
        tail = _tail_bound(q, radius, params.m, params.v)
    logger.debug(f"green_split: xi={x_h:.6g} radius={radius:.4g} tail={tail:.3g}")

    floor_psi = params.divisor_floor * sqrt(x_h)
    target = params.m * scale
    size = 2 * chart.n
    bnd_terms: List[float] = []
    int_terms: List[float] = []
    with get_metrics().measure("green_split", {"m": params.m, "xi": round(x_h, 6)}):
        for vec in short_vectors(gram, radius):
            if form_value(s_int, vec) != target:
                continue
            value = complex(np.dot(w, vec))
            if abs(value) < floor_psi:
                raise DivisorProximityError(
                    f"|Psi_f| = {abs(value):.3g} is below the precision floor {floor_psi:.3g} "
                    f"for f = {vec}"
                )
            term = float(exp1(4 * pi * params.v * abs(value) ** 2 / x_h))
            if vec[size - 2] == 0 and vec[size - 1] == 0:
                bnd_terms.append(term)
            else:
                int_terms.append(term)
    return GreenSplit(
        bnd=stable_sum(bnd_terms),
        int=stable_sum(int_terms),
        tail_bound=tail,
        radius=radius,
        terms=len(bnd_terms) + len(int_terms),
    )


def green_full(chart: CuspChart, params: GreenParams, h: DomainPoint) -> Tuple[float, float]:
    """(Gr(h), bound on the omitted terms)"""
    split = green_split(chart, params, h)
    return split.value, split.tail_bound


# ============= ψ_m and the boundary-normalized pieces =============

def _eta_box(k: ImagQuadField, w: complex, radius: float) -> List[Tuple[int, int]]:
    """(x, y) with |w + δ_k(x + yω)| ≤ radius; δ_k(x + yω) = −d_k·y/2 + i√d_k(x + y/2)"""
    d, sd = k.d_k, k.sqrt_d
    ys = range(ceil(2 * (w.real - radius) / d) - 1, floor(2 * (w.real + radius) / d) + 2)
    points = []
    for y in ys:
        lo = (-w.imag - radius) / sd - y / 2
        hi = (-w.imag + radius) / sd - y / 2
        for x in range(ceil(lo) - 1, floor(hi) + 2):
            eta = complex(-d * y / 2, sd * (x + y / 2))
            if abs(w + eta) <= radius:
                points.append((x, y))
    return points


def log_psi_m(chart: CuspChart, m: int, h: DomainPoint, window: float, floor_abs: float = 1e-12) -> float:
    """
    log|ψ_m(h)|² for ψ_m = Π (Ψ_b(h) + η) over b ∈ Λ with ⟨b, b⟩ = m and
    η ∈ δ_k·O_k with |Ψ_b(h) + η| ≤ window.
    """
    if m <= 0 or chart.n == 2:
        return 0.0
    k = chart.k
    total = []
    for b in vectors_of_norm(chart.lambda_lattice, m):
        w = chart.herm(h.u_vec, _embed_vec(k, b))
        for x, y in _eta_box(k, w, window):
            value = w + k.embed(k.delta * k.elem(x, y))
            if abs(value) < floor_abs:
                raise DivisorProximityError(f"point lies on the boundary divisor (b = {b})")
            total.append(2 * log(abs(value)))
    return stable_sum(total)


def good_green(chart: CuspChart, params: GreenParams, h: DomainPoint, window: float) -> float:
    """Gr + log|ψ_m|² + (Ind(m)/(4πv))·log|q|²"""
    value, _ = green_full(chart, params, h)
    q = abs(q_coordinate(chart, h))
    return stable_sum([
        value,
        log_psi_m(chart, params.m, h, window),
        chart.ind(params.m) / (4 * pi * params.v) * log(q * q),
    ])


# ============= Boundary diagnostics =============

def ray_points(chart: CuspChart, ray: RaySpec) -> List[DomainPoint]:
    u = [complex(re, im) for re, im in ray.u]
    radii = np.geomspace(ray.q_start, ray.q_stop, ray.samples)
    return [point_at(chart, float(r), ray.z_real, u) for r in radii]


def _probe_row(chart: CuspChart, params: GreenParams, h: DomainPoint, window: float, ind: int) -> ProbeRow:
    abs_q = abs(q_coordinate(chart, h))
    try:
        x_h = xi(chart, h)
        split = green_split(chart, params, h)
        e_bnd = (log_psi_m(chart, params.m, h, window)
                 - ind * x_h / (4 * params.v * chart.volume) + split.bnd)
        return ProbeRow(abs_q=abs_q, xi=x_h, E_int=split.int, E_bnd=e_bnd, tail_bound=split.tail_bound)
    except DivisorProximityError as e:
        nan = float("nan")
        return ProbeRow(abs_q=abs_q, xi=nan, E_int=nan, E_bnd=nan, tail_bound=nan,
                        flagged=True, message=str(e))


def boundary_diagnostics(
    chart: CuspChart,
    params: GreenParams,
    ray: Sequence[DomainPoint],
    window: Optional[float] = None,
    threads: int = 1,
) -> BoundaryReport:
    """
    E_int and E_bnd along a ray with |q| decreasing, the fitted decay exponent of
    |E_int| against |q| and the spread of E_bnd over the last decade.
    """
    if not ray:
        raise DomainError("the ray has no sample points")
    window = window if window is not None else get_settings().psi_window
    ind = chart.ind(params.m)
    rows = ordered_map(lambda h: _probe_row(chart, params, h, window, ind), list(ray), threads)

    valid = [r for r in rows if not r.flagged]
    if not valid:
        raise DivisorProximityError("every sample of the ray lies on the divisor")

    decaying = [r for r in valid if r.E_int > 0]
    exponent = None
    if len(decaying) >= 2:
        slope, _ = np.polyfit(np.log([r.abs_q for r in decaying]), np.log([r.E_int for r in decaying]), 1)
        exponent = float(slope)

    q_min = min(r.abs_q for r in valid)
    last_decade = [r.E_bnd for r in valid if r.abs_q <= 10 * q_min]
    variation = float(max(last_decade) - min(last_decade))
    tail_total = stable_sum(r.tail_bound for r in valid)

    if len(valid) < 3:
        verdict = Verdict.INCONCLUSIVE
    elif (exponent is not None and exponent <= 0) or variation > BND_VARIATION_LIMIT:
        verdict = Verdict.UNBOUNDED
    else:
        verdict = Verdict.BOUNDED
    logger.info(
        f"Boundary probe m={params.m} v={params.v}: Ind={ind}, exponent={exponent}, "
        f"variation={variation:.3g}, verdict={verdict.value}"
    )
    return BoundaryReport(
        m=params.m, v=params.v, ind=ind, rows=rows, decay_exponent=exponent,
        bnd_variation=variation, tail_total=tail_total, verdict=verdict,
    )


# ============= Theta estimates =============

def _theta_sums(k: ImagQuadField, w: complex, xi_v: float, digits: int) -> Tuple:
    """Gaussian sums over η ∈ δ_k·O_k in mpmath, truncated where exp(−|w+η|²/ξ_v) < 10^{−digits−5}"""
    with mpmath.workdps(digits):
        cutoff = (digits + 5) * log(10)
        radius = sqrt(cutoff * xi_v) + 1
        d = mpmath.mpf(k.d_k)
        sd = mpmath.sqrt(d)
        wm = mpmath.mpc(w.real, w.imag)
        xv = mpmath.mpf(xi_v)
        mass = mpmath.mpf(0)
        first = mpmath.mpc(0)
        second = mpmath.mpf(0)
        reciprocal = mpmath.mpc(0)
        for x, y in _eta_box(k, w, radius):
            eta = mpmath.mpc(-d * y / 2, sd * (x + mpmath.mpf(y) / 2))
            t = wm + eta
            n2 = abs(t) ** 2
            g = mpmath.exp(-n2 / xv)
            mass += g
            first += g * t
            second += g * n2
            if (x, y) != (0, 0) and n2 > 0:
                reciprocal += g / t
        vol = d ** mpmath.mpf(1.5) / 2
        return (mass - mpmath.pi * xv / vol, first, second - mpmath.pi * xv ** 2 / vol, reciprocal)


def theta_check(
    chart: CuspChart,
    f: LatticeVectorCoords,
    h: DomainPoint,
    k_exp: int,
    xi_values: Sequence[float],
    digits: Optional[int] = None,
) -> ThetaReport:
    """
    Residuals of the Gaussian sums over δ_k·O_k shifted by Ψ_f(h), at each ξ_v, scaled by ξ_v^k.

    Only ξ_v varies; Ψ_f(h) is the fixed shift.
    """
    if not f.c.is_zero():
        raise ValueError("theta_check needs a boundary vector (c = 0)")
    digits = digits or get_settings().theta_precision_digits
    w = psi(chart, f, h)
    rows = []
    for xi_v in xi_values:
        if xi_v <= 1:
            raise DomainError(f"xi_v must exceed 1, got {xi_v}")
        mass, first, second, reciprocal = _theta_sums(chart.k, w, xi_v, digits)
        scale = xi_v ** k_exp
        rows.append(ThetaRow(
            xi_v=xi_v,
            mass_residual=float(mass),
            first_moment=float(abs(first)),
            second_moment_residual=float(second),
            reciprocal_sum=float(abs(reciprocal)),
            scaled_mass_residual=float(mass * scale),
            scaled_first_moment=float(abs(first) * scale),
            scaled_second_moment_residual=float(second * scale),
            reciprocal_ratio=float(abs(reciprocal) / log(xi_v)),
        ))

    worst = [
        max(abs(r.scaled_mass_residual), abs(r.scaled_first_moment), abs(r.scaled_second_moment_residual), 1e-300)
        for r in rows
    ]
    if len(rows) >= 2:
        slope, _ = np.polyfit(np.log2([r.xi_v for r in rows]), np.log10(worst), 1)
        half = worst[: len(worst) // 2 + 1]
        if worst[-1] <= max(half):
            verdict = Verdict.BOUNDED
        elif worst[-1] > 10 * max(half):
            verdict = Verdict.UNBOUNDED
        else:
            verdict = Verdict.INCONCLUSIVE
    else:
        slope, verdict = 0.0, Verdict.INCONCLUSIVE
    return ThetaReport(k_exp=k_exp, rows=rows, trend_slope=float(slope), verdict=verdict)
