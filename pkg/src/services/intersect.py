"""
Closed-form intersection numbers of KR(m, v) with the CM cycle of K = k·F.

The finite part is an exact rational combination of log p, assembled from
ord and ρ data of the principal ideals α𝔡_F; the archimedean part is a β₁ sum
over the elements of trace m negative at exactly one place, truncated with an
explicit tail bound. The Eisenstein coefficient is read off from their total.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import exp, log, pi, sqrt
from typing import Dict, List, Optional, Tuple

import numpy as np
from loguru import logger
from sympy import primefactors

from ..config import get_settings
from ..models.schemas import IntersectionReport, PrimeCoefficient, SplitType
from ..utils.metrics import get_metrics, track_performance
from ..utils.parallel import ordered_map, stable_sum
from ..utils.resilience import TruncationCapError
from .base_field import ImagQuadField, class_number, unit_count
from .cm_field import (
    FElem,
    TotallyRealField,
    inverse_different_basis,
    enumerate_F_minus,
    enumerate_totally_positive,
    factor_element,
    norm_rel_disc,
    ramified_place_count,
    rho_from_factorization,
    split_type,
)
from .green import beta1


@dataclass
class FinitePart:
    """i_fin as Σ_p coefficient_p·log p, plus the same sum taken α by α"""
    terms: Dict[int, Fraction] = field(default_factory=dict)
    value: float = 0.0
    alpha_first: float = 0.0
    alpha_count: int = 0

    def as_coefficients(self) -> List[PrimeCoefficient]:
        return [
            PrimeCoefficient(prime=p, coefficient=str(c), value=float(c) * log(p))
            for p, c in sorted(self.terms.items())
        ]


@dataclass(frozen=True)
class ArchTerm:
    alpha: FElem
    place: int
    abs_value: float
    rho: int
    beta: float


@dataclass
class ArchPart:
    value: float
    tail_bound: float
    height: float
    terms: List[ArchTerm]


def _ramified_primes(k: ImagQuadField, F: TotallyRealField):
    return [P for p in primefactors(k.d_k) for P in F.factor_prime(p)]


def alpha_contributions(k: ImagQuadField, F: TotallyRealField, alpha: FElem) -> Dict[int, Fraction]:
    """
    Σ_𝔭 ord_𝔭(α𝔭𝔡_F)·ρ(α𝔭^{−ε}𝔡_F)·log N𝔭 for one α, grouped by the prime below 𝔭.

    Only primes dividing α𝔡_F or d_k can contribute: for any other nonsplit 𝔭
    (necessarily inert) α𝔭^{−1}𝔡_F is not integral, so its ρ factor vanishes.
    Coefficients carry the factor h(k)/w(k).
    """
    weight = Fraction(class_number(k), unit_count(k))
    beta = alpha * F.f_prime()
    factorization = factor_element(F, beta)
    candidates = set(factorization) | set(_ramified_primes(k, F))

    result: Dict[int, Fraction] = {}
    for P in sorted(candidates, key=lambda q: (q.p, q.index)):
        kind = split_type(k, P)
        if kind is SplitType.SPLIT:
            continue
        eps = 1 if kind is SplitType.INERT else 0
        order = factorization.get(P, 0) + 1
        shifted = dict(factorization)
        shifted[P] = shifted.get(P, 0) - eps
        rho = rho_from_factorization(k, shifted)
        if rho == 0:
            continue
        result[P.p] = result.get(P.p, Fraction(0)) + weight * P.f_deg * order * rho
    return result


@track_performance("i_fin")
def i_fin(k: ImagQuadField, F: TotallyRealField, m: int, threads: int = 1) -> FinitePart:
    """
    Finite intersection number, summed both by prime (exact coefficients) and by α.
    """
    alphas = enumerate_totally_positive(F, m)
    per_alpha = ordered_map(lambda a: alpha_contributions(k, F, a), alphas, threads)

    totals: Dict[int, Fraction] = {}
    for contribution in per_alpha:
        for p, c in contribution.items():
            totals[p] = totals.get(p, Fraction(0)) + c
    totals = {p: c for p, c in totals.items() if c != 0}

    by_prime = stable_sum(float(c) * log(p) for p, c in totals.items())
    by_alpha = stable_sum(
        sum(float(c) * log(p) for p, c in sorted(contribution.items()))
        for contribution in per_alpha
    )
    logger.debug(f"i_fin(m={m}): {len(alphas)} α, primes {sorted(totals)}")
    return FinitePart(terms=totals, value=by_prime, alpha_first=by_alpha, alpha_count=len(alphas))


def i_fin_by_prime(k: ImagQuadField, F: TotallyRealField, m: int, threads: int = 1) -> Dict[int, Fraction]:
    """Exact coefficient of log p in i_fin, for every p that occurs"""
    return i_fin(k, F, m, threads).terms


def _shell_count(F: TotallyRealField, m: int, place: int, t: float) -> float:
    """Upper bound for the number of α in the trace-m slice with σ_place(α) ∈ [−t−1, −t]"""
    _, embedded = inverse_different_basis(F)
    inv = np.linalg.inv(embedded)
    n = F.n
    widths = np.full(n, m + t + 1.0)
    widths[place] = 1.0
    total = 1.0
    for i in range(n - 1):
        total *= float(np.sum(np.abs(inv[i]) * widths)) + 3.0
    return total


def _arch_tail(k: ImagQuadField, F: TotallyRealField, m: int, v: float, height: float) -> float:
    """
    Bound for the terms with |α| > height.

    ρ(α𝔡_F) ≤ N(α𝔡_F) = |N α|·disc_f, and AM–GM bounds the positive places by
    ((m + |α|)/(n − 1))^{n−1}. For F = Q the only candidate is α = m.
    """
    weight = class_number(k) / unit_count(k)
    if F.n == 1:
        if m >= 0 or height >= -m:
            return 0.0
        x = 4 * pi * v * -m
        return weight * (1 - m) * exp(-x) / x
    total = 0.0
    for place in range(F.n):
        s = max(float(height), float(-m))
        while True:
            x = 4 * pi * v * s
            rho_max = (s + 1) * ((m + s + 1) / (F.n - 1)) ** (F.n - 1) * abs(F.disc_f)
            term = weight * _shell_count(F, m, place, s) * rho_max * exp(-x) / x
            total += term
            if term <= 1e-17 * total or term < 1e-300:
                break
            s += 1.0
    return total


def arch_terms(k: ImagQuadField, F: TotallyRealField, m: int, v: float, height: float,
               threads: int = 1) -> List[ArchTerm]:
    """Every α ∈ F_− of trace m with |α| ≤ height, with its ρ and β₁ factors"""
    found = enumerate_F_minus(F, m, height)

    def term(item: Tuple[FElem, int]) -> ArchTerm:
        alpha, place = item
        size = abs(float(F.embed(alpha)[place]))
        rho = rho_from_factorization(k, factor_element(F, alpha * F.f_prime()))
        return ArchTerm(alpha=alpha, place=place, abs_value=size, rho=rho,
                        beta=beta1(4 * pi * v * size) if rho else 0.0)

    return ordered_map(term, found, threads)


@track_performance("i_arch")
def i_arch(k: ImagQuadField, F: TotallyRealField, m: int, v: float, tol: float,
           threads: int = 1, max_height: Optional[float] = None) -> ArchPart:
    """(h/w)·Σ_{α ∈ F_−, Tr α = m} β₁(4πv|α|)·ρ(α𝔡_F), with the height chosen so the tail ≤ tol"""
    if v <= 0 or tol <= 0:
        raise ValueError("v and tol must be positive")
    cap = max_height if max_height is not None else get_settings().arch_max_height
    height = 1.0
    tail = _arch_tail(k, F, m, v, height)
    while tail > tol:
        height *= 2
        if height > cap:
            raise TruncationCapError(f"height {height:g} exceeds arch_max_height {cap:g} (tail {tail:.3g})")
        tail = _arch_tail(k, F, m, v, height)
    logger.debug(f"i_arch(m={m}, v={v}): height={height:g} tail={tail:.3g}")

    with get_metrics().measure("i_arch_terms", {"m": m, "v": v, "height": height}):
        terms = arch_terms(k, F, m, v, height, threads)
    weight = class_number(k) / unit_count(k)
    value = weight * stable_sum(t.rho * t.beta for t in terms)
    return ArchPart(value=value, tail_bound=tail, height=height, terms=terms)


def predicted_c_phi(total: float, h: int, w: int, r: int, rel_disc: int) -> float:
    """Solve total = −(h/w)·(√N(d_{K/F})/2^{r−1})·c_Φ for c_Φ"""
    return -total * w * 2 ** (r - 1) / (h * sqrt(rel_disc))


def total_and_prediction(k: ImagQuadField, F: TotallyRealField, m: int, v: float, tol: float,
                         threads: int = 1, max_height: Optional[float] = None) -> IntersectionReport:
    finite = i_fin(k, F, m, threads)
    arch = i_arch(k, F, m, v, tol, threads, max_height)
    h, w = class_number(k), unit_count(k)
    r = ramified_place_count(k, F)
    rel_disc = norm_rel_disc(k, F)
    total = stable_sum([finite.value, arch.value])
    return IntersectionReport(
        m=m,
        v=v,
        i_fin=finite.value,
        i_fin_terms=finite.as_coefficients(),
        i_fin_alpha_first=finite.alpha_first,
        i_arch=arch.value,
        i_arch_tail_bound=arch.tail_bound,
        total=total,
        predicted_c_phi=predicted_c_phi(total, h, w, r, rel_disc),
        r=r,
        norm_rel_disc=rel_disc,
        h_k=h,
        w_k=w,
        alpha_count=finite.alpha_count,
        arch_alpha_count=len(arch.terms),
        error_bound=arch.tail_bound,
    )
