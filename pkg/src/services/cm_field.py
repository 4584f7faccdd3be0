"""
Exact arithmetic in a totally real field F = Q[x]/(f) and in K = k·F.

F is given by a monic integer polynomial f with Z[θ] = O_F. Elements are
rational coordinate vectors in the power basis 1, θ, …, θ^{n−1}; ideals are
integer Hermite normal forms (columns spanning the lattice) over a common
denominator. Real places are isolated root intervals with rational endpoints
that are refined on demand, so every sign decision is exact.

Splitting in K/F is decided prime by prime from the residue field, which is
all the representation numbers ρ need.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from itertools import product
from math import gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from sympy import Matrix, Poly, Rational, Symbol, discriminant, factorint, primerange
from sympy.matrices.normalforms import hermite_normal_form
from sympy.polys.domains import QQ, ZZ
from sympy.polys.galoistools import gf_factor, gf_from_int_poly, gf_rem

from ..models.schemas import SplitType
from ..utils.metrics import get_metrics
from ..utils.resilience import FieldValidationError, NotIntegralError
from .base_field import ImagQuadField


X = Symbol("x")

Number = Union[int, Fraction]


def _rat(q: Fraction) -> Rational:
    return Rational(q.numerator, q.denominator)


def _frac(r) -> Fraction:
    r = Rational(r)
    return Fraction(int(r.p), int(r.q))


class TotallyRealField:
    """
    A monogenic totally real number field F = Q(θ), f(θ) = 0.

    Args:
        coeffs: Monic integer coefficients of f, highest degree first
        k: Optional base field; when given, disc_f must be coprime to d_k
    """

    def __init__(self, coeffs: Sequence[int], k: Optional[ImagQuadField] = None):
        coeffs = [int(c) for c in coeffs]
        if len(coeffs) < 2 or coeffs[0] != 1:
            raise FieldValidationError("f must be monic of degree at least 1")

        self.coeffs: Tuple[int, ...] = tuple(coeffs)
        self.poly = Poly(coeffs, X, domain=ZZ)
        self.poly_qq = Poly(coeffs, X, domain=QQ)
        self.n = self.poly.degree()

        if self.n > 1 and not self.poly.is_irreducible:
            raise FieldValidationError(f"f = {self.poly.as_expr()} is reducible over Q")
        if self.poly.count_roots() != self.n:
            raise FieldValidationError(f"f = {self.poly.as_expr()} is not totally real")

        self.disc_f = int(discriminant(self.poly)) if self.n > 1 else 1
        if self.disc_f % 2 == 0:
            raise FieldValidationError(f"disc(f) = {self.disc_f} is even")
        for p, e in factorint(abs(self.disc_f)).items():
            if e > 1 and not self._is_p_maximal(p):
                raise FieldValidationError(
                    f"Z[θ] is not maximal at p={p} (disc(f) = {self.disc_f}); "
                    "only monogenic fields with O_F = Z[θ] are supported"
                )
        if k is not None and gcd(self.disc_f, k.d_k) != 1:
            raise FieldValidationError(
                f"disc(f) = {self.disc_f} shares a factor with d_k = {k.d_k}"
            )

        if self.n == 1:
            root = Rational(-coeffs[1])
            self._intervals = ((root, root),)
        else:
            self._intervals = tuple(
                (Rational(s), Rational(t)) for (s, t), _ in self.poly.intervals()
            )

        logger.debug(f"Constructed F = Q[x]/({self.poly.as_expr()}), n={self.n}, disc={self.disc_f}")

    # ----- identity -----

    def __eq__(self, other) -> bool:
        return isinstance(other, TotallyRealField) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(("TotallyRealField", self.coeffs))

    def __repr__(self) -> str:
        return f"TotallyRealField({self.poly.as_expr()})"

    @property
    def degree(self) -> int:
        return self.n

    # ----- Dedekind criterion -----

    def _is_p_maximal(self, p: int) -> bool:
        """Dedekind's criterion: Z[θ] is p-maximal iff no repeated factor divides (f − Πg^e)/p"""
        _, factors = gf_factor(gf_from_int_poly(list(self.coeffs), p), p, ZZ)
        lifted = Poly(1, X, domain=ZZ)
        for g, e in factors:
            lifted = lifted * Poly(g, X, domain=ZZ) ** e
        diff = self.poly - lifted
        rest = [int(c) // p for c in diff.all_coeffs()]
        rest_p = gf_from_int_poly(rest, p)
        for g, e in factors:
            if e > 1 and not gf_rem(rest_p, g, p, ZZ):
                return False
        return True

    # ----- elements -----

    def elem(self, coords: Sequence[Number]) -> "FElem":
        coords = list(coords) + [0] * (self.n - len(coords))
        if len(coords) != self.n:
            raise ValueError(f"expected at most {self.n} coordinates, got {len(coords)}")
        return FElem(tuple(Fraction(c) for c in coords), self)

    def from_poly(self, poly: Poly) -> "FElem":
        r = poly.rem(self.poly_qq) if poly.degree() >= self.n else poly
        cs = [_frac(c) for c in reversed(r.all_coeffs())]
        return self.elem(cs)

    @property
    def one(self) -> "FElem":
        return self.elem([1])

    @property
    def theta(self) -> "FElem":
        if self.n == 1:
            return self.elem([-self.coeffs[1]])
        return self.elem([0, 1])

    def theta_power(self, j: int) -> "FElem":
        if self.n == 1:
            return self.elem([Fraction(-self.coeffs[1]) ** j])
        return self.from_poly(Poly(X ** j, X, domain=QQ))

    @lru_cache(maxsize=None)
    def f_prime(self) -> "FElem":
        return self.from_poly(self.poly_qq.diff(X))

    @lru_cache(maxsize=None)
    def trace_matrix(self) -> Matrix:
        """T_ij = Tr(θ^{i+j})"""
        traces = [self.theta_power(j).trace() for j in range(2 * self.n - 1)]
        return Matrix(self.n, self.n, lambda i, j: _rat(traces[i + j]))

    # ----- real places -----

    def root_interval(self, i: int, eps: Optional[Fraction] = None) -> Tuple[Rational, Rational]:
        """Isolating interval of the i-th real root (ascending), optionally refined to width < eps"""
        s, t = self._intervals[i]
        if eps is None or s == t:
            return s, t
        return self.poly.refine_root(s, t, eps=_rat(eps))

    @lru_cache(maxsize=None)
    def embeddings(self) -> np.ndarray:
        """Float values of θ at the n real places, ascending"""
        values = []
        for i in range(self.n):
            s, t = self.root_interval(i, eps=Fraction(1, 10 ** 30))
            values.append(float((s + t) / 2))
        return np.array(values)

    def sign_at(self, alpha: "FElem", i: int) -> int:
        """Exact sign of α at the i-th real place, by refining the root interval"""
        g = alpha.as_poly()
        if g.is_zero:
            return 0
        s, t = self._intervals[i]
        if s == t:
            value = _frac(g.eval(s))
            return (value > 0) - (value < 0)
        while g.count_roots(s, t) > 0:
            s, t = self.poly.refine_root(s, t, eps=(t - s) / 4)
        value = g.eval(s)
        return 1 if value > 0 else -1

    def signs(self, alpha: "FElem") -> Tuple[int, ...]:
        return tuple(self.sign_at(alpha, i) for i in range(self.n))

    def embed(self, alpha: "FElem") -> np.ndarray:
        coeffs = [float(c) for c in reversed(alpha.coords)]
        return np.polyval(coeffs, self.embeddings())

    # ----- ideals and primes -----

    def ideal(self, generators: Iterable["FElem"]) -> "FracIdealF":
        return FracIdealF.from_generators(self, list(generators))

    def principal(self, alpha: "FElem") -> "FracIdealF":
        return FracIdealF.from_generators(self, [alpha])

    @lru_cache(maxsize=None)
    def unit_ideal(self) -> "FracIdealF":
        return self.principal(self.one)

    @lru_cache(maxsize=None)
    def factor_prime(self, p: int) -> Tuple["PrimeIdealF", ...]:
        """Primes of F above p, via Dedekind's factorization of f mod p"""
        _, factors = gf_factor(gf_from_int_poly(list(self.coeffs), p), p, ZZ)
        ordered = sorted(factors, key=lambda ge: (len(ge[0]), [int(c) for c in ge[0]]))
        primes = []
        for index, (g, e) in enumerate(ordered):
            g_int = tuple(int(c) for c in g)
            g_elem = self.from_poly(Poly(list(g_int), X, domain=QQ))
            gens = [self.elem([p])] + [g_elem]
            ideal = self.ideal(gens)
            primes.append(PrimeIdealF(
                p=p, g=g_int, e=e, f_deg=len(g_int) - 1, index=index,
                hnf=ideal.basis, field_coeffs=self.coeffs,
            ))
        return tuple(primes)

    @lru_cache(maxsize=None)
    def prime_ideal(self, P: "PrimeIdealF") -> "FracIdealF":
        return FracIdealF(self, P.hnf, 1)

    @lru_cache(maxsize=None)
    def prime_power(self, P: "PrimeIdealF", k: int) -> "FracIdealF":
        if k == 0:
            return self.unit_ideal()
        if k < 0:
            return self.prime_power(P, -k).inverse()
        return self.prime_power(P, k - 1) * self.prime_ideal(P)


@dataclass(frozen=True, eq=False)
class FElem:
    """An element of F in the power basis"""
    coords: Tuple[Fraction, ...]
    field: TotallyRealField

    def _coerce(self, other) -> "FElem":
        if isinstance(other, FElem):
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.elem([other])
        return NotImplemented

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.coords == other.coords

    def __hash__(self) -> int:
        return hash(self.coords)

    def __add__(self, other) -> "FElem":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return FElem(tuple(a + b for a, b in zip(self.coords, other.coords)), self.field)

    __radd__ = __add__

    def __neg__(self) -> "FElem":
        return FElem(tuple(-a for a in self.coords), self.field)

    def __sub__(self, other) -> "FElem":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __mul__(self, other) -> "FElem":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.field.n == 1:
            return self.field.elem([self.coords[0] * other.coords[0]])
        return self.field.from_poly(self.as_poly() * other.as_poly())

    __rmul__ = __mul__

    def inverse(self) -> "FElem":
        if self.is_zero():
            raise ZeroDivisionError("division by zero in F")
        if self.field.n == 1:
            return self.field.elem([1 / self.coords[0]])
        return self.field.from_poly(self.as_poly().invert(self.field.poly_qq))

    def __truediv__(self, other) -> "FElem":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def as_poly(self) -> Poly:
        return Poly([_rat(c) for c in reversed(self.coords)], X, domain=QQ)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coords)

    def mult_matrix(self) -> List[List[Fraction]]:
        """Matrix of y ↦ α·y on the power basis (column j = α·θ^j)"""
        cols = [(self * self.field.theta_power(j)).coords for j in range(self.field.n)]
        return [[cols[j][i] for j in range(self.field.n)] for i in range(self.field.n)]

    def trace(self) -> Fraction:
        m = self.mult_matrix()
        return sum((m[i][i] for i in range(self.field.n)), Fraction(0))

    def norm(self) -> Fraction:
        if self.field.n == 1:
            return self.coords[0]
        return _frac(self.field.poly_qq.resultant(self.as_poly()))

    def __repr__(self) -> str:
        terms = [f"{c}·θ^{i}" for i, c in enumerate(self.coords) if c != 0]
        return " + ".join(terms) if terms else "0"


@dataclass(frozen=True)
class PrimeIdealF:
    """The prime (p, g(θ)) of O_F"""
    p: int
    g: Tuple[int, ...]
    e: int
    f_deg: int
    index: int
    hnf: Tuple[Tuple[int, ...], ...]
    field_coeffs: Tuple[int, ...]

    @property
    def norm(self) -> int:
        return self.p ** self.f_deg

    def __repr__(self) -> str:
        return f"P({self.p}, #{self.index}, e={self.e}, f={self.f_deg})"


class FracIdealF:
    """
    A fractional ideal (1/denominator)·I with I spanned by the columns of ``basis``.

    The representation is canonical: ``basis`` is in Hermite normal form and the
    denominator is minimal, so two ideals are equal iff their data are equal.
    """

    def __init__(self, field: TotallyRealField, basis: Tuple[Tuple[int, ...], ...], denominator: int):
        self.field = field
        self.basis = basis
        self.denominator = denominator

    @classmethod
    def from_generators(cls, field: TotallyRealField, generators: List[FElem]) -> "FracIdealF":
        """The O_F-module generated by ``generators``"""
        if not generators or all(g.is_zero() for g in generators):
            raise ValueError("the zero ideal is not a fractional ideal")
        n = field.n
        columns = []
        for g in generators:
            for j in range(n):
                columns.append((g * field.theta_power(j)).coords)
        den = reduce(lambda a, b: a * b // gcd(a, b), (c.denominator for col in columns for c in col), 1)
        int_cols = [[int(c * den) for c in col] for col in columns]
        return cls._normalize(field, int_cols, den)

    @classmethod
    def from_z_columns(cls, field: TotallyRealField, columns: List[List[Fraction]]) -> "FracIdealF":
        """The Z-module spanned by rational columns (caller guarantees it is an O_F-module)"""
        den = reduce(lambda a, b: a * b // gcd(a, b), (Fraction(c).denominator for col in columns for c in col), 1)
        int_cols = [[int(Fraction(c) * den) for c in col] for col in columns]
        return cls._normalize(field, int_cols, den)

    @classmethod
    def _normalize(cls, field: TotallyRealField, int_cols: List[List[int]], den: int) -> "FracIdealF":
        n = field.n
        gens = Matrix(n, len(int_cols), lambda i, j: int_cols[j][i])
        h = hermite_normal_form(gens)
        if h.shape != (n, n):
            raise ValueError("generators do not span a full-rank lattice")
        entries = [int(v) for v in h]
        content = reduce(gcd, entries, 0)
        common = gcd(content, den)
        den //= common
        basis = tuple(tuple(int(h[i, j]) // common for j in range(n)) for i in range(n))
        return cls(field, basis, den)

    # ----- identity -----

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FracIdealF)
            and self.field == other.field
            and self.basis == other.basis
            and self.denominator == other.denominator
        )

    def __hash__(self) -> int:
        return hash((self.basis, self.denominator))

    def __repr__(self) -> str:
        return f"FracIdealF(norm={self.norm()}, den={self.denominator})"

    # ----- structure -----

    def matrix(self) -> Matrix:
        return Matrix(self.basis)

    def basis_elements(self) -> List[FElem]:
        n = self.field.n
        return [
            self.field.elem([Fraction(self.basis[i][j], self.denominator) for i in range(n)])
            for j in range(n)
        ]

    def norm(self) -> Fraction:
        return Fraction(abs(int(self.matrix().det())), self.denominator ** self.field.n)

    def is_integral(self) -> bool:
        return self.denominator == 1

    def contains(self, alpha: FElem) -> bool:
        target = Matrix([_rat(c * self.denominator) for c in alpha.coords])
        y = self.matrix().LUsolve(target)
        return all(v.is_integer for v in y)

    def __le__(self, other: "FracIdealF") -> bool:
        return all(other.contains(b) for b in self.basis_elements())

    # ----- arithmetic -----

    def __mul__(self, other: "FracIdealF") -> "FracIdealF":
        products = [a * b for a in self.basis_elements() for b in other.basis_elements()]
        return FracIdealF.from_z_columns(self.field, [list(p.coords) for p in products])

    def scale(self, alpha: FElem) -> "FracIdealF":
        return self * self.field.principal(alpha)

    def inverse(self) -> "FracIdealF":
        """a⁻¹ = 𝔡_F · a^∨, with a^∨ the dual of a under the trace form"""
        n = self.field.n
        b = Matrix(n, n, lambda i, j: Rational(self.basis[i][j], self.denominator))
        dual = (b.T * self.field.trace_matrix()).inv()
        fp = self.field.f_prime()
        gens = []
        for j in range(n):
            d = self.field.elem([_frac(dual[i, j]) for i in range(n)])
            gens.append(list((fp * d).coords))
        return FracIdealF.from_z_columns(self.field, gens)

    def __truediv__(self, other: "FracIdealF") -> "FracIdealF":
        return self * other.inverse()

    def integral_part(self) -> Tuple["FracIdealF", int]:
        """(I, D) with self = I / D and I integral"""
        return FracIdealF(self.field, self.basis, 1), self.denominator


def new_real_field(coeffs: Sequence[int], k: Optional[ImagQuadField] = None) -> TotallyRealField:
    """Validated totally real field F = Q[x]/(f); coefficients highest degree first"""
    return TotallyRealField(coeffs, k)


def factor_prime(F: TotallyRealField, p: int) -> List[PrimeIdealF]:
    """Primes of F above the rational prime p (Σ e·f_deg = n)"""
    return list(F.factor_prime(p))


def different(F: TotallyRealField) -> FracIdealF:
    """𝔡_F = (f′(θ))"""
    return F.principal(F.f_prime())


def inverse_different(F: TotallyRealField) -> FracIdealF:
    return F.principal(F.f_prime().inverse())


def split_type(k: ImagQuadField, P: PrimeIdealF) -> SplitType:
    """
    Behaviour of P in K = F(√−d_k).

    Ramified iff p | d_k. For odd p the residue field test is Euler's criterion
    on −d_k; since −d_k lies in the prime field, the exponentiation stays in Z/p.
    At p = 2 the extension is generated by a root of x² − x + (1 + d_k)/4, which
    splits over F_{2^f} iff d_k ≡ 7 mod 8 or f is even.
    """
    p = P.p
    if k.d_k % p == 0:
        return SplitType.RAMIFIED
    if p == 2:
        if k.d_k % 8 == 7 or P.f_deg % 2 == 0:
            return SplitType.SPLIT
        return SplitType.INERT
    if pow(-k.d_k % p, (p ** P.f_deg - 1) // 2, p) == 1:
        return SplitType.SPLIT
    return SplitType.INERT


def local_rho(kind: SplitType, order: int) -> int:
    """Number of O_K-ideals of relative norm P^order above a prime of the given type"""
    if order < 0:
        return 0
    if kind is SplitType.SPLIT:
        return order + 1
    if kind is SplitType.INERT:
        return 1 if order % 2 == 0 else 0
    return 1


def rho_from_factorization(k: ImagQuadField, factorization: Dict[PrimeIdealF, int]) -> int:
    """ρ of the ideal Π P^{e_P}; zero as soon as one exponent is negative"""
    result = 1
    for P in sorted(factorization, key=lambda q: (q.p, q.index)):
        result *= local_rho(split_type(k, P), factorization[P])
        if result == 0:
            return 0
    return result


def ord(P: PrimeIdealF, a: Union[FracIdealF, FElem], F: Optional[TotallyRealField] = None) -> int:
    """
    P-adic valuation of a fractional ideal or a nonzero element.

    The integral part is divided by P while it stays inside P (HNF membership);
    the denominator contributes e·v_p(D).
    """
    if isinstance(a, FElem):
        if a.is_zero():
            raise ValueError("ord of the zero element is undefined")
        F = a.field
        a = F.principal(a)
    F = F or a.field
    integral, den = a.integral_part()
    valuation = 0
    while True:
        nxt = F.prime_power(P, valuation + 1)
        if not integral <= nxt:
            break
        valuation += 1
    v_den = 0
    d = den
    while d % P.p == 0:
        d //= P.p
        v_den += 1
    return valuation - P.e * v_den


def factor_ideal(F: TotallyRealField, a: FracIdealF) -> Dict[PrimeIdealF, int]:
    """{P: ord_P(a)} over all primes where the valuation is nonzero"""
    integral, den = a.integral_part()
    num = int(integral.norm())
    support = set(factorint(num)) | set(factorint(den))
    result = {}
    for p in sorted(support):
        for P in F.factor_prime(p):
            v = ord(P, a, F)
            if v:
                result[P] = v
    return result


def factor_element(F: TotallyRealField, beta: FElem) -> Dict[PrimeIdealF, int]:
    """Factorization of the principal ideal (β) for an integral nonzero β"""
    if not beta.is_integral():
        raise NotIntegralError(f"{beta} is not in O_F")
    num = abs(int(beta.norm()))
    result = {}
    principal = None
    for p in sorted(factorint(num)):
        for P in F.factor_prime(p):
            if principal is None:
                principal = F.principal(beta)
            v = ord(P, principal, F)
            if v:
                result[P] = v
    return result


def rho(k: ImagQuadField, F: TotallyRealField, a: FracIdealF) -> int:
    """ρ(a) = #{𝔅 ⊂ O_K : 𝔅𝔅̄ = a·O_K}; zero for non-integral a"""
    if not a.is_integral():
        return 0
    return rho_from_factorization(k, factor_ideal(F, a))


def ramified_place_count(k: ImagQuadField, F: TotallyRealField) -> int:
    """n real places plus the finite primes of F dividing d_k"""
    finite = sum(len(F.factor_prime(p)) for p in factorint(k.d_k))
    return F.n + finite


def norm_rel_disc(k: ImagQuadField, F: TotallyRealField) -> int:
    """N(d_{K/F}) = d_k^n when disc_f and d_k are coprime"""
    if gcd(F.disc_f, k.d_k) != 1:
        raise FieldValidationError("disc(f) and d_k must be coprime")
    return k.d_k ** F.n


# ============= Trace slices of the inverse different =============

@lru_cache(maxsize=None)
def inverse_different_basis(F: TotallyRealField) -> Tuple[Tuple[FElem, ...], np.ndarray]:
    """Z-basis θ^i/f′(θ) of 𝔡_F⁻¹ and the float matrix of its embeddings"""
    inv = F.f_prime().inverse()
    basis = tuple(inv * F.theta_power(i) for i in range(F.n))
    traces = [b.trace() for b in basis]
    # Euler: Tr(θ^i/f′(θ)) vanishes except for i = n−1, where it is 1
    if traces != [0] * (F.n - 1) + [1]:
        raise ArithmeticError(f"unexpected traces of the inverse different basis: {traces}")
    embedded = np.column_stack([F.embed(b) for b in basis]) if F.n > 1 else np.array([[1.0]])
    return basis, embedded


def _slice_candidates(
    F: TotallyRealField, m: int, lower: np.ndarray, upper: np.ndarray
) -> List[Tuple[int, ...]]:
    """Integer coordinates x (x_{n−1} = m) whose embeddings may lie in the box [lower, upper]"""
    _, embedded = inverse_different_basis(F)
    n = F.n
    if n == 1:
        return [(m,)]
    inv = np.linalg.inv(embedded)
    ranges = []
    for i in range(n - 1):
        row = inv[i]
        lo = float(np.sum(np.minimum(row * lower, row * upper)))
        hi = float(np.sum(np.maximum(row * lower, row * upper)))
        ranges.append(range(int(np.floor(lo - 1e-7)), int(np.ceil(hi + 1e-7)) + 1))
    candidates = []
    for head in product(*ranges):
        x = np.array(head + (m,), dtype=float)
        sigma = embedded @ x
        if np.all(sigma >= lower - 1e-7) and np.all(sigma <= upper + 1e-7):
            candidates.append(tuple(head) + (m,))
    return candidates


def _element_from_coords(F: TotallyRealField, x: Sequence[int]) -> FElem:
    basis, _ = inverse_different_basis(F)
    total = F.elem([0])
    for xi, b in zip(x, basis):
        if xi:
            total = total + b * xi
    return total


def enumerate_totally_positive(F: TotallyRealField, m: int) -> List[FElem]:
    """
    {α ∈ 𝔡_F⁻¹ : α ≫ 0, Tr α = m}, each member re-verified exactly.

    Returned in a canonical order (sorted by coordinates).
    """
    if m <= 0:
        return []
    with get_metrics().measure("enumerate_totally_positive", {"m": m, "n": F.n}):
        lower = np.zeros(F.n)
        upper = np.full(F.n, float(m))
        found = []
        for x in _slice_candidates(F, m, lower, upper):
            alpha = _element_from_coords(F, x)
            if alpha.is_zero() or alpha.trace() != m:
                continue
            if all(s > 0 for s in F.signs(alpha)):
                found.append(alpha)
        found = sorted(set(found), key=lambda a: a.coords)
    logger.debug(f"{len(found)} totally positive α of trace {m} in 𝔡⁻¹")
    return found


def enumerate_F_minus(F: TotallyRealField, m: int, T: float) -> List[Tuple[FElem, int]]:
    """
    {(α, j) : α ∈ 𝔡_F⁻¹, Tr α = m, α negative exactly at place j, |σ_j(α)| ≤ T}.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    found: Dict[FElem, int] = {}
    with get_metrics().measure("enumerate_F_minus", {"m": m, "T": T}):
        for j in range(F.n):
            lower = np.zeros(F.n)
            upper = np.full(F.n, float(m) + T)
            lower[j], upper[j] = -T, 0.0
            if F.n > 1 and m + T <= 0:
                continue
            for x in _slice_candidates(F, m, lower, upper):
                alpha = _element_from_coords(F, x)
                if alpha.is_zero() or alpha.trace() != m:
                    continue
                signs = F.signs(alpha)
                negatives = [i for i, s in enumerate(signs) if s < 0]
                if negatives != [j]:
                    continue
                if abs(F.embed(alpha)[j]) > T:
                    continue
                found[alpha] = j
    return sorted(found.items(), key=lambda item: item[0].coords)


# ============= Ideal enumeration (audits and oracles) =============

def integral_ideals_up_to(F: TotallyRealField, bound: int) -> List[Tuple[Dict[PrimeIdealF, int], int]]:
    """Every integral ideal of norm ≤ bound, as (factorization, norm), ordered by norm"""
    primes = []
    for p in primerange(2, bound + 1):
        for P in F.factor_prime(p):
            if P.norm <= bound:
                primes.append(P)
    primes.sort(key=lambda P: (P.norm, P.p, P.index))

    results: List[Tuple[Dict[PrimeIdealF, int], int]] = []

    def extend(start: int, current: Dict[PrimeIdealF, int], norm: int):
        results.append((dict(current), norm))
        for i in range(start, len(primes)):
            P = primes[i]
            if norm * P.norm > bound:
                break
            e = 1
            while norm * P.norm ** e <= bound:
                current[P] = e
                extend(i + 1, current, norm * P.norm ** e)
                e += 1
            current.pop(P, None)

    extend(0, {}, 1)
    results.sort(key=lambda item: (item[1], sorted((P.p, P.index, e) for P, e in item[0].items())))
    return results
