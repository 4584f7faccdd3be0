"""
Exact arithmetic in the imaginary quadratic field k = Q(√−d_k), d_k odd.

Elements are stored in the basis (1, ω) with ω = (1 + √−d_k)/2, so that
O_k = Z + Zω and ω² = ω − (1 + d_k)/4. Nothing in this module touches floating
point except ``embed``, which the Green function layer uses to move Gram
matrices into C.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from math import floor, sqrt
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from sympy import factorint

from ..utils.metrics import track_performance
from ..utils.resilience import FieldValidationError, LatticeError, NotIntegralError


Rational = Union[int, Fraction]

# Discriminants for which O_k is Euclidean with respect to the norm
NORM_EUCLIDEAN = frozenset({3, 7, 11})


@dataclass(frozen=True)
class ImagQuadField:
    """
    The base field k with odd fundamental discriminant −d_k.

    Construct it through ``new_field`` (or directly; validation runs either way).
    """
    d_k: int

    def __post_init__(self):
        d = self.d_k
        if not isinstance(d, int) or isinstance(d, bool) or d <= 0:
            raise FieldValidationError(f"d_k must be a positive integer, got {d!r}")
        if d % 2 == 0:
            raise FieldValidationError(
                f"d_k={d} is even: the discriminant of k must be odd "
                "(normal decompositions fail for even discriminants)"
            )
        if d % 4 != 3:
            raise FieldValidationError(f"d_k={d} is not congruent to 3 mod 4")
        if any(e > 1 for e in factorint(d).values()):
            raise FieldValidationError(f"d_k={d} is not squarefree")

    @property
    def omega_trace(self) -> int:
        return 1

    @property
    def omega_norm(self) -> int:
        return (1 + self.d_k) // 4

    @property
    def is_norm_euclidean(self) -> bool:
        return self.d_k in NORM_EUCLIDEAN

    def elem(self, a: Rational = 0, b: Rational = 0) -> "KElem":
        """The element a + bω"""
        return KElem(Fraction(a), Fraction(b), self)

    def parse(self, pair: Sequence[Rational]) -> "KElem":
        """Read an element from its config literal ``[a, b]``"""
        if len(pair) != 2:
            raise ValueError(f"an element of O_k is written [a, b], got {pair!r}")
        return self.elem(Fraction(pair[0]), Fraction(pair[1]))

    @cached_property
    def zero(self) -> "KElem":
        return self.elem(0, 0)

    @cached_property
    def one(self) -> "KElem":
        return self.elem(1, 0)

    @cached_property
    def omega(self) -> "KElem":
        return self.elem(0, 1)

    @cached_property
    def delta(self) -> "KElem":
        """δ_k = 2ω − 1 = √−d_k"""
        return self.elem(-1, 2)

    @cached_property
    def sqrt_d(self) -> float:
        return sqrt(self.d_k)

    def embed(self, x: "KElem") -> complex:
        """Image of x under the fixed embedding k → C with Im ω > 0"""
        return complex(float(x.a) + float(x.b) / 2, float(x.b) * self.sqrt_d / 2)

    def embed_matrix(self, rows: Sequence[Sequence["KElem"]]) -> np.ndarray:
        """Complex matrix of the embedded entries"""
        return np.array([[self.embed(x) for x in row] for row in rows], dtype=complex).reshape(
            len(rows), len(rows[0]) if rows else 0
        )

    @cached_property
    def units(self) -> Tuple["KElem", ...]:
        """All x ∈ O_k with N(x) = 1, in a fixed order"""
        # N(a + bω) = (a + b/2)² + d_k b²/4, so |b| ≤ 2/√d_k and |a| ≤ 2
        found = []
        for a, b in product(range(-2, 3), repeat=2):
            x = self.elem(a, b)
            if x.norm() == 1:
                found.append(x)
        return tuple(sorted(found, key=lambda u: (u.a, u.b)))

    def divmod(self, x: "KElem", y: "KElem") -> Tuple["KElem", "KElem"]:
        """
        Euclidean division in O_k: x = q·y + r with N(r) < N(y).

        Args:
            x: Dividend (integral)
            y: Nonzero divisor (integral)

        Returns:
            (q, r) with q, r ∈ O_k

        Raises:
            LatticeError: if k is not norm-Euclidean and no such q exists near x/y
        """
        if y.is_zero():
            raise ZeroDivisionError("division by zero in O_k")
        t = x / y
        best = None
        a0, b0 = floor(t.a), floor(t.b)
        for da, db in product((-1, 0, 1, 2), repeat=2):
            q = self.elem(a0 + da, b0 + db)
            r = x - q * y
            key = (r.norm(), abs(q.a), abs(q.b), q.a, q.b)
            if best is None or key < best[0]:
                best = (key, q, r)
        _, q, r = best
        if r.norm() >= y.norm():
            raise LatticeError(
                f"O_k is not norm-Euclidean for d_k={self.d_k}; "
                f"supported discriminants are {sorted(NORM_EUCLIDEAN)}"
            )
        return q, r

    def gcdex(self, x: "KElem", y: "KElem") -> Tuple["KElem", "KElem", "KElem"]:
        """Extended gcd: returns (g, s, t) with s·x + t·y = g"""
        r0, r1 = x, y
        s0, s1 = self.one, self.zero
        t0, t1 = self.zero, self.one
        while not r1.is_zero():
            q, r = self.divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, s0 - q * s1
            t0, t1 = t1, t0 - q * t1
        return r0, s0, t0

    def gcd_many(self, values: Sequence["KElem"]) -> Tuple["KElem", List["KElem"]]:
        """gcd of several elements with Bézout coefficients: Σ c_i·values_i = g"""
        g = self.zero
        coeffs = [self.zero] * len(values)
        for i, x in enumerate(values):
            if x.is_zero():
                continue
            g_new, s, t = self.gcdex(g, x)
            coeffs = [s * c for c in coeffs]
            coeffs[i] = coeffs[i] + t
            g = g_new
        return g, coeffs

    def is_unit(self, x: "KElem") -> bool:
        return x.is_integral() and x.norm() == 1

    def __repr__(self) -> str:
        return f"ImagQuadField(d_k={self.d_k})"


@dataclass(frozen=True, eq=False)
class KElem:
    """The element a + bω of k"""
    a: Fraction
    b: Fraction
    field: ImagQuadField

    def _coerce(self, other) -> "KElem":
        if isinstance(other, KElem):
            if other.field.d_k != self.field.d_k:
                raise ValueError("elements of different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return KElem(Fraction(other), Fraction(0), self.field)
        return NotImplemented

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self) -> int:
        # equal to a plain rational, so hash like one
        if self.is_rational():
            return hash(self.a)
        return hash((self.a, self.b, self.field.d_k))

    def __add__(self, other) -> "KElem":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return KElem(self.a + other.a, self.b + other.b, self.field)

    __radd__ = __add__

    def __neg__(self) -> "KElem":
        return KElem(-self.a, -self.b, self.field)

    def __sub__(self, other) -> "KElem":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return KElem(self.a - other.a, self.b - other.b, self.field)

    def __rsub__(self, other) -> "KElem":
        return -self + other

    def __mul__(self, other) -> "KElem":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        n = self.field.omega_norm
        a, b, c, e = self.a, self.b, other.a, other.b
        # ω² = ω − n
        return KElem(a * c - b * e * n, a * e + b * c + b * e, self.field)

    __rmul__ = __mul__

    def conj(self) -> "KElem":
        return KElem(self.a + self.b, -self.b, self.field)

    def norm(self) -> Fraction:
        return self.a * self.a + self.a * self.b + self.field.omega_norm * self.b * self.b

    def trace(self) -> Fraction:
        return 2 * self.a + self.b

    def inverse(self) -> "KElem":
        if self.is_zero():
            raise ZeroDivisionError("division by zero in k")
        n = self.norm()
        c = self.conj()
        return KElem(c.a / n, c.b / n, self.field)

    def __truediv__(self, other) -> "KElem":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other) -> "KElem":
        return self._coerce(other) * self.inverse()

    def exact_div(self, other: "KElem") -> "KElem":
        """Quotient in O_k; raises NotIntegralError when it is not integral"""
        q = self / other
        if not q.is_integral():
            raise NotIntegralError(f"{self} / {other} = {q} is not in O_k")
        return q

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_integral(self) -> bool:
        return self.a.denominator == 1 and self.b.denominator == 1

    def is_rational(self) -> bool:
        return self.b == 0

    def __complex__(self) -> complex:
        return self.field.embed(self)

    def as_pair(self) -> List:
        """Config literal [a, b]; integers stay integers"""
        return [_plain(self.a), _plain(self.b)]

    def __repr__(self) -> str:
        return f"({self.a}{'+' if self.b >= 0 else '-'}{abs(self.b)}ω)"


def _plain(x: Fraction):
    return int(x) if x.denominator == 1 else str(x)


def new_field(d_k: int) -> ImagQuadField:
    """Validated field descriptor for k = Q(√−d_k)"""
    k = ImagQuadField(d_k)
    logger.debug(f"Constructed {k} with ω-norm {k.omega_norm}")
    return k


@track_performance("class_number")
def class_number(k: ImagQuadField) -> int:
    """
    h(k) by counting reduced binary quadratic forms (a, b, c) of discriminant −d_k.

    Reduced means |b| ≤ a ≤ c, with b ≥ 0 whenever |b| = a or a = c. Since
    −d_k is fundamental, every such form is primitive.
    """
    d = k.d_k
    count = 0
    a = 1
    while 3 * a * a <= d:
        for b in range(-a + 1, a + 1):
            num = b * b + d
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a:
                continue
            if b < 0 and a == c:
                continue
            count += 1
        a += 1
    return count


def unit_count(k: ImagQuadField) -> int:
    """w(k): 6 for d_k = 3, else 2"""
    return len(k.units)


def elements_in_box(k: ImagQuadField, bound: int) -> Iterable[KElem]:
    """All a + bω with |a|, |b| ≤ bound"""
    for a, b in product(range(-bound, bound + 1), repeat=2):
        yield k.elem(a, b)
