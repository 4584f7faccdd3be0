"""
Free Hermitian O_k-lattices.

A lattice is O_k^r with the form ⟨x, y⟩ = ᵗx·G·ȳ for a Hermitian Gram matrix G
over O_k. Everything that decides a yes/no question (self-duality, isotropy,
block shapes) is exact; floating point only prunes candidate searches, and every
surviving candidate is re-checked in exact arithmetic.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import pi
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from sympy import Matrix, Rational, Symbol

from ..models.schemas import Signature
from ..utils.enumeration import form_value, integral_form, short_vectors
from ..utils.metrics import get_metrics
from ..utils.resilience import LatticeError
from .base_field import ImagQuadField, KElem


Vector = Tuple[KElem, ...]
KMatrix = Tuple[Tuple[KElem, ...], ...]


# ============= Matrices over k =============

def identity_matrix(k: ImagQuadField, r: int) -> KMatrix:
    return tuple(tuple(k.one if i == j else k.zero for j in range(r)) for i in range(r))


def mat_mul(k: ImagQuadField, x: Sequence[Sequence[KElem]], y: Sequence[Sequence[KElem]]) -> KMatrix:
    inner = len(y)
    cols = len(y[0]) if inner else 0
    return tuple(
        tuple(sum((row[t] * y[t][j] for t in range(inner)), k.zero) for j in range(cols))
        for row in x
    )


def conj_transpose(x: Sequence[Sequence[KElem]]) -> KMatrix:
    if not x:
        return ()
    return tuple(tuple(x[i][j].conj() for i in range(len(x))) for j in range(len(x[0])))


def _eliminate(k: ImagQuadField, matrix: Sequence[Sequence[KElem]], want_inverse: bool):
    """Gauss–Jordan over k; returns (det, inverse or None)"""
    r = len(matrix)
    a = [list(row) for row in matrix]
    inv = [list(row) for row in identity_matrix(k, r)]
    det = k.one
    for col in range(r):
        pivot = next((i for i in range(col, r) if not a[i][col].is_zero()), None)
        if pivot is None:
            return k.zero, None
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            inv[col], inv[pivot] = inv[pivot], inv[col]
            det = -det
        p = a[col][col]
        det = det * p
        p_inv = p.inverse()
        a[col] = [x * p_inv for x in a[col]]
        inv[col] = [x * p_inv for x in inv[col]]
        for i in range(r):
            if i != col and not a[i][col].is_zero():
                factor = a[i][col]
                a[i] = [x - factor * y for x, y in zip(a[i], a[col])]
                inv[i] = [x - factor * y for x, y in zip(inv[i], inv[col])]
    return det, (tuple(tuple(row) for row in inv) if want_inverse else None)


def kdet(k: ImagQuadField, matrix: Sequence[Sequence[KElem]]) -> KElem:
    if not matrix:
        return k.one
    det, _ = _eliminate(k, matrix, want_inverse=False)
    return det


def kinverse(k: ImagQuadField, matrix: Sequence[Sequence[KElem]]) -> KMatrix:
    if not matrix:
        return ()
    det, inv = _eliminate(k, matrix, want_inverse=True)
    if inv is None:
        raise LatticeError("matrix is singular")
    return inv


# ============= Lattices =============

@dataclass(frozen=True)
class HermLattice:
    """O_k^r with Gram matrix ``gram``"""
    k: ImagQuadField
    gram: KMatrix

    def __post_init__(self):
        r = len(self.gram)
        if any(len(row) != r for row in self.gram):
            raise LatticeError("Gram matrix must be square")
        for i in range(r):
            for j in range(r):
                x = self.gram[i][j]
                if not x.is_integral():
                    raise LatticeError(f"Gram entry ({i},{j}) = {x} is not in O_k")
                if x != self.gram[j][i].conj():
                    raise LatticeError(f"Gram matrix is not Hermitian at ({i},{j})")

    @property
    def rank(self) -> int:
        return len(self.gram)

    @classmethod
    def from_entries(cls, k: ImagQuadField, rank: int, entries: Sequence[Sequence[int]]) -> "HermLattice":
        """Build from row-major [a, b] pairs"""
        if len(entries) != rank * rank:
            raise LatticeError(f"expected {rank * rank} Gram entries, got {len(entries)}")
        rows = tuple(
            tuple(k.parse(entries[i * rank + j]) for j in range(rank)) for i in range(rank)
        )
        return cls(k, rows)

    @classmethod
    def diagonal(cls, k: ImagQuadField, values: Sequence[int]) -> "HermLattice":
        r = len(values)
        return cls(k, tuple(
            tuple(k.elem(values[i]) if i == j else k.zero for j in range(r)) for i in range(r)
        ))

    def inner(self, x: Sequence[KElem], y: Sequence[KElem]) -> KElem:
        """⟨x, y⟩ = ᵗx·G·ȳ"""
        total = self.k.zero
        for i, xi in enumerate(x):
            if xi.is_zero():
                continue
            for j, yj in enumerate(y):
                if not yj.is_zero():
                    total = total + xi * self.gram[i][j] * yj.conj()
        return total

    def norm_value(self, x: Sequence[KElem]) -> Fraction:
        value = self.inner(x, x)
        return value.a

    def vector(self, coords: Sequence[int]) -> Vector:
        """x_i = coords[2i] + coords[2i+1]·ω"""
        return tuple(self.k.elem(coords[2 * i], coords[2 * i + 1]) for i in range(self.rank))

    def embedded(self) -> np.ndarray:
        if self.rank == 0:
            return np.zeros((0, 0), dtype=complex)
        return self.k.embed_matrix(self.gram)

    def transform(self, u: Sequence[Sequence[KElem]]) -> "HermLattice":
        """The same form in the basis given by the rows of u"""
        return HermLattice(self.k, mat_mul(self.k, mat_mul(self.k, u, self.gram), conj_transpose(u)))

    def as_entries(self) -> List[List]:
        return [x.as_pair() for row in self.gram for x in row]


def trace_form(L: HermLattice) -> List[List[Fraction]]:
    """
    The rational 2r×2r matrix S with ⟨x, x⟩ = vᵀSv, where x_i = v_{2i} + v_{2i+1}·ω.
    """
    size = 2 * L.rank
    units = [tuple(1 if t == s else 0 for t in range(size)) for s in range(size)]
    diag = [L.norm_value(L.vector(e)) for e in units]
    s = [[Fraction(0)] * size for _ in range(size)]
    for i in range(size):
        s[i][i] = diag[i]
        for j in range(i + 1, size):
            both = tuple(a + b for a, b in zip(units[i], units[j]))
            value = (L.norm_value(L.vector(both)) - diag[i] - diag[j]) / 2
            s[i][j] = s[j][i] = value
    return s


def dual_basis(L: HermLattice) -> KMatrix:
    """
    Coordinates (rows) of the dual basis: ⟨b_i, b_j^∨⟩ = δ_ij.

    Row j is conj of column j of G⁻¹; the dual lattice equals L iff all rows are integral.
    """
    inv = kinverse(L.k, L.gram)
    r = L.rank
    return tuple(tuple(inv[i][j].conj() for i in range(r)) for j in range(r))


def check_self_dual(L: HermLattice) -> bool:
    """True iff the dual lattice equals L"""
    if L.rank == 0:
        return True
    det = kdet(L.k, L.gram)
    if det.is_zero():
        return False
    dual = dual_basis(L)
    self_dual = all(x.is_integral() for row in dual for x in row)
    if self_dual != L.k.is_unit(det):
        raise ArithmeticError(f"dual-lattice test disagrees with det = {det}")
    return self_dual


def _descartes(coeffs: Sequence[Rational]) -> int:
    signs = [c > 0 for c in coeffs if c != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _exact_signature(L: HermLattice) -> Signature:
    s = Matrix([[Rational(v.numerator, v.denominator) for v in row] for row in trace_form(L)])
    t = Symbol("t")
    poly = s.charpoly(t)
    coeffs = poly.all_coeffs()
    if coeffs[-1] == 0:
        raise LatticeError("Gram matrix is degenerate")
    pos = _descartes(coeffs)
    flipped = [c * (-1) ** (len(coeffs) - 1 - i) for i, c in enumerate(coeffs)]
    neg = _descartes(flipped)
    return Signature(pos=pos // 2, neg=neg // 2)


def signature(L: HermLattice) -> Signature:
    """
    Inertia of the Hermitian form.

    The eigenvalues of the embedded matrix decide unless one of them is too close
    to zero, in which case the sign pattern of the characteristic polynomial of the
    real trace form is read off exactly.
    """
    if L.rank == 0:
        return Signature(pos=0, neg=0)
    if kdet(L.k, L.gram).is_zero():
        raise LatticeError("Gram matrix is degenerate")
    eig = np.linalg.eigvalsh(L.embedded())
    scale = max(1.0, float(np.max(np.abs(eig))))
    if np.min(np.abs(eig)) > 1e-8 * scale:
        return Signature(pos=int(np.sum(eig > 0)), neg=int(np.sum(eig < 0)))
    logger.debug("Eigenvalues too close to zero; using the exact signature")
    return _exact_signature(L)


def is_positive_definite(L: HermLattice) -> bool:
    return L.rank == 0 or signature(L).neg == 0


def count_vectors(L: HermLattice, m: int) -> int:
    """#{x ∈ L : ⟨x, x⟩ = m} for positive definite L"""
    if not is_positive_definite(L):
        raise LatticeError("count_vectors needs a positive definite lattice")
    if m < 0:
        return 0
    if L.rank == 0:
        return 1 if m == 0 else 0
    s = trace_form(L)
    s_int, scale = integral_form(s)
    gram = np.array([[float(v) for v in row] for row in s])
    target = m * scale
    with get_metrics().measure("count_vectors", {"rank": L.rank, "m": m}):
        count = sum(1 for v in short_vectors(gram, float(m)) if form_value(s_int, v) == target)
    return count


def vectors_of_norm(L: HermLattice, m: int) -> List[Vector]:
    """The vectors counted by ``count_vectors``, in enumeration order"""
    if not is_positive_definite(L):
        raise LatticeError("vectors_of_norm needs a positive definite lattice")
    if m < 0:
        return []
    if L.rank == 0:
        return [()] if m == 0 else []
    s = trace_form(L)
    s_int, scale = integral_form(s)
    gram = np.array([[float(v) for v in row] for row in s])
    return [L.vector(v) for v in short_vectors(gram, float(m)) if form_value(s_int, v) == m * scale]


# ============= Euclidean reductions over O_k =============

def _require_euclidean(k: ImagQuadField, operation: str):
    if not k.is_norm_euclidean:
        raise LatticeError(
            f"{operation} needs a norm-Euclidean O_k (d_k in 3, 7, 11); got d_k={k.d_k}"
        )


def is_primitive(k: ImagQuadField, x: Sequence[KElem]) -> bool:
    g, _ = k.gcd_many(list(x))
    return k.is_unit(g)


def unimodular_completion(k: ImagQuadField, e: Sequence[KElem]) -> KMatrix:
    """
    An r×r matrix over O_k with first row e and unit determinant.

    Column operations reduce e to (g, 0, …, 0) while the inverse operations are
    applied to the rows of M, keeping e = x·M; e is primitive iff g is a unit.
    """
    _require_euclidean(k, "unimodular_completion")
    r = len(e)
    x = list(e)
    m = [list(row) for row in identity_matrix(k, r)]
    while True:
        nonzero = [i for i in range(r) if not x[i].is_zero()]
        if not nonzero:
            raise LatticeError("the zero vector has no completion")
        if len(nonzero) == 1:
            break
        i = min(nonzero, key=lambda t: (x[t].norm(), t))
        for j in nonzero:
            if j == i:
                continue
            q, rem = k.divmod(x[j], x[i])
            x[j] = rem
            m[i] = [a + q * b for a, b in zip(m[i], m[j])]
    i = nonzero[0]
    if i != 0:
        x[0], x[i] = x[i], x[0]
        m[0], m[i] = m[i], m[0]
    g = x[0]
    if not k.is_unit(g):
        raise LatticeError(f"vector is not primitive (content {g})")
    m[0] = [g * a for a in m[0]]
    completion = tuple(tuple(row) for row in m)
    if completion[0] != tuple(e):
        raise ArithmeticError("completion lost its first row")
    return completion


def hermite_reduce(k: ImagQuadField, rows: Iterable[Sequence[KElem]]) -> List[Vector]:
    """Echelon basis of the O_k-span of ``rows``; zero rows dropped"""
    _require_euclidean(k, "hermite_reduce")
    work = [list(row) for row in rows]
    if not work:
        return []
    width = len(work[0])
    pivot_row = 0
    for col in range(width):
        if pivot_row >= len(work):
            break
        while True:
            live = [i for i in range(pivot_row, len(work)) if not work[i][col].is_zero()]
            if not live:
                break
            best = min(live, key=lambda t: (work[t][col].norm(), t))
            work[pivot_row], work[best] = work[best], work[pivot_row]
            p = work[pivot_row][col]
            done = True
            for i in range(pivot_row + 1, len(work)):
                if work[i][col].is_zero():
                    continue
                q, _ = k.divmod(work[i][col], p)
                work[i] = [a - q * b for a, b in zip(work[i], work[pivot_row])]
                if not work[i][col].is_zero():
                    done = False
            if done:
                pivot_row += 1
                break
    return [tuple(row) for row in work if any(not x.is_zero() for x in row)]


def random_unimodular(
    k: ImagQuadField, r: int, rng: np.random.Generator, steps: int = 8
) -> Tuple[KMatrix, KMatrix]:
    """A random product of elementary and unit-scaling matrices with its exact inverse"""
    u = [list(row) for row in identity_matrix(k, r)]
    u_inv = [list(row) for row in identity_matrix(k, r)]
    units = k.units
    for _ in range(steps):
        if r > 1 and rng.random() < 0.8:
            i, j = (int(t) for t in rng.choice(r, size=2, replace=False))
            x = k.elem(int(rng.integers(-2, 3)), int(rng.integers(-2, 3)))
            # rows: u_i += x·u_j ; inverse columns: c_j −= x·c_i
            u[i] = [a + x * b for a, b in zip(u[i], u[j])]
            for row in u_inv:
                row[j] = row[j] - x * row[i]
        else:
            i = int(rng.integers(0, r))
            unit = units[int(rng.integers(0, len(units)))]
            u[i] = [unit * a for a in u[i]]
            for row in u_inv:
                row[i] = row[i] * unit.conj()
    return tuple(tuple(row) for row in u), tuple(tuple(row) for row in u_inv)


# ============= Isotropic summands =============

def _canonical(k: ImagQuadField, x: Vector) -> Tuple:
    return max(tuple((c.a, c.b) for c in (unit * t for t in x)) for unit in k.units)


def find_isotropic(L: HermLattice, search_bound: int) -> List[Vector]:
    """
    Primitive isotropic vectors with all coordinates a + bω, |a|, |b| ≤ search_bound,
    one per unit class, each verified to span a direct summand.
    """
    _require_euclidean(L.k, "find_isotropic")
    if search_bound < 1:
        raise ValueError("search_bound must be positive")
    sig = signature(L)
    if sig.pos == 0 or sig.neg == 0:
        return []

    k = L.k
    s = trace_form(L)
    s_int, _ = integral_form(s)
    s_float = np.array([[float(v) for v in row] for row in s])
    axis = np.arange(-search_bound, search_bound + 1)
    size = 2 * L.rank

    found: Dict[Tuple, Vector] = {}
    with get_metrics().measure("find_isotropic", {"rank": L.rank, "bound": search_bound}):
        grid = np.array(np.meshgrid(*([axis] * size), indexing="ij")).reshape(size, -1).T
        values = np.einsum("ni,ij,nj->n", grid, s_float, grid)
        for row in grid[np.abs(values) < 0.5]:
            v = tuple(int(t) for t in row)
            if not any(v) or form_value(s_int, v) != 0:
                continue
            x = L.vector(v)
            if not is_primitive(k, x):
                continue
            key = _canonical(k, x)
            if key in found:
                continue
            unimodular_completion(k, x)
            found[key] = tuple(k.elem(a, b) for a, b in key)
    result = [found[key] for key in sorted(found, key=lambda t: (max(max(abs(a), abs(b)) for a, b in t), t))]
    logger.debug(f"find_isotropic: {len(result)} unit classes at bound {search_bound}")
    return result


# ============= Normal decomposition =============

@dataclass(frozen=True)
class NormalDecomposition:
    """
    L = O_k·e ⊕ Λ ⊕ O_k·e′ with ⟨e, e′⟩ = 1, e and e′ isotropic, Λ = {e, e′}^⊥.

    ``basis_change`` has rows (e, λ_1, …, λ_{r−2}, e′) and carries G to ``gram``;
    ``chart_basis`` replaces e′ by −δ_k·e′, which gives the twisted block ``chart_gram``
    [[0, 0, δ_k], [0, A, 0], [−δ_k, 0, 0]] used by the cusp coordinates.
    """
    basis_change: KMatrix
    gram: KMatrix
    chart_basis: KMatrix
    chart_gram: KMatrix
    lambda_gram: KMatrix
    block_sizes: Tuple[int, int, int]

    @property
    def e(self) -> Vector:
        return self.basis_change[0]

    @property
    def e_prime(self) -> Vector:
        return self.basis_change[-1]


def normal_decomposition(L: HermLattice, e: Sequence[KElem]) -> NormalDecomposition:
    k = L.k
    _require_euclidean(k, "normal_decomposition")
    r = L.rank
    e = tuple(e)
    if len(e) != r:
        raise LatticeError(f"e has length {len(e)}, expected {r}")
    if not check_self_dual(L):
        raise LatticeError("normal decomposition needs a self-dual lattice")
    sig = signature(L)
    if sig.neg != 1:
        raise LatticeError(f"normal decomposition needs signature (r-1, 1), got {sig.as_tuple()}")
    if not L.inner(e, e).is_zero():
        raise LatticeError("e is not isotropic")
    if not is_primitive(k, e):
        raise LatticeError("e is not primitive")

    basis = identity_matrix(k, r)
    pairings = [L.inner(e, b) for b in basis]
    g, coeffs = k.gcd_many(pairings)
    if not k.is_unit(g):
        raise LatticeError(f"O_k·e is not a direct summand: ⟨e, L⟩ = ({g})")
    y = tuple((c / g).conj() for c in coeffs)

    t = L.inner(y, y)
    x = t * k.omega
    e_prime = tuple(yi - x * ei for yi, ei in zip(y, e))

    def project(v: Vector) -> Vector:
        a = L.inner(v, e_prime)
        b = L.inner(v, e)
        return tuple(vi - a * ei - b * fi for vi, ei, fi in zip(v, e, e_prime))

    lam = hermite_reduce(k, [project(b) for b in basis])
    if len(lam) != r - 2:
        raise ArithmeticError(f"orthogonal complement has rank {len(lam)}, expected {r - 2}")

    change = (e,) + tuple(lam) + (e_prime,)
    gram = L.transform(change).gram
    if not k.is_unit(kdet(k, change)):
        raise ArithmeticError("basis change is not unimodular")
    lambda_gram = tuple(tuple(row[1:r - 1]) for row in gram[1:r - 1])

    twist = -k.delta
    chart_basis = (e,) + tuple(lam) + (tuple(twist * c for c in e_prime),)
    chart_gram = L.transform(chart_basis).gram

    expected = block_gram(k, lambda_gram, twisted=False)
    if gram != expected:
        raise ArithmeticError("decomposed Gram matrix is not in block form")
    logger.debug(f"Normal decomposition of rank {r} lattice: Λ has rank {r - 2}")
    return NormalDecomposition(
        basis_change=change,
        gram=gram,
        chart_basis=chart_basis,
        chart_gram=chart_gram,
        lambda_gram=lambda_gram,
        block_sizes=(1, r - 2, 1),
    )


def block_gram(k: ImagQuadField, a: Sequence[Sequence[KElem]], twisted: bool = True) -> KMatrix:
    """[[0,0,δ_k],[0,A,0],[−δ_k,0,0]] (twisted) or [[0,0,1],[0,A,0],[1,0,0]]"""
    s = len(a)
    r = s + 2
    corner, other = (k.delta, -k.delta) if twisted else (k.one, k.one)
    rows = []
    for i in range(r):
        row = []
        for j in range(r):
            if i == 0 and j == r - 1:
                row.append(corner)
            elif i == r - 1 and j == 0:
                row.append(other)
            elif 0 < i < r - 1 and 0 < j < r - 1:
                row.append(a[i - 1][j - 1])
            else:
                row.append(k.zero)
        rows.append(tuple(row))
    return tuple(rows)


# ============= Cusp labels =============

@dataclass(frozen=True)
class CuspLabel:
    """Λ of a normal decomposition; the ideal tag is trivial for free lattices"""
    lam: HermLattice
    n_ideal_tag: str = "trivial"

    def __post_init__(self):
        if not check_self_dual(self.lam):
            raise LatticeError("cusp label Λ must be self-dual")
        if not is_positive_definite(self.lam):
            raise LatticeError("cusp label Λ must be positive definite")


def cusp_label(L: HermLattice, e: Sequence[KElem]) -> CuspLabel:
    decomposition = normal_decomposition(L, e)
    return CuspLabel(HermLattice(L.k, decomposition.lambda_gram))


def boundary_index(label: CuspLabel, m: int) -> int:
    """Ind(m) = #{f ∈ Λ : ⟨f, f⟩ = m}; zero for m < 0"""
    if m < 0:
        return 0
    return count_vectors(label.lam, m)


def boundary_multiplicity(label: CuspLabel, m: int, v: float) -> float:
    if v <= 0:
        raise ValueError("v must be positive")
    return boundary_index(label, m) / (4 * pi * v)


def ind_table(label: CuspLabel, ms: Iterable[int], v: Optional[float] = None) -> Dict[str, Dict]:
    table = {}
    for m in ms:
        entry = {"ind": boundary_index(label, m)}
        if v is not None:
            entry["multiplicity"] = entry["ind"] / (4 * pi * v)
        table[str(m)] = entry
    return table
