"""
Tests for Hermitian lattices: duality, signatures, counts and normal decompositions
"""

from fractions import Fraction
from itertools import product
from math import pi

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.models.schemas import Signature
from src.services.base_field import new_field
from src.services.herm_lattice import (
    CuspLabel,
    HermLattice,
    block_gram,
    boundary_index,
    boundary_multiplicity,
    check_self_dual,
    count_vectors,
    cusp_label,
    find_isotropic,
    hermite_reduce,
    identity_matrix,
    ind_table,
    is_positive_definite,
    kdet,
    kinverse,
    mat_mul,
    normal_decomposition,
    random_unimodular,
    signature,
    trace_form,
    unimodular_completion,
    vectors_of_norm,
)
from src.utils.resilience import LatticeError


@pytest.fixture(scope="module")
def k3():
    return new_field(3)


def hyperbolic(k, extra=()):
    """H ⊕ diag(extra) with H = [[0, 1], [1, 0]]"""
    r = 2 + len(extra)
    rows = []
    for i in range(r):
        row = []
        for j in range(r):
            if {i, j} == {0, r - 1}:
                row.append(k.one)
            elif 0 < i < r - 1 and i == j:
                row.append(k.elem(extra[i - 1]))
            else:
                row.append(k.zero)
        rows.append(tuple(row))
    return HermLattice(k, tuple(rows))


def box_values(L, top):
    """Values of the trace form on a box containing the ellipsoid {⟨x, x⟩ ≤ top}, or None if too large"""
    s = np.array([[float(v) for v in row] for row in trace_form(L)])
    # max |x_i| on the ellipsoid is sqrt(top·(S⁻¹)_ii)
    radii = np.floor(np.sqrt(top * np.diag(np.linalg.inv(s)))).astype(int) + 1
    if np.prod(2 * radii + 1) > 2_000_000:
        return None
    grid = np.array(list(product(*[range(-r, r + 1) for r in radii])))
    return np.einsum("ni,ij,nj->n", grid, s, grid)


class TestConstruction:
    def test_from_entries(self, k3):
        L = HermLattice.from_entries(k3, 2, [[2, 0], [1, 1], [2, -1], [3, 0]])
        assert L.rank == 2
        assert L.gram[0][1] == k3.elem(1, 1)
        assert L.gram[1][0] == k3.elem(1, 1).conj()

    def test_non_hermitian_gram_is_rejected(self, k3):
        with pytest.raises(LatticeError, match="Hermitian"):
            HermLattice.from_entries(k3, 2, [[1, 0], [0, 1], [0, 1], [1, 0]])

    def test_non_integral_gram_is_rejected(self, k3):
        half = k3.elem(Fraction(1, 2))
        with pytest.raises(LatticeError, match="not in O_k"):
            HermLattice(k3, ((half,),))

    def test_trace_form_of_unit_lattice(self, k3):
        """Test N(a + bω) = a² + ab + b² for d_k = 3"""
        s = trace_form(HermLattice.diagonal(k3, [1]))
        assert s == [[1, Fraction(1, 2)], [Fraction(1, 2), 1]]


class TestDualityAndSignature:
    def test_self_duality(self, k3):
        assert check_self_dual(HermLattice.diagonal(k3, [1, 1, -1]))
        assert check_self_dual(hyperbolic(k3))
        assert not check_self_dual(HermLattice.diagonal(k3, [2, 1]))
        assert not check_self_dual(HermLattice.from_entries(k3, 2, [[2, 0], [1, 0], [1, 0], [2, 0]]))

    def test_signatures(self, k3):
        assert signature(HermLattice.diagonal(k3, [1, -1])) == Signature(pos=1, neg=1)
        assert signature(hyperbolic(k3, [1, 1])) == Signature(pos=3, neg=1)
        twisted = HermLattice(k3, block_gram(k3, ((k3.one,),), twisted=True))
        assert signature(twisted).as_tuple() == (2, 1)

    def test_degenerate_gram_has_no_signature(self, k3):
        L = HermLattice.from_entries(k3, 2, [[1, 0], [1, 0], [1, 0], [1, 0]])
        with pytest.raises(LatticeError, match="degenerate"):
            signature(L)

    def test_determinant_and_inverse(self, k3):
        g = ((k3.elem(2), k3.elem(1, 1)), (k3.elem(2, -1), k3.elem(3)))
        assert kdet(k3, g) == k3.elem(6) - k3.elem(1, 1) * k3.elem(2, -1)
        assert mat_mul(k3, g, kinverse(k3, g)) == identity_matrix(k3, 2)


class TestVectorCounts:
    @pytest.mark.parametrize("m,expected", [(0, 1), (1, 6), (2, 0), (3, 6), (4, 6), (7, 12)])
    def test_unit_lattice_counts(self, k3, m, expected):
        """Test the representation numbers of x² + xy + y²"""
        assert count_vectors(HermLattice.diagonal(k3, [1]), m) == expected

    def test_rank_two_identity(self, k3):
        L = HermLattice.diagonal(k3, [1, 1])
        assert count_vectors(L, 1) == 12
        assert count_vectors(L, 2) == 36

    def test_negative_norm_has_no_vectors(self, k3):
        assert count_vectors(HermLattice.diagonal(k3, [1, 2]), -4) == 0

    def test_indefinite_lattice_is_rejected(self, k3):
        with pytest.raises(LatticeError, match="positive definite"):
            count_vectors(HermLattice.diagonal(k3, [1, -1]), 1)

    def test_vectors_of_norm(self, k3):
        L = HermLattice.from_entries(k3, 2, [[2, 0], [1, 0], [1, 0], [2, 0]])
        vectors = vectors_of_norm(L, 2)
        assert len(vectors) == count_vectors(L, 2)
        assert all(L.inner(v, v) == k3.elem(2) for v in vectors)

    @pytest.mark.parametrize("d_k", [3, 7, 11])
    def test_counts_match_box_enumeration(self, d_k):
        """Test Fincke-Pohst counts on random definite lattices U·D·U* against a box scan"""
        k = new_field(d_k)
        rng = np.random.default_rng(d_k)
        checked = 0
        while checked < 9:
            rank = 1 + checked % 3
            top = {1: 50, 2: 16, 3: 4}[rank]
            diag = [int(v) for v in rng.integers(1, 4, size=rank)]
            u, _ = random_unimodular(k, rank, rng, steps=2)
            L = HermLattice.diagonal(k, diag).transform(u)
            assert is_positive_definite(L)
            values = box_values(L, top)
            if values is None:
                continue
            for m in range(0, top + 1):
                expected = int(np.sum(np.abs(values - m) < 1e-6))
                assert count_vectors(L, m) == expected, (d_k, checked, m)
            checked += 1

    def test_counts_are_unimodular_invariants(self, k3):
        L = HermLattice.from_entries(k3, 2, [[2, 0], [1, 1], [2, -1], [3, 0]])
        rng = np.random.default_rng(7)
        for _ in range(5):
            u, _ = random_unimodular(k3, 2, rng)
            moved = L.transform(u)
            for m in range(1, 8):
                assert count_vectors(moved, m) == count_vectors(L, m)


class TestEuclideanReductions:
    def test_random_unimodular_inverse(self, k3):
        u, u_inv = random_unimodular(k3, 3, np.random.default_rng(1))
        assert mat_mul(k3, u, u_inv) == identity_matrix(k3, 3)
        assert k3.is_unit(kdet(k3, u))

    def test_completion_of_primitive_vector(self, k3):
        e = (k3.elem(2, 1), k3.elem(1, 1), k3.elem(0, 3))
        m = unimodular_completion(k3, e)
        assert m[0] == e
        assert k3.is_unit(kdet(k3, m))

    def test_completion_rejects_imprimitive_vector(self, k3):
        with pytest.raises(LatticeError, match="not primitive"):
            unimodular_completion(k3, (k3.elem(2), k3.elem(0, 2)))

    def test_completion_needs_euclidean_field(self):
        k23 = new_field(23)
        with pytest.raises(LatticeError, match="norm-Euclidean"):
            unimodular_completion(k23, (k23.one, k23.zero))

    def test_hermite_reduce_drops_dependent_rows(self, k3):
        rows = [(k3.elem(2), k3.zero), (k3.zero, k3.elem(2)), (k3.elem(2), k3.elem(2))]
        reduced = hermite_reduce(k3, rows)
        assert len(reduced) == 2
        assert reduced[1][0].is_zero()


class TestIsotropicSearch:
    def test_block_gram_has_first_basis_vector(self, k3):
        L = HermLattice(k3, block_gram(k3, ((k3.one,),), twisted=False))
        found = find_isotropic(L, 1)
        assert (k3.one, k3.zero, k3.zero) in found
        for x in found:
            assert L.inner(x, x).is_zero()

    def test_definite_lattice_has_no_isotropic_vectors(self, k3):
        assert find_isotropic(HermLattice.diagonal(k3, [1, 1]), 2) == []

    def test_one_vector_per_unit_class(self, k3):
        L = HermLattice.diagonal(k3, [1, -1])
        found = find_isotropic(L, 1)
        classes = {
            tuple(sorted(tuple((u * x[0]).as_pair() + (u * x[1]).as_pair()) for u in k3.units))
            for x in found
        }
        assert len(classes) == len(found)


class TestNormalDecomposition:
    def _check(self, k, L, e):
        dec = normal_decomposition(L, e)
        r = L.rank
        assert dec.e == tuple(e)
        assert dec.block_sizes == (1, r - 2, 1)
        assert dec.gram == block_gram(k, dec.lambda_gram, twisted=False)
        assert dec.chart_gram == block_gram(k, dec.lambda_gram, twisted=True)
        assert L.transform(dec.basis_change).gram == dec.gram
        assert k.is_unit(kdet(k, dec.basis_change))
        lam = HermLattice(k, dec.lambda_gram)
        assert is_positive_definite(lam)
        assert check_self_dual(lam)
        return dec

    def test_diagonal_plus_minus_one(self, k3):
        L = HermLattice.diagonal(k3, [1, -1])
        self._check(k3, L, (k3.one, k3.one))

    def test_rank_three(self, k3):
        L = HermLattice.diagonal(k3, [1, 1, -1])
        dec = self._check(k3, L, (k3.one, k3.zero, k3.one))
        assert HermLattice(k3, dec.lambda_gram).rank == 1

    @settings(max_examples=100, deadline=None)
    @given(st.integers(min_value=0, max_value=10 ** 6), st.integers(min_value=2, max_value=4))
    def test_randomized_self_dual_lattices(self, seed, rank):
        """Test block shape, Λ and unimodularity on H ⊕ I in a random basis"""
        k = new_field(3)
        u, u_inv = random_unimodular(k, rank, np.random.default_rng(seed))
        L = hyperbolic(k, [1] * (rank - 2)).transform(u)
        e = u_inv[0]
        assert L.inner(e, e).is_zero()
        self._check(k, L, e)

    def test_rejects_non_isotropic_vector(self, k3):
        with pytest.raises(LatticeError, match="isotropic"):
            normal_decomposition(HermLattice.diagonal(k3, [1, -1]), (k3.one, k3.zero))

    def test_rejects_definite_lattice(self, k3):
        with pytest.raises(LatticeError, match="signature"):
            normal_decomposition(HermLattice.diagonal(k3, [1, 1]), (k3.one, k3.zero))


class TestBoundaryIndex:
    def test_ind_of_rank_one_label(self, k3):
        label = cusp_label(hyperbolic(k3, [1]), (k3.one, k3.zero, k3.zero))
        assert boundary_index(label, 1) == 6
        assert boundary_index(label, 2) == 0
        assert boundary_index(label, 3) == 6
        assert boundary_index(label, -1) == 0
        assert boundary_multiplicity(label, 1, 1.0) == pytest.approx(6 / (4 * pi))

    def test_ind_of_empty_label(self, k3):
        label = cusp_label(hyperbolic(k3), (k3.one, k3.zero))
        assert label.lam.rank == 0
        assert boundary_index(label, 1) == 0

    def test_ind_table(self, k3):
        label = CuspLabel(HermLattice.diagonal(k3, [1, 1]))
        table = ind_table(label, [1, 2], v=2.0)
        assert table["1"]["ind"] == 12
        assert table["2"]["multiplicity"] == pytest.approx(36 / (8 * pi))

    def test_label_must_be_self_dual(self, k3):
        with pytest.raises(LatticeError):
            CuspLabel(HermLattice.diagonal(k3, [2]))
