"""Hilbert-space bookkeeping and sparse-operator algebra."""

import numpy as np
import pytest
import scipy.sparse as sp

from cavityspin.core import (
    DROP_TOLERANCE,
    HilbertSpace,
    QuantumState,
    SparseOperator,
    commutator,
    embed,
    embed_block,
    uniform_space,
)
from cavityspin.errors import DimensionMismatchError
from cavityspin.spins import spin_operators


def random_operator(space, seed, hermitian=False, density=0.3):
    rng = np.random.default_rng(seed)
    dim = space.total_dim
    mat = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    mat[rng.random((dim, dim)) > density] = 0.0
    if hermitian:
        mat = 0.5 * (mat + mat.conj().T)
    return SparseOperator(space, sp.csr_matrix(mat), hermitian=hermitian)


class TestHilbertSpace:
    def test_total_dim_is_product(self):
        space = HilbertSpace((2, 3, 4))
        assert space.total_dim == 24
        assert space.n_sites == 3

    def test_rejects_trivial_sites(self):
        with pytest.raises(ValueError):
            HilbertSpace((2, 1, 3))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            HilbertSpace(())

    def test_side_dimensions(self):
        space = HilbertSpace((2, 3, 4))
        assert space.dims_left_of(0) == 1
        assert space.dims_left_of(2) == 6
        assert space.dims_right_of(0) == 12
        assert space.dims_right_of(2) == 1


class TestSparseOperator:
    def test_duplicate_coalescing(self):
        space = HilbertSpace((2,))
        op = SparseOperator.from_entries(space, [0, 0], [1, 1], [0.25, 0.75])
        assert op.entries == [(0, 1, (1.0 + 0.0j))]

    def test_drop_tolerance(self):
        space = HilbertSpace((2,))
        op = SparseOperator.from_entries(space, [0, 1], [1, 0], [1.0, DROP_TOLERANCE / 10])
        assert op.nnz == 1

    def test_entries_sorted(self):
        space = HilbertSpace((2, 2))
        op = SparseOperator.from_entries(space, [3, 0, 2], [1, 2, 0], [1, 2, 3])
        rows_cols = [(r, c) for r, c, _ in op.entries]
        assert rows_cols == sorted(rows_cols)

    def test_index_bounds(self):
        space = HilbertSpace((2,))
        with pytest.raises(DimensionMismatchError):
            SparseOperator.from_entries(space, [2], [0], [1.0])

    def test_hermitian_flag_verified(self):
        space = HilbertSpace((2,))
        with pytest.raises(ValueError):
            SparseOperator.from_entries(space, [0], [1], [1.0], hermitian=True)
        ok = SparseOperator.from_entries(space, [0, 1], [1, 0], [1j, -1j], hermitian=True)
        assert ok.hermitian and ok.is_hermitian()

    def test_algebra_against_dense(self):
        space = HilbertSpace((2, 3))
        a = random_operator(space, 1)
        b = random_operator(space, 2)
        ad, bd = a.to_dense(), b.to_dense()
        assert np.allclose((a + b).to_dense(), ad + bd)
        assert np.allclose((a - b).to_dense(), ad - bd)
        assert np.allclose((a @ b).to_dense(), ad @ bd)
        assert np.allclose((2.5j * a).to_dense(), 2.5j * ad)
        assert np.allclose(a.adjoint().to_dense(), ad.conj().T)
        assert np.allclose(commutator(a, b).to_dense(), ad @ bd - bd @ ad)

    def test_space_mismatch_rejected(self):
        a = random_operator(HilbertSpace((2, 2)), 3)
        b = random_operator(HilbertSpace((4,)), 4)
        with pytest.raises(DimensionMismatchError):
            _ = a + b

    def test_matvec_linearity_and_adjoint_consistency(self):
        space = HilbertSpace((3, 2, 2))
        op = random_operator(space, 5)
        rng = np.random.default_rng(6)
        for _ in range(10):
            x = rng.normal(size=space.total_dim) + 1j * rng.normal(size=space.total_dim)
            y = rng.normal(size=space.total_dim) + 1j * rng.normal(size=space.total_dim)
            alpha = complex(rng.normal(), rng.normal())
            lhs = op.matvec(alpha * x + y)
            rhs = alpha * op.matvec(x) + op.matvec(y)
            assert np.linalg.norm(lhs - rhs) <= 1e-12 * max(np.linalg.norm(rhs), 1.0)
            # <phi|O psi> == <O^dag phi|psi>
            inner1 = np.vdot(y, op.matvec(x))
            inner2 = np.vdot(op.adjoint().matvec(y), x)
            assert abs(inner1 - inner2) <= 1e-12 * max(abs(inner1), 1.0)

    def test_trace_and_expectation(self):
        space = HilbertSpace((2,))
        sz = spin_operators(1).z
        up = QuantumState.basis_state(space, 0)
        assert sz.expectation(up) == pytest.approx(0.5)
        assert sz.trace() == pytest.approx(0.0)


class TestEmbed:
    def test_identity_embeds_to_identity(self):
        space = HilbertSpace((2, 3, 2))
        ident = SparseOperator.identity(HilbertSpace((3,)))
        assert embed(ident, 1, space).allclose(SparseOperator.identity(space))

    def test_distinct_sites_commute(self):
        space = uniform_space(2, 3)
        ops = spin_operators(1)
        a = embed(ops.plus, 0, space)
        b = embed(ops.minus, 2, space)
        assert commutator(a, b).allclose(SparseOperator.zero(space))

    def test_two_site_sz_spectrum(self):
        space = uniform_space(2, 2)
        sz = spin_operators(1).z
        total = embed(sz, 0, space) + embed(sz, 1, space)
        eigs = np.sort(np.linalg.eigvalsh(total.to_dense()))
        assert np.allclose(eigs, [-1.0, 0.0, 0.0, 1.0])

    def test_dimension_mismatch(self):
        space = HilbertSpace((2, 3))
        sz = spin_operators(1).z  # dimension 2
        with pytest.raises(DimensionMismatchError):
            embed(sz, 1, space)

    def test_embed_block_alignment(self):
        space = HilbertSpace((2, 2, 3))
        block = SparseOperator.identity(HilbertSpace((2, 2)))
        assert embed_block(block, 0, space).allclose(SparseOperator.identity(space))
        with pytest.raises(DimensionMismatchError):
            embed_block(block, 1, space)  # 2*2 does not align starting at site 1


class TestQuantumState:
    def test_norm_cache_matches_sum(self):
        rng = np.random.default_rng(7)
        space = HilbertSpace((5, 3))
        amps = rng.normal(size=15) + 1j * rng.normal(size=15)
        state = QuantumState(space, amps)
        direct = np.sum(np.abs(amps) ** 2)
        assert abs(state.norm_squared - direct) <= 1e-12 * direct

    def test_product_state(self):
        space = HilbertSpace((2, 2))
        state = QuantumState.from_product(space, [[1, 0], [0, 1]])
        assert state.amplitudes[1] == 1.0  # |0>|1> -> index 1
        assert state.norm == pytest.approx(1.0)

    def test_normalized(self):
        space = HilbertSpace((2,))
        state = QuantumState(space, [3.0, 4.0])
        assert state.normalized().norm == pytest.approx(1.0)
        with pytest.raises(ValueError):
            QuantumState(space, [0.0, 0.0]).normalized()

    def test_overlap_space_check(self):
        a = QuantumState.basis_state(HilbertSpace((2,)), 0)
        b = QuantumState.basis_state(HilbertSpace((3,)), 0)
        with pytest.raises(DimensionMismatchError):
            a.overlap(b)

    def test_length_check(self):
        with pytest.raises(DimensionMismatchError):
            QuantumState(HilbertSpace((2,)), [1.0, 0.0, 0.0])
