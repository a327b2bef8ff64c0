"""Tensor-product Hilbert spaces, sparse operators, and state vectors.

Everything downstream (model builders, propagators, spectral analysis) is
expressed with the three types defined here.  Operators are stored in
compressed sparse row form with a canonical entry order, so structural
equality and term-by-term subtraction are reproducible; matrix-vector
products run through scipy's C kernels.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatchError

# Entries below this magnitude are dropped when an operator is canonicalized.
DROP_TOLERANCE = 1e-15

# Relative tolerance used when verifying a declared hermitian flag.
_HERMITIAN_RTOL = 1e-12


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered tensor product of finite local factors.

    ``local_dims[k]`` is the dimension of site ``k``; the first factor is
    the most significant index (row-major Kronecker convention).  Site
    ordering is fixed by the model builders: the atoms of a cavity come
    first, then that cavity's photon mode, then the next cavity.
    """

    local_dims: tuple[int, ...]

    def __post_init__(self):
        if not self.local_dims:
            raise ValueError("a Hilbert space needs at least one site")
        if any(d < 2 for d in self.local_dims):
            raise ValueError(f"every local dimension must be >= 2, got {self.local_dims}")
        object.__setattr__(self, "local_dims", tuple(int(d) for d in self.local_dims))

    @property
    def total_dim(self) -> int:
        return prod(self.local_dims)

    @property
    def n_sites(self) -> int:
        return len(self.local_dims)

    def dims_left_of(self, site: int) -> int:
        return prod(self.local_dims[:site]) if site else 1

    def dims_right_of(self, site: int) -> int:
        return prod(self.local_dims[site + 1:]) if site + 1 < self.n_sites else 1


def single_site_space(dim: int) -> HilbertSpace:
    return HilbertSpace((dim,))


def uniform_space(dim: int, n_sites: int) -> HilbertSpace:
    return HilbertSpace((dim,) * n_sites)


class SparseOperator:
    """Sparse complex operator on a :class:`HilbertSpace`.

    The matrix is kept in canonical CSR form (sorted indices, duplicates
    coalesced, entries below :data:`DROP_TOLERANCE` removed).  A ``hermitian``
    flag is carried along and verified at construction time, so algebra on
    flagged operators can trust it.
    """

    __slots__ = ("space", "matrix", "hermitian")

    def __init__(self, space: HilbertSpace, matrix, hermitian: bool = False):
        dim = space.total_dim
        if matrix.shape != (dim, dim):
            raise DimensionMismatchError(
                f"matrix shape {matrix.shape} does not match space dimension {dim}"
            )
        mat = sp.csr_matrix(matrix, dtype=np.complex128, copy=True)
        mat.sum_duplicates()
        if mat.nnz:
            keep = np.abs(mat.data) > DROP_TOLERANCE
            if not keep.all():
                mat.data[~keep] = 0.0
                mat.eliminate_zeros()
        mat.sort_indices()
        if hermitian and mat.nnz:
            asym = abs(mat - mat.getH())
            scale = max(np.abs(mat.data).max(), 1.0)
            if asym.data.size and asym.data.max() > _HERMITIAN_RTOL * scale:
                raise ValueError("operator marked hermitian is not self-adjoint")
        self.space = space
        self.matrix = mat
        self.hermitian = bool(hermitian)

    # -- constructors -------------------------------------------------

    @classmethod
    def from_entries(cls, space, rows, cols, values, hermitian=False):
        dim = space.total_dim
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if rows.size and (rows.min() < 0 or rows.max() >= dim or cols.min() < 0 or cols.max() >= dim):
            raise DimensionMismatchError("entry index outside the Hilbert space")
        mat = sp.coo_matrix((np.asarray(values, dtype=np.complex128), (rows, cols)), shape=(dim, dim))
        return cls(space, mat, hermitian=hermitian)

    @classmethod
    def identity(cls, space):
        return cls(space, sp.identity(space.total_dim, dtype=np.complex128, format="csr"), hermitian=True)

    @classmethod
    def zero(cls, space):
        return cls(space, sp.csr_matrix((space.total_dim, space.total_dim), dtype=np.complex128), hermitian=True)

    # -- inspection ---------------------------------------------------

    @property
    def dim(self) -> int:
        return self.space.total_dim

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    @property
    def entries(self):
        """Canonical ``(row, col, value)`` triplets, sorted by (row, col)."""
        coo = self.matrix.tocoo()
        return list(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def max_abs(self) -> float:
        return float(np.abs(self.matrix.data).max()) if self.matrix.nnz else 0.0

    def is_hermitian(self, rtol=_HERMITIAN_RTOL) -> bool:
        diff = abs(self.matrix - self.matrix.getH())
        if not diff.nnz:
            return True
        return diff.data.max() <= rtol * max(self.max_abs(), 1.0)

    def trace(self) -> complex:
        return complex(self.matrix.diagonal().sum())

    # -- algebra ------------------------------------------------------

    def _check_space(self, other):
        if self.space != other.space:
            raise DimensionMismatchError("operators live on different spaces")

    def __add__(self, other):
        self._check_space(other)
        return SparseOperator(self.space, self.matrix + other.matrix,
                              hermitian=self.hermitian and other.hermitian)

    def __sub__(self, other):
        self._check_space(other)
        return SparseOperator(self.space, self.matrix - other.matrix,
                              hermitian=self.hermitian and other.hermitian)

    def __mul__(self, scalar):
        scalar = complex(scalar)
        herm = self.hermitian and scalar.imag == 0.0
        return SparseOperator(self.space, self.matrix * scalar, hermitian=herm)

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)

    def __matmul__(self, other):
        if isinstance(other, SparseOperator):
            self._check_space(other)
            return SparseOperator(self.space, self.matrix @ other.matrix)
        return NotImplemented

    def adjoint(self) -> "SparseOperator":
        return SparseOperator(self.space, self.matrix.getH(), hermitian=self.hermitian)

    def matvec(self, vector: np.ndarray) -> np.ndarray:
        """Apply to a dense amplitude vector.  Hot path: no copies beyond
        the scipy result buffer."""
        return self.matrix.dot(vector)

    def apply(self, state: "QuantumState") -> "QuantumState":
        if state.space != self.space:
            raise DimensionMismatchError("state lives on a different space")
        return QuantumState(self.space, self.matrix.dot(state.amplitudes))

    def expectation(self, state: "QuantumState") -> complex:
        """<psi|O|psi> without normalizing psi."""
        if state.space != self.space:
            raise DimensionMismatchError("state lives on a different space")
        return complex(np.vdot(state.amplitudes, self.matrix.dot(state.amplitudes)))

    def allclose(self, other, atol=1e-12) -> bool:
        self._check_space(other)
        diff = abs(self.matrix - other.matrix)
        return (not diff.nnz) or diff.data.max() <= atol

    def __repr__(self):
        kind = "hermitian" if self.hermitian else "general"
        return f"SparseOperator(dim={self.dim}, nnz={self.nnz}, {kind})"


def commutator(a: SparseOperator, b: SparseOperator) -> SparseOperator:
    return a @ b - b @ a


def embed(op: SparseOperator, site: int, space: HilbertSpace) -> SparseOperator:
    """Lift a single-site operator to the full space (identities elsewhere)."""
    if not 0 <= site < space.n_sites:
        raise DimensionMismatchError(f"site {site} outside space with {space.n_sites} sites")
    if op.dim != space.local_dims[site]:
        raise DimensionMismatchError(
            f"operator dimension {op.dim} != local dimension {space.local_dims[site]} at site {site}"
        )
    left = space.dims_left_of(site)
    right = space.dims_right_of(site)
    mat = op.matrix
    if left > 1:
        mat = sp.kron(sp.identity(left, dtype=np.complex128, format="csr"), mat, format="csr")
    if right > 1:
        mat = sp.kron(mat, sp.identity(right, dtype=np.complex128, format="csr"), format="csr")
    return SparseOperator(space, mat, hermitian=op.hermitian)


def embed_block(op: SparseOperator, first_site: int, space: HilbertSpace) -> SparseOperator:
    """Lift an operator acting on a contiguous run of sites.

    ``op`` must match the product of local dimensions starting at
    ``first_site``; its own factorization is irrelevant.
    """
    covered = 1
    site = first_site
    while covered < op.dim and site < space.n_sites:
        covered *= space.local_dims[site]
        site += 1
    if covered != op.dim:
        raise DimensionMismatchError(
            f"operator of dimension {op.dim} does not align with sites starting at {first_site}"
        )
    left = space.dims_left_of(first_site)
    right = prod(space.local_dims[site:]) if site < space.n_sites else 1
    mat = op.matrix
    if left > 1:
        mat = sp.kron(sp.identity(left, dtype=np.complex128, format="csr"), mat, format="csr")
    if right > 1:
        mat = sp.kron(mat, sp.identity(right, dtype=np.complex128, format="csr"), format="csr")
    return SparseOperator(space, mat, hermitian=op.hermitian)


class QuantumState:
    """Dense complex amplitude vector with a cached squared norm."""

    __slots__ = ("space", "amplitudes", "_norm_sq")

    def __init__(self, space: HilbertSpace, amplitudes):
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (space.total_dim,):
            raise DimensionMismatchError(
                f"amplitude vector of length {amplitudes.shape} does not match dimension {space.total_dim}"
            )
        self.space = space
        self.amplitudes = amplitudes
        self._norm_sq = None

    @classmethod
    def basis_state(cls, space, index: int):
        vec = np.zeros(space.total_dim, dtype=np.complex128)
        vec[index] = 1.0
        return cls(space, vec)

    @classmethod
    def from_product(cls, space, site_vectors):
        """Kronecker product of per-site amplitude vectors."""
        if len(site_vectors) != space.n_sites:
            raise DimensionMismatchError("need one local vector per site")
        vec = np.array([1.0], dtype=np.complex128)
        for local_dim, local in zip(space.local_dims, site_vectors):
            local = np.asarray(local, dtype=np.complex128)
            if local.shape != (local_dim,):
                raise DimensionMismatchError("local vector has wrong dimension")
            vec = np.kron(vec, local)
        return cls(space, vec)

    @classmethod
    def random(cls, space, seed):
        rng = np.random.default_rng(seed)
        vec = rng.normal(size=space.total_dim) + 1j * rng.normal(size=space.total_dim)
        vec /= np.linalg.norm(vec)
        return cls(space, vec)

    @property
    def norm_squared(self) -> float:
        if self._norm_sq is None:
            self._norm_sq = float(np.vdot(self.amplitudes, self.amplitudes).real)
        return self._norm_sq

    @property
    def norm(self) -> float:
        return self.norm_squared ** 0.5

    def normalized(self) -> "QuantumState":
        n = self.norm
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return QuantumState(self.space, self.amplitudes / n)

    def overlap(self, other: "QuantumState") -> complex:
        if self.space != other.space:
            raise DimensionMismatchError("states live on different spaces")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def copy(self) -> "QuantumState":
        return QuantumState(self.space, self.amplitudes.copy())

    def __repr__(self):
        return f"QuantumState(dim={self.space.total_dim}, norm={self.norm:.6g})"
