"""Spectral and observable analysis on desk-scale operators.

Extremal eigenpairs come from Lanczos with full reorthogonalization plus
deflation restarts, so degenerate clusters are resolved to the requested
count; every returned pair carries its verified residual.  Dense
diagonalization is deliberately left to the tests as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .core import QuantumState, SparseOperator, embed, embed_block
from .errors import ConvergenceError, DimensionMismatchError
from .spins import collective_spin_ops, spin_operators

_MAX_RESTARTS = 12


def operator_scale(h: SparseOperator) -> float:
    """Cheap upper bound on the spectral norm (max absolute row sum)."""
    if not h.nnz:
        return 0.0
    return float(np.abs(h.matrix).sum(axis=1).max())


@dataclass
class SpectrumSlice:
    """Extremal eigenvalues in ascending order with matching vectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # one column per eigenvalue
    residuals: np.ndarray
    which: str


def _project_out(vec: np.ndarray, basis: list[np.ndarray]):
    for b in basis:
        vec -= np.vdot(b, vec) * b
    return vec


def _single_lanczos(matvec, dim, need, tol, rng, deflate, max_basis):
    """One deflated Lanczos sweep; returns verified (value, vector) pairs."""
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    v = _project_out(v, deflate)
    norm = np.linalg.norm(v)
    if norm < 1e-8:  # deflation space nearly exhausts the start vector
        return []
    v /= norm
    basis = [v]
    alphas: list[float] = []
    betas: list[float] = []
    exhausted = False
    for j in range(min(max_basis, dim - len(deflate))):
        w = matvec(basis[j])
        alphas.append(float(np.vdot(basis[j], w).real))
        # full reorthogonalization (two passes) against basis and deflated space
        for _ in range(2):
            w = _project_out(w, basis)
            w = _project_out(w, deflate)
        beta = float(np.linalg.norm(w))
        scale = max(max(abs(a) for a in alphas), max(betas, default=0.0), 1.0)
        if beta <= 1e-13 * scale:
            exhausted = True  # invariant subspace found
            break
        betas.append(beta)
        basis.append(w / beta)
        if j >= need and (j % 5 == 0 or j == max_basis - 1):
            vals, vecs_t = eigh_tridiagonal(np.array(alphas), np.array(betas[:-1] if len(betas) == len(alphas) else betas))
            est = np.abs(betas[-1] * vecs_t[-1, :need])
            if np.all(est <= 0.1 * tol):
                break
    m = len(alphas)
    if m == 0:
        return []
    off = np.array(betas[: m - 1])
    vals, vecs_t = eigh_tridiagonal(np.array(alphas), off)
    mat = np.array(basis[:m]).T  # dim x m
    pairs = []
    take = m if exhausted else min(need, m)
    for idx in range(take):
        vec = mat @ vecs_t[:, idx]
        vec /= np.linalg.norm(vec)
        residual = float(np.linalg.norm(matvec(vec) - vals[idx] * vec))
        if residual <= tol:
            pairs.append((float(vals[idx]), vec, residual))
    return pairs


def extremal_eigenpairs(h: SparseOperator, k: int, which: str = "lowest",
                        tol: float = 1e-10, seed: int = 7,
                        max_basis: int = 400) -> SpectrumSlice:
    """k extremal eigenpairs of a Hermitian operator.

    ``which`` selects the lowest or highest end of the spectrum; either
    way the returned eigenvalues are ascending.  Degenerate clusters are
    resolved by deflation restarts with fresh random start vectors.
    Residuals satisfy ||Hv - ev|| <= tol * max(1, operator_scale(h)), so
    the tolerance is effectively relative for large operators.
    """
    if not h.hermitian:
        raise ValueError("extremal_eigenpairs needs a hermitian operator")
    if which not in ("lowest", "highest"):
        raise ValueError("which must be 'lowest' or 'highest'")
    dim = h.dim
    if not 1 <= k <= dim:
        raise ValueError(f"k must be in 1..{dim}")
    tol = tol * max(1.0, operator_scale(h))
    sign = 1.0 if which == "lowest" else -1.0
    matvec = h.matvec if sign > 0 else (lambda x: -h.matvec(x))
    rng = np.random.default_rng(seed)

    found: list[tuple[float, np.ndarray, float]] = []
    deflate: list[np.ndarray] = []
    for _ in range(_MAX_RESTARTS):
        if len(found) >= k:
            break
        pairs = _single_lanczos(matvec, dim, k - len(found), tol, rng, deflate, max_basis)
        for val, vec, res in pairs:
            found.append((val, vec, res))
            deflate.append(vec)
    if len(found) < k:
        raise ConvergenceError(
            f"Lanczos found only {len(found)} of {k} eigenpairs after {_MAX_RESTARTS} restarts"
        )
    found.sort(key=lambda p: p[0])
    found = found[:k]
    values = np.array([sign * val for val, _, _ in found])
    vectors = np.column_stack([vec for _, vec, _ in found])
    residuals = np.array([res for _, _, res in found])
    order = np.argsort(values)
    return SpectrumSlice(values[order], vectors[:, order], residuals[order], which)


@dataclass
class GapResult:
    gap: float
    ground_energy: float
    ground_degeneracy: int


def _spectral_width_estimate(h: SparseOperator, seed=11) -> float:
    lo = extremal_eigenpairs(h, 1, "lowest", tol=1e-6, seed=seed).eigenvalues[0]
    hi = extremal_eigenpairs(h, 1, "highest", tol=1e-6, seed=seed).eigenvalues[0]
    return float(max(hi - lo, 1e-30))


def excitation_gap(h: SparseOperator, degeneracy_tol: float | None = None,
                   tol: float = 1e-10, seed: int = 7) -> GapResult:
    """Energy of the first level above the (possibly degenerate) ground space.

    The default degeneracy tolerance scales with the spectral width, so
    the classification is invariant under rescaling the operator.
    """
    if degeneracy_tol is None:
        degeneracy_tol = 1e-8 * _spectral_width_estimate(h, seed=seed)
    k = min(4, h.dim)
    while True:
        slice_ = extremal_eigenpairs(h, k, "lowest", tol=tol, seed=seed)
        e0 = slice_.eigenvalues[0]
        above = slice_.eigenvalues[slice_.eigenvalues > e0 + degeneracy_tol]
        if above.size:
            degeneracy = int(np.sum(slice_.eigenvalues <= e0 + degeneracy_tol))
            return GapResult(float(above[0] - e0), float(e0), degeneracy)
        if k >= h.dim:
            return GapResult(0.0, float(e0), h.dim)
        k = min(2 * k, h.dim)


def _site_spin_op(space, site: int, axis: str) -> SparseOperator:
    two_s = space.local_dims[site] - 1
    ops = spin_operators(two_s)
    if axis == "Z":
        local = ops.z
    elif axis == "X":
        local = (ops.plus + ops.minus) * 0.5
    elif axis == "Y":
        op = (ops.plus - ops.minus) * (-0.5j)
        local = SparseOperator(op.space, op.matrix, hermitian=True)
    else:
        raise ValueError("axis must be 'X', 'Y', or 'Z'")
    return embed(local, site, space)


@dataclass
class CorrelationResult:
    raw: float        # <S_i^a S_j^a>
    connected: float  # raw - <S_i^a><S_j^a>


def correlation(psi: QuantumState, site_i: int, site_j: int, axis: str = "Z") -> CorrelationResult:
    """Two-point spin correlation on a spin-model state."""
    space = psi.space
    for site in (site_i, site_j):
        if not 0 <= site < space.n_sites:
            raise DimensionMismatchError(f"site {site} outside the {space.n_sites}-site space")
    op_i = _site_spin_op(space, site_i, axis)
    op_j = _site_spin_op(space, site_j, axis)
    both = op_i @ op_j
    raw = float(np.vdot(psi.amplitudes, both.matvec(psi.amplitudes)).real)
    mean_i = op_i.expectation(psi).real
    mean_j = op_j.expectation(psi).real
    return CorrelationResult(raw, raw - mean_i * mean_j)


def magnetization_profile(psi: QuantumState) -> np.ndarray:
    """<S^z> per site."""
    return np.array([
        _site_spin_op(psi.space, site, "Z").expectation(psi).real
        for site in range(psi.space.n_sites)
    ])


def total_spin_per_site(psi: QuantumState, site: int,
                        atoms_per_site: int | None = None) -> float:
    """<S^2> of one site (or of one cavity's atom group).

    Without ``atoms_per_site`` the state lives on a spin-model space and
    each site is a fixed multiplet, so the value is S(S+1) identically.
    With ``atoms_per_site`` = M the state lives on two-level atoms grouped
    M per cavity, and the collective S^2 of the group is measured.
    """
    space = psi.space
    if atoms_per_site is None:
        two_s = space.local_dims[site] - 1
        ops = spin_operators(two_s)
        sq_mat = (ops.z @ ops.z).matrix + 0.5 * ((ops.plus @ ops.minus).matrix + (ops.minus @ ops.plus).matrix)
        op = embed(SparseOperator(ops.z.space, sq_mat, hermitian=True), site, space)
        return float(op.expectation(psi).real)
    coll = collective_spin_ops(atoms_per_site)
    first = site * atoms_per_site
    op = embed_block(coll.squared, first, space)
    return float(op.expectation(psi).real)


def fidelity(psi: QuantumState, phi: QuantumState) -> float:
    """|<psi|phi>|^2 for normalized states on the same space."""
    if psi.space != phi.space:
        raise DimensionMismatchError("states live on different spaces")
    return float(abs(psi.overlap(phi)) ** 2)
