"""Angular-momentum, collective-atom, and bosonic mode operators.

Conventions (fixed, relied on by index arithmetic elsewhere):

* atomic levels are ordered ``a = 0``, ``b = 1``, ``e = 2``;
* the dressed two-level basis is ordered ``up = 0``, ``down = 1`` with
  ``|up> = (|a> + |b>)/sqrt(2)`` and ``|down> = (|a> - |b>)/sqrt(2)``;
* spin-S matrices are written in the S^z eigenbasis sorted by descending
  magnetic quantum number, so ``S^+`` sits on the superdiagonal.
"""

from __future__ import annotations

from math import comb, sqrt
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .core import HilbertSpace, SparseOperator, embed, single_site_space, uniform_space

LEVEL_A = 0
LEVEL_B = 1
LEVEL_E = 2
UP = 0
DOWN = 1

_LEVEL_INDEX = {"a": LEVEL_A, "b": LEVEL_B, "e": LEVEL_E}


class SpinOps(NamedTuple):
    z: SparseOperator
    plus: SparseOperator
    minus: SparseOperator


class CollectiveSpin(NamedTuple):
    z: SparseOperator
    plus: SparseOperator
    minus: SparseOperator
    squared: SparseOperator


def spin_operators(two_s: int) -> SpinOps:
    """S^z, S^+, S^- for spin S = two_s/2 on a (two_s + 1)-dimensional site.

    ``two_s = 0`` is rejected: a one-dimensional site carries no spin.
    """
    if two_s < 1:
        raise ValueError("two_s must be >= 1 (spin-0 has no spin degrees of freedom)")
    dim = two_s + 1
    s = two_s / 2.0
    m = s - np.arange(dim)  # descending: s, s-1, ..., -s
    space = single_site_space(dim)
    sz = SparseOperator(space, sp.diags(m, format="csr"), hermitian=True)
    # <m+1|S+|m> = sqrt(s(s+1) - m(m+1)); with descending order that is
    # the superdiagonal, fed by the m-values of columns 1..dim-1.
    amp = np.sqrt(s * (s + 1.0) - m[1:] * (m[1:] + 1.0))
    splus = SparseOperator(space, sp.diags(amp, 1, format="csr"))
    return SpinOps(sz, splus, splus.adjoint())


def annihilation(n_max: int) -> SparseOperator:
    """Bosonic lowering operator truncated at ``n_max`` photons."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    amp = np.sqrt(np.arange(1, n_max + 1, dtype=float))
    return SparseOperator(single_site_space(n_max + 1), sp.diags(amp, 1, format="csr"))


def number_operator(n_max: int) -> SparseOperator:
    a = annihilation(n_max)
    return SparseOperator(a.space, (a.adjoint() @ a).matrix, hermitian=True)


def _level_index(level, n_levels):
    if isinstance(level, str):
        level = _LEVEL_INDEX[level]
    if not 0 <= level < n_levels:
        raise ValueError(f"level {level} outside a {n_levels}-level atom")
    return level


def transition(x, y, n_levels: int = 3) -> SparseOperator:
    """Single-atom |x><y|."""
    x = _level_index(x, n_levels)
    y = _level_index(y, n_levels)
    return SparseOperator.from_entries(single_site_space(n_levels), [x], [y], [1.0], hermitian=(x == y))


def collective_transition(x, y, m_atoms: int, n_levels: int = 3) -> SparseOperator:
    """Sum of |x><y| over ``m_atoms`` identical atoms.

    Acts on the m-atom space of dimension ``n_levels**m_atoms``; embed the
    result to place it inside a larger cavity-array space.
    """
    if m_atoms < 1:
        raise ValueError("need at least one atom")
    space = uniform_space(n_levels, m_atoms)
    single = transition(x, y, n_levels)
    total = embed(single, 0, space)
    for k in range(1, m_atoms):
        total = total + embed(single, k, space)
    return total


def collective_spin_ops(m_atoms: int) -> CollectiveSpin:
    """Collective S^z, S^+, S^-, S^2 for ``m_atoms`` two-level atoms.

    Operates on the dressed {up, down} basis; ``squared`` is
    (S^z)^2 + (S^+S^- + S^-S^+)/2.
    """
    if m_atoms < 1:
        raise ValueError("need at least one atom")
    space = uniform_space(2, m_atoms)
    single = spin_operators(1)
    sz = embed(single.z, 0, space)
    splus = embed(single.plus, 0, space)
    for k in range(1, m_atoms):
        sz = sz + embed(single.z, k, space)
        splus = splus + embed(single.plus, k, space)
    sminus = splus.adjoint()
    sq_mat = (sz @ sz).matrix + 0.5 * ((splus @ sminus).matrix + (sminus @ splus).matrix)
    squared = SparseOperator(space, sq_mat, hermitian=True)
    return CollectiveSpin(sz, splus, sminus, squared)


def rotated_identities_check(m_atoms: int, tol: float = 1e-12) -> bool:
    """Verify the dressed-basis operator identities on ``m_atoms`` atoms.

    Checks, as matrices on the 2^m space:
      sum_k |down><down|_k == m/2 - S^z
      sum_k |up><up|_k     == m/2 + S^z
      sum_k |up><down|_k   == S^+
      sum_k |down><up|_k   == S^-
    """
    coll = collective_spin_ops(m_atoms)
    space = coll.z.space
    half_m = SparseOperator.identity(space) * (m_atoms / 2.0)
    pairs = [
        (collective_transition(DOWN, DOWN, m_atoms, n_levels=2), half_m - coll.z),
        (collective_transition(UP, UP, m_atoms, n_levels=2), half_m + coll.z),
        (collective_transition(UP, DOWN, m_atoms, n_levels=2), coll.plus),
        (collective_transition(DOWN, UP, m_atoms, n_levels=2), coll.minus),
    ]
    return all(lhs.allclose(rhs, atol=tol) for lhs, rhs in pairs)


def symmetric_embedding(m_atoms: int) -> np.ndarray:
    """Isometry from the spin-(m/2) multiplet into the m-atom product space.

    Column ``k`` is the normalized symmetric (Dicke) state with ``k`` atoms
    in |down>, i.e. S^z eigenvalue m/2 - k, matching the row ordering of
    :func:`spin_operators`.  Shape ``(2**m_atoms, m_atoms + 1)``.
    """
    if m_atoms < 1:
        raise ValueError("need at least one atom")
    dim = 2 ** m_atoms
    v = np.zeros((dim, m_atoms + 1), dtype=np.complex128)
    for index in range(dim):
        k = bin(index).count("1")  # DOWN = 1 occupies set bits
        v[index, k] = 1.0
    for k in range(m_atoms + 1):
        v[:, k] /= sqrt(comb(m_atoms, k))
    return v


def project_to_dicke(op: SparseOperator, m_atoms: int) -> np.ndarray:
    """V^dagger op V with V the symmetric embedding (dense, small)."""
    v = symmetric_embedding(m_atoms)
    return v.conj().T @ (op.matrix @ v)


def dressed_state_vectors(n_levels: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """|up> and |down> written in the bare {a, b(, e)} basis."""
    up = np.zeros(n_levels, dtype=np.complex128)
    down = np.zeros(n_levels, dtype=np.complex128)
    up[LEVEL_A] = up[LEVEL_B] = 1.0 / sqrt(2.0)
    down[LEVEL_A] = 1.0 / sqrt(2.0)
    down[LEVEL_B] = -1.0 / sqrt(2.0)
    return up, down


def dressed_spin_ops(m_atoms: int, n_levels: int = 3) -> CollectiveSpin:
    """Collective dressed-basis spin operators on bare-basis atoms.

    Useful for measuring spin observables directly on states of the full
    three-level model, where the spin is carried by the a/b coherences:
    s^z = (|a><b| + |b><a|)/2 per atom, etc.  The excited level (if
    present) is annihilated by all four operators.
    """
    up, down = dressed_state_vectors(n_levels)
    space = single_site_space(n_levels)

    def op_from(bra, ket, hermitian=False):
        return SparseOperator(space, sp.csr_matrix(np.outer(bra, ket.conj())), hermitian=hermitian)

    sz1 = op_from(up, up, hermitian=True) * 0.5 - op_from(down, down, hermitian=True) * 0.5
    sp1 = op_from(up, down)
    full = uniform_space(n_levels, m_atoms)
    sz = embed(sz1, 0, full)
    splus = embed(sp1, 0, full)
    for k in range(1, m_atoms):
        sz = sz + embed(sz1, k, full)
        splus = splus + embed(sp1, k, full)
    sminus = splus.adjoint()
    sq = (sz @ sz).matrix + 0.5 * ((splus @ sminus).matrix + (sminus @ splus).matrix)
    return CollectiveSpin(
        SparseOperator(full, sz.matrix, hermitian=True),
        splus,
        sminus,
        SparseOperator(full, sq, hermitian=True),
    )
