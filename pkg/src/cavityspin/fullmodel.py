"""Cavity-array Hamiltonians at the three levels of description.

``build_full_hamiltonian``    three-level atoms plus photons, classical
                              drives entering as rotating terms at the
                              optical detunings.
``build_eliminated_hamiltonian``  two-level (bare a/b) atoms plus photons
                              after removal of the excited level.
``build_intermediate_hamiltonian``  dressed two-level atoms plus photons in
                              the frame rotating with the photon Stark
                              shift and the dressed splitting.

All three return a :class:`TimeDependentOperator`; the eliminated model is
static unless the auxiliary lasers are on.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .core import HilbertSpace, QuantumState, SparseOperator, embed_block
from .effective import derive_couplings, raman_amplitude
from .errors import DimensionMismatchError, FrequencyCollisionError
from .graphs import CavityGraph
from .params import PhysicalParams
from . import spins

# Rotating terms closer in frequency than this (absolute, in the caller's
# frequency units) are merged into one.
FREQUENCY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TimeDependentOperator:
    """H(t) = static + sum_k (exp(i nu_k t) H_k + h.c.).

    Frequencies are canonicalized to be positive (a negative-frequency term
    is stored as its adjoint at the opposite frequency), coalesced within
    :data:`FREQUENCY_TOLERANCE`, and sorted, so the frequency list is a
    reproducible fingerprint of the model.  ``at(t)`` is Hermitian by
    construction whenever the static part is.
    """

    static_part: SparseOperator
    rotating_terms: tuple[tuple[SparseOperator, float], ...] = ()

    def __post_init__(self):
        if not self.static_part.hermitian:
            raise ValueError("static part must be hermitian")
        merged: list[tuple[SparseOperator, float]] = []
        for op, nu in self.rotating_terms:
            if op.space != self.static_part.space:
                raise DimensionMismatchError("rotating term on a different space")
            nu = float(nu)
            if abs(nu) <= FREQUENCY_TOLERANCE:
                raise FrequencyCollisionError(
                    "rotating term at zero frequency; fold it into the static part"
                )
            if nu < 0:
                op, nu = op.adjoint(), -nu
            for i, (prev, nu_prev) in enumerate(merged):
                if abs(nu - nu_prev) <= FREQUENCY_TOLERANCE:
                    merged[i] = (prev + op, nu_prev)
                    break
            else:
                merged.append((op, nu))
        merged = [(op, nu) for op, nu in merged if op.nnz]
        merged.sort(key=lambda item: item[1])
        object.__setattr__(self, "rotating_terms", tuple(merged))

    @property
    def space(self) -> HilbertSpace:
        return self.static_part.space

    @property
    def frequencies(self) -> tuple[float, ...]:
        return tuple(nu for _, nu in self.rotating_terms)

    @property
    def max_frequency(self) -> float:
        return self.rotating_terms[-1][1] if self.rotating_terms else 0.0

    @property
    def is_static(self) -> bool:
        return not self.rotating_terms

    def at(self, t: float) -> SparseOperator:
        """Snapshot H(t) as a Hermitian operator."""
        import numpy as np

        mat = self.static_part.matrix.copy()
        for op, nu in self.rotating_terms:
            phase = np.exp(1j * nu * t)
            rotated = phase * op.matrix
            mat = mat + rotated + rotated.getH()
        return SparseOperator(self.space, mat, hermitian=True)

    def coefficients_at(self, t: float):
        """Phases exp(i nu_k t), one per rotating term (hot-path helper)."""
        import numpy as np

        return [np.exp(1j * nu * t) for _, nu in self.rotating_terms]

    def apply_at(self, t: float, vector):
        """H(t) @ vector without materializing the snapshot matrix."""
        out = self.static_part.matrix.dot(vector)
        for (op, nu), phase in zip(self.rotating_terms, self.coefficients_at(t)):
            out += phase * op.matrix.dot(vector)
            out += op.matrix.getH().dot(vector) * phase.conjugate()
        return out


@dataclass(frozen=True)
class CavityLayout:
    """Site bookkeeping for one description level of the array.

    Per cavity the sites run: ``atoms_per_cavity`` atomic factors followed
    by one photon factor (omitted when ``n_max`` is None).  ``atom_basis``
    records whether atomic factors are bare {a, b(, e)} levels or dressed
    {up, down} states, which decides how observables are built.
    """

    n_cavities: int
    atoms_per_cavity: int
    atom_dim: int
    n_max: int | None
    atom_basis: str = "bare"

    def __post_init__(self):
        if self.atom_basis not in ("bare", "dressed"):
            raise ValueError("atom_basis must be 'bare' or 'dressed'")
        if self.n_max is not None and self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @property
    def sites_per_cavity(self) -> int:
        return self.atoms_per_cavity + (0 if self.n_max is None else 1)

    @property
    def photon_dim(self) -> int:
        return 0 if self.n_max is None else self.n_max + 1

    def space(self) -> HilbertSpace:
        dims = []
        for _ in range(self.n_cavities):
            dims.extend([self.atom_dim] * self.atoms_per_cavity)
            if self.n_max is not None:
                dims.append(self.photon_dim)
        return HilbertSpace(tuple(dims))

    def first_atom_site(self, cavity: int) -> int:
        return cavity * self.sites_per_cavity

    def photon_site(self, cavity: int) -> int:
        if self.n_max is None:
            raise ValueError("layout has no photon modes")
        return cavity * self.sites_per_cavity + self.atoms_per_cavity

    def embed_atom_block(self, op: SparseOperator, cavity: int,
                         space: HilbertSpace | None = None) -> SparseOperator:
        """Lift an operator on one cavity's atom block to the full space."""
        return embed_block(op, self.first_atom_site(cavity), space or self.space())

    def embed_photon(self, op: SparseOperator, cavity: int,
                     space: HilbertSpace | None = None) -> SparseOperator:
        return embed_block(op, self.photon_site(cavity), space or self.space())


def _sum_over_cavities(layout, space, block_op) -> SparseOperator:
    total = layout.embed_atom_block(block_op, 0, space)
    for j in range(1, layout.n_cavities):
        total = total + layout.embed_atom_block(block_op, j, space)
    return total


def _hopping_operator(layout, space, graph, hopping) -> SparseOperator:
    """-J sum_<jk> (a_j^dag a_k + a_j a_k^dag)."""
    total = SparseOperator.zero(space)
    if hopping == 0 or not graph.edges:
        return total
    a_local = spins.annihilation(layout.n_max)
    for j, k in graph.edges:
        aj = layout.embed_photon(a_local, j, space)
        ak = layout.embed_photon(a_local, k, space)
        term = aj.adjoint() @ ak
        total = total + (term + term.adjoint()) * (-hopping)
    return SparseOperator(space, total.matrix, hermitian=True)


def _drive_plus_hc(layout, space, block_op, amplitude) -> SparseOperator:
    summed = _sum_over_cavities(layout, space, block_op) * amplitude
    return SparseOperator(space, (summed + summed.adjoint()).matrix, hermitian=True)


def _check_graph(params: PhysicalParams, graph: CavityGraph):
    if params.hopping != 0 and graph.n_cavities > 1 and not graph.edges:
        warnings.warn("nonzero hopping on a graph without edges", stacklevel=3)


def build_full_hamiltonian(params: PhysicalParams, graph: CavityGraph,
                           n_max: int = 2) -> TimeDependentOperator:
    """Lab-frame model: three-level atoms, photons, classical drives.

    Rotating terms sit at the detunings ``delta1`` and ``delta2`` (each
    carrying the matching classical drive together with the cavity
    coupling) and, when the auxiliary lasers are on, at
    ``delta1 + aux_detuning`` and ``delta2 + aux_detuning``.  The static
    part holds the dressed-splitting drive, the photon hopping, and the
    Stark term on level b.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if params.stark_drive.imag != 0:
        raise ValueError("stark_drive must be real to build a Hermitian lab-frame model")
    _check_graph(params, graph)
    m = params.atoms_per_cavity
    layout = CavityLayout(graph.n_cavities, m, 3, n_max, atom_basis="bare")
    space = layout.space()

    lambda_eb = spins.collective_transition("e", "b", m)
    lambda_ea = spins.collective_transition("e", "a", m)
    lambda_ab = spins.collective_transition("a", "b", m)
    lambda_bb = spins.collective_transition("b", "b", m)
    a_local = spins.annihilation(n_max)

    def coupled_block(lam):
        """(collective transition) * a on one cavity (atoms block x photon)."""
        per_cavity_space = HilbertSpace((3,) * m + (n_max + 1,))
        lifted_atom = embed_block(lam, 0, per_cavity_space)
        lifted_photon = embed_block(a_local, m, per_cavity_space)
        return lifted_atom @ lifted_photon

    def summed_cavity_block(block):
        total = embed_block(block, layout.first_atom_site(0), space)
        for j in range(1, graph.n_cavities):
            total = total + embed_block(block, layout.first_atom_site(j), space)
        return total

    rotating = []
    term1 = SparseOperator.zero(space)
    if params.rabi1 != 0:
        term1 = term1 + _sum_over_cavities(layout, space, lambda_eb) * params.rabi1
    if params.g1 != 0:
        term1 = term1 + summed_cavity_block(coupled_block(lambda_ea)) * params.g1
    if term1.nnz:
        rotating.append((term1, params.delta1))

    term2 = SparseOperator.zero(space)
    if params.rabi2 != 0:
        term2 = term2 + _sum_over_cavities(layout, space, lambda_ea) * params.rabi2
    if params.g2 != 0:
        term2 = term2 + summed_cavity_block(coupled_block(lambda_eb)) * params.g2
    if term2.nnz:
        rotating.append((term2, params.delta2))

    if params.rabi3 != 0:
        rotating.append((_sum_over_cavities(layout, space, lambda_eb) * params.rabi3,
                         params.delta1 + params.aux_detuning))
    if params.rabi4 != 0:
        rotating.append((_sum_over_cavities(layout, space, lambda_ea) * params.rabi4,
                         params.delta2 + params.aux_detuning))

    static = _hopping_operator(layout, space, graph, params.hopping)
    if params.splitting != 0:
        static = static + _drive_plus_hc(layout, space, lambda_ab, params.splitting / 2.0)
    if params.stark_drive != 0:
        static = static + _sum_over_cavities(layout, space, lambda_bb) * (-params.stark_drive.real)
    static = SparseOperator(space, static.matrix, hermitian=True)
    return TimeDependentOperator(static, tuple(rotating))


def build_eliminated_hamiltonian(params: PhysicalParams, graph: CavityGraph,
                                 n_max: int = 2) -> TimeDependentOperator:
    """Two-level model after removing the excited state.

    Static content: a photon Stark term with the common coefficient
    g1^2/delta1 (per atom), two-photon drive terms with amplitudes
    ``raman_amplitude(g_j, rabi_j, delta_j)``, the dressed-splitting drive,
    and the hopping.  The builder warns when g1^2/delta1 and g2^2/delta2
    differ beyond 1e-6 relative, since a common coefficient is then only
    approximate.  Auxiliary lasers add one rotating term at the auxiliary
    detuning; the Stark term on level b stays static.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if params.stark_drive.imag != 0:
        raise ValueError("stark_drive must be real to build a Hermitian model")
    _check_graph(params, graph)
    stark1 = params.g1 ** 2 / params.delta1
    stark2 = params.g2 ** 2 / params.delta2
    scale = max(abs(stark1), abs(stark2))
    if scale and abs(stark1 - stark2) > 1e-6 * scale:
        warnings.warn(
            f"g1^2/delta1 = {stark1:.6g} and g2^2/delta2 = {stark2:.6g} differ; "
            "the common photon Stark coefficient is only approximate",
            stacklevel=2,
        )
    m = params.atoms_per_cavity
    layout = CavityLayout(graph.n_cavities, m, 2, n_max, atom_basis="bare")
    space = layout.space()

    lambda_ab = spins.collective_transition("a", "b", m, n_levels=2)
    lambda_ba = spins.collective_transition("b", "a", m, n_levels=2)
    lambda_bb = spins.collective_transition("b", "b", m, n_levels=2)
    lambda_aa = spins.collective_transition("a", "a", m, n_levels=2)
    populations = lambda_aa + lambda_bb  # = m * identity on two-level atoms
    a_local = spins.annihilation(n_max)
    number_local = SparseOperator(a_local.space, (a_local.adjoint() @ a_local).matrix, hermitian=True)

    per_cavity_space = HilbertSpace((2,) * m + (n_max + 1,))

    def cavity_block(atom_op, photon_op):
        return embed_block(atom_op, 0, per_cavity_space) @ embed_block(photon_op, m, per_cavity_space)

    def summed(block):
        total = embed_block(block, layout.first_atom_site(0), space)
        for j in range(1, graph.n_cavities):
            total = total + embed_block(block, layout.first_atom_site(j), space)
        return total

    static = _hopping_operator(layout, space, graph, params.hopping)
    static = static + summed(cavity_block(populations, number_local)) * (-stark1)
    mu1 = raman_amplitude(params.g1, params.rabi1, params.delta1)
    mu2 = raman_amplitude(params.g2, params.rabi2, params.delta2)
    drive_block = cavity_block(lambda_ba, a_local) * mu1 + cavity_block(lambda_ab, a_local) * mu2
    if drive_block.nnz:
        lifted = summed(drive_block) * (-1.0)
        static = static + lifted + lifted.adjoint()
    if params.splitting != 0:
        static = static + _drive_plus_hc(layout, space, lambda_ab, params.splitting / 2.0)
    if params.stark_drive != 0:
        static = static + _sum_over_cavities(layout, space, lambda_bb) * (-params.stark_drive.real)
    static = SparseOperator(space, static.matrix, hermitian=True)

    rotating = []
    if params.rabi3 != 0 or params.rabi4 != 0:
        if params.aux_detuning == 0:
            raise FrequencyCollisionError(
                "auxiliary lasers need a nonzero aux_detuning to stay distinct from the main pair"
            )
        mu3 = params.g1 * params.rabi3.conjugate() / 2.0 * (1.0 / params.delta1 + 1.0 / (params.delta1 + params.aux_detuning))
        mu4 = params.g2 * params.rabi4.conjugate() / 2.0 * (1.0 / params.delta2 + 1.0 / (params.delta2 + params.aux_detuning))
        aux_block = cavity_block(lambda_ba, a_local) * mu3 + cavity_block(lambda_ab, a_local) * mu4
        if aux_block.nnz:
            rotating.append((summed(aux_block) * (-1.0), -params.aux_detuning))
    return TimeDependentOperator(static, tuple(rotating))


def build_intermediate_hamiltonian(params: PhysicalParams, graph: CavityGraph,
                                   n_max: int = 2) -> TimeDependentOperator:
    """Dressed-frame model with collective spin operators.

    Without auxiliary lasers the rotating terms sit exactly at
    {shift, shift + splitting, shift - splitting}, where ``shift`` is the
    per-cavity photon Stark shift; the static part is the hopping.  The
    auxiliary group adds terms at {shift - aux, shift - aux +- splitting}
    and the level-b Stark drive adds one at the splitting itself.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if params.splitting == 0:
        raise FrequencyCollisionError("splitting must be nonzero (dressed states degenerate)")
    _check_graph(params, graph)
    c = derive_couplings(params)  # validates shift != +-splitting and the aux frequency set

    m = params.atoms_per_cavity
    layout = CavityLayout(graph.n_cavities, m, 2, n_max, atom_basis="dressed")
    space = layout.space()
    coll = spins.collective_spin_ops(m)
    a_local = spins.annihilation(n_max)
    per_cavity_space = HilbertSpace((2,) * m + (n_max + 1,))

    def cavity_block(atom_op):
        return embed_block(atom_op, 0, per_cavity_space) @ embed_block(a_local, m, per_cavity_space)

    def summed(block):
        total = embed_block(block, layout.first_atom_site(0), space)
        for j in range(1, graph.n_cavities):
            total = total + embed_block(block, layout.first_atom_site(j), space)
        return total

    rotating = []

    def add_group(base_freq, drive_sum, drive_diff):
        if drive_sum != 0:
            rotating.append((summed(cavity_block(coll.z)) * (-drive_sum), base_freq))
        if drive_diff != 0:
            rotating.append((summed(cavity_block(coll.plus)) * (-drive_diff / 2.0),
                             base_freq + params.splitting))
            rotating.append((summed(cavity_block(coll.minus)) * (drive_diff / 2.0),
                             base_freq - params.splitting))

    add_group(c.photon_shift, c.drive_sum, c.drive_diff)
    if params.rabi3 != 0 or params.rabi4 != 0:
        add_group(c.photon_shift_aux, c.aux_drive_sum, c.aux_drive_diff)
    if params.stark_drive != 0:
        rotating.append((_sum_over_cavities(layout, space, coll.plus) * (params.stark_drive / 2.0),
                         params.splitting))

    static = _hopping_operator(layout, space, graph, params.hopping)
    return TimeDependentOperator(static, tuple(rotating))


def effective_decay_rates(params: PhysicalParams) -> tuple[float, float]:
    """Ground-level decay rates induced by the classical drives.

    rate_a = decay * (|rabi1|^2/delta1^2 + |rabi3|^2/(delta1 + aux)^2)
    rate_b = decay * (|rabi2|^2/delta2^2 + |rabi4|^2/(delta2 + aux)^2)
    """
    def branch(rabi_main, delta_main, rabi_aux, delta_aux):
        total = abs(rabi_main) ** 2 / delta_main ** 2
        if rabi_aux != 0:
            if delta_aux == 0:
                raise ValueError("auxiliary detuning cancels the main detuning; rate diverges")
            total += abs(rabi_aux) ** 2 / delta_aux ** 2
        return total

    rate_a = params.decay * branch(params.rabi1, params.delta1,
                                   params.rabi3, params.delta1 + params.aux_detuning)
    rate_b = params.decay * branch(params.rabi2, params.delta2,
                                   params.rabi4, params.delta2 + params.aux_detuning)
    return rate_a, rate_b


def conditional_hamiltonian(h: SparseOperator, gamma_a: float, gamma_b: float,
                            layout: CavityLayout | None = None) -> SparseOperator:
    """H - (i/2) sum_j (gamma_a Lambda_j^aa + gamma_b Lambda_j^bb).

    With ``layout`` given, ``h`` lives on a bare-basis atomic space and the
    level populations are per-atom projectors.  Without a layout, ``h`` is
    a spin-model operator: each site of dimension d carries the full
    multiplet of d - 1 atoms, and the damping becomes
    (gamma_a + gamma_b) * m/2 + (gamma_a - gamma_b) * S^x per site.
    When the rates are equal either route reduces to
    -i * (total atom count) * gamma/2 times the identity.
    """
    if gamma_a < 0 or gamma_b < 0:
        raise ValueError("decay rates must be >= 0")
    import numpy as np
    import scipy.sparse as sparse_mod

    space = h.space
    damping = sparse_mod.csr_matrix((space.total_dim, space.total_dim), dtype=np.complex128)
    if layout is not None:
        if layout.space() != space:
            raise DimensionMismatchError("layout does not match the operator space")
        proj_aa = spins.collective_transition("a", "a", layout.atoms_per_cavity, n_levels=layout.atom_dim)
        proj_bb = spins.collective_transition("b", "b", layout.atoms_per_cavity, n_levels=layout.atom_dim)
        for j in range(layout.n_cavities):
            damping = damping + (gamma_a * layout.embed_atom_block(proj_aa, j, space).matrix
                                 + gamma_b * layout.embed_atom_block(proj_bb, j, space).matrix)
    else:
        from .core import embed as embed_site

        for site, dim in enumerate(space.local_dims):
            m_site = dim - 1
            ops = spins.spin_operators(m_site)
            sx = (ops.plus + ops.minus) * 0.5
            half = SparseOperator.identity(ops.z.space) * (m_site / 2.0)
            block = (half * (gamma_a + gamma_b)) + (sx * (gamma_a - gamma_b))
            damping = damping + embed_site(block, site, space).matrix
    return SparseOperator(space, h.matrix - 0.5j * damping, hermitian=False)


# ---------------------------------------------------------------------------
# Observables on a layout
# ---------------------------------------------------------------------------

def total_photon_number(layout: CavityLayout) -> SparseOperator:
    space = layout.space()
    n_local = spins.number_operator(layout.n_max)
    total = layout.embed_photon(n_local, 0, space)
    for j in range(1, layout.n_cavities):
        total = total + layout.embed_photon(n_local, j, space)
    return total


def total_excited_population(layout: CavityLayout) -> SparseOperator:
    if layout.atom_dim != 3:
        raise ValueError("excited-level population needs three-level atoms")
    space = layout.space()
    proj = spins.collective_transition("e", "e", layout.atoms_per_cavity)
    return _sum_over_cavities(layout, space, proj)


def cavity_spin_z(layout: CavityLayout, cavity: int) -> SparseOperator:
    """Dressed-basis collective S^z of one cavity, on the layout's space."""
    if layout.atom_basis == "dressed":
        block = spins.collective_spin_ops(layout.atoms_per_cavity).z
    else:
        block = spins.dressed_spin_ops(layout.atoms_per_cavity, n_levels=layout.atom_dim).z
    return layout.embed_atom_block(block, cavity)


def cavity_spin_pm(layout: CavityLayout, cavity: int) -> SparseOperator:
    """Collective S^+ S^- of one cavity (dressed basis)."""
    if layout.atom_basis == "dressed":
        coll = spins.collective_spin_ops(layout.atoms_per_cavity)
    else:
        coll = spins.dressed_spin_ops(layout.atoms_per_cavity, n_levels=layout.atom_dim)
    block = coll.plus @ coll.minus
    return layout.embed_atom_block(SparseOperator(block.space, block.matrix, hermitian=True), cavity)


def cavity_spin_zz(layout: CavityLayout, cavity_i: int, cavity_j: int) -> SparseOperator:
    zi = cavity_spin_z(layout, cavity_i)
    zj = cavity_spin_z(layout, cavity_j)
    prod = zi @ zj
    return SparseOperator(prod.space, prod.matrix, hermitian=True)


def dressed_product_state(layout: CavityLayout, pattern: list[str],
                          photon_vacuum: bool = True) -> QuantumState:
    """Product state with each cavity's atoms aligned up or down (dressed).

    ``pattern[j]`` is ``"up"`` or ``"down"`` for cavity j.  Photon modes
    (when present) start in vacuum.
    """
    import numpy as np

    if len(pattern) != layout.n_cavities:
        raise ValueError("need one orientation per cavity")
    if layout.atom_basis == "dressed":
        local_up = np.array([1.0, 0.0], dtype=np.complex128)
        local_down = np.array([0.0, 1.0], dtype=np.complex128)
    else:
        up, down = spins.dressed_state_vectors(layout.atom_dim)
        local_up, local_down = up, down
    vectors = []
    for orientation in pattern:
        if orientation not in ("up", "down"):
            raise ValueError("pattern entries must be 'up' or 'down'")
        local = local_up if orientation == "up" else local_down
        vectors.extend([local] * layout.atoms_per_cavity)
        if layout.n_max is not None:
            vac = np.zeros(layout.photon_dim, dtype=np.complex128)
            vac[0] = 1.0
            vectors.append(vac)
    return QuantumState.from_product(layout.space(), vectors)
