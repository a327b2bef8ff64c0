"""Closed-form reduction to an effective spin model, and the model itself.

The chain is: physical constants -> derived drive couplings
(:func:`derive_couplings`) -> the five spin-Hamiltonian coefficients
(:func:`spin_params_simple` for the two-laser configuration,
:func:`spin_params_full` for the six-field configuration at its special
detuning point) -> a concrete Hermitian operator
(:func:`build_spin_hamiltonian`).

The spin Hamiltonian on a graph reads

    H = sum_j [ casimir * S_j^2 + anisotropy * (S_j^z)^2 + field * S_j^z ]
      - sum_<jk> [ exchange_xy * (S_j^x S_k^x + S_j^y S_k^y)
                   + exchange_z * S_j^z S_k^z ]

with every site carrying the fixed spin S = two_s / 2, so the casimir term
is the constant casimir * S(S+1) per site.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import exp

import numpy as np

from .core import HilbertSpace, QuantumState, SparseOperator, embed, uniform_space
from .errors import FrequencyCollisionError
from .graphs import CavityGraph
from .params import PhysicalParams
from .spins import spin_operators


def raman_amplitude(g: float, rabi: complex, detuning: float) -> complex:
    """Two-photon amplitude g * conj(rabi) / detuning of one laser-cavity pair."""
    return g * complex(rabi).conjugate() / detuning


@dataclass(frozen=True)
class DerivedCouplings:
    """Slow-frame couplings obtained from the physical constants.

    ``photon_shift`` is the per-cavity photon Stark shift (atom number
    times g1^2/delta1); ``drive_sum``/``drive_diff`` are the sum and
    difference of the two main Raman amplitudes, coupling the photon to
    S^z and S^+- respectively.  The aux pair contributes the same
    structure at ``photon_shift_aux = photon_shift - aux_detuning``, and
    ``stark_drive`` couples directly to S^+- at the splitting frequency.
    """

    photon_shift: float
    splitting: float
    drive_sum: complex
    drive_diff: complex
    aux_drive_sum: complex
    aux_drive_diff: complex
    stark_drive: complex
    hopping: float
    photon_shift_aux: float

    @property
    def uses_aux(self) -> bool:
        return self.aux_drive_sum != 0 or self.aux_drive_diff != 0 or self.stark_drive != 0


def _check_distinct(named_freqs, tol):
    """Reject coinciding |frequencies|.

    Both rotation senses of every term act (each comes with its conjugate),
    so two slow processes interfere secularly whenever their frequency
    magnitudes meet; comparing absolute values also catches multi-photon
    resonances like splitting = 2 * shift.
    """
    for i, (name_i, f_i) in enumerate(named_freqs):
        for name_j, f_j in named_freqs[i + 1:]:
            scale = max(abs(f_i), abs(f_j), 1.0)
            if abs(abs(f_i) - abs(f_j)) <= tol * scale:
                raise FrequencyCollisionError(
                    f"frequencies '{name_i}' ({f_i:.6g}) and '{name_j}' ({f_j:.6g}) "
                    "collide in magnitude"
                )


def derive_couplings(params: PhysicalParams, collision_tol: float = 1e-9) -> DerivedCouplings:
    """Evaluate the closed forms for the slow-frame couplings.

    Raises :class:`FrequencyCollisionError` when the photon shift meets
    +-splitting, or, with the auxiliary fields on, when any two members of
    the full slow-frequency set coincide.
    """
    lam = params.atoms_per_cavity * params.g1 ** 2 / params.delta1
    omega = params.splitting
    mu1 = raman_amplitude(params.g1, params.rabi1, params.delta1)
    mu2 = raman_amplitude(params.g2, params.rabi2, params.delta2)
    mu3 = params.g1 * params.rabi3.conjugate() / 2.0 * (
        1.0 / params.delta1 + 1.0 / (params.delta1 + params.aux_detuning))
    mu4 = params.g2 * params.rabi4.conjugate() / 2.0 * (
        1.0 / params.delta2 + 1.0 / (params.delta2 + params.aux_detuning))
    c = DerivedCouplings(
        photon_shift=lam,
        splitting=omega,
        drive_sum=mu1 + mu2,
        drive_diff=mu1 - mu2,
        aux_drive_sum=mu3 + mu4,
        aux_drive_diff=mu3 - mu4,
        stark_drive=params.stark_drive,
        hopping=params.hopping,
        photon_shift_aux=lam - params.aux_detuning,
    )
    freqs = [
        ("static", 0.0),
        ("splitting", omega),
        ("shift", lam),
        ("shift+splitting", lam + omega),
        ("shift-splitting", lam - omega),
    ]
    if c.uses_aux:
        freqs += [
            ("aux shift", c.photon_shift_aux),
            ("aux shift+splitting", c.photon_shift_aux + omega),
            ("aux shift-splitting", c.photon_shift_aux - omega),
        ]
    _check_distinct(freqs, collision_tol)
    return c


@dataclass(frozen=True)
class SpinModelParams:
    """Coefficients of the effective spin Hamiltonian on a graph.

    ``field_profile`` optionally replaces the uniform ``field`` with a
    per-site value (used for symmetry-breaking preparation sweeps).  The
    ``inverted`` flag marks parameter sets produced by
    :func:`afm_equivalent_params`: low-energy queries on the target model
    must then read the highest eigenstate of this realizable one.
    """

    casimir: float
    anisotropy: float
    field: float
    exchange_xy: float
    exchange_z: float
    two_s: int
    graph: CavityGraph
    field_profile: tuple[float, ...] | None = None
    inverted: bool = False

    def __post_init__(self):
        if self.two_s < 1:
            raise ValueError("two_s must be >= 1")
        for name in ("casimir", "anisotropy", "field", "exchange_xy", "exchange_z"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite")
        if self.field_profile is not None:
            if len(self.field_profile) != self.graph.n_cavities:
                raise ValueError("field_profile needs one value per site")
            object.__setattr__(self, "field_profile", tuple(float(v) for v in self.field_profile))

    def site_field(self, site: int) -> float:
        return self.field_profile[site] if self.field_profile is not None else self.field

    @property
    def spin(self) -> float:
        return self.two_s / 2.0


def spin_params_simple(c: DerivedCouplings, m_atoms: int, graph: CavityGraph) -> SpinModelParams:
    """Coefficient map for the two-laser configuration.

    Valid for any shift/splitting combination away from resonance; rejects
    inputs with auxiliary couplings (use :func:`spin_params_full`).
    """
    if c.uses_aux:
        raise ValueError("auxiliary couplings present; use spin_params_full")
    lam, omega = c.photon_shift, c.splitting
    denom = lam * lam - omega * omega
    if denom == 0 or lam == 0:
        raise FrequencyCollisionError("photon shift equals +-splitting (or vanishes)")
    diff_sq = abs(c.drive_diff) ** 2
    sum_sq = abs(c.drive_sum) ** 2
    casimir = lam / denom * diff_sq / 2.0
    return SpinModelParams(
        casimir=casimir,
        anisotropy=sum_sq / lam - casimir,
        field=-omega / denom * diff_sq / 2.0,
        exchange_xy=c.hopping / 2.0 * (abs(c.drive_diff / (lam + omega)) ** 2
                                       + abs(c.drive_diff / (lam - omega)) ** 2),
        exchange_z=2.0 * c.hopping * abs(c.drive_sum / lam) ** 2,
        two_s=m_atoms,
        graph=graph,
    )


# The six-field coefficients below hold at shift = 3 * splitting with the
# auxiliary group parked at shift - aux_detuning = -6 * splitting.
_FULL_MAP_RTOL = 1e-9


def spin_params_full(c: DerivedCouplings, m_atoms: int, graph: CavityGraph) -> SpinModelParams:
    """Coefficient map for the six-field configuration (special detunings).

    Requires shift = 3 * splitting, and additionally
    shift - aux_detuning = -6 * splitting whenever the auxiliary drive
    couplings are nonzero.  Other detuning choices have no closed form
    implemented here and are rejected rather than guessed.
    """
    lam, omega = c.photon_shift, c.splitting
    if omega <= 0:
        raise FrequencyCollisionError("this map requires a positive splitting")
    if abs(lam - 3.0 * omega) > _FULL_MAP_RTOL * max(abs(lam), 1.0):
        raise FrequencyCollisionError(
            f"map implemented only at shift = 3*splitting; got shift={lam:.6g}, splitting={omega:.6g}"
        )
    aux_active = c.aux_drive_sum != 0 or c.aux_drive_diff != 0
    if aux_active and abs(c.photon_shift_aux + 6.0 * omega) > _FULL_MAP_RTOL * max(abs(lam), 1.0):
        raise FrequencyCollisionError(
            "map implemented only at (shift - aux_detuning) = -6*splitting; "
            f"got {c.photon_shift_aux:.6g} with splitting {omega:.6g}"
        )
    d12 = abs(c.drive_diff) ** 2
    s12 = abs(c.drive_sum) ** 2
    d34 = abs(c.aux_drive_diff) ** 2
    s34 = abs(c.aux_drive_sum) ** 2
    z2 = abs(c.stark_drive) ** 2
    j = c.hopping
    return SpinModelParams(
        casimir=(9.0 / 16.0 * d12 - 9.0 / 35.0 * d34) / lam,
        anisotropy=(s12 - 9.0 / 16.0 * d12 - 0.5 * s34 + 9.0 / 35.0 * d34) / lam,
        field=(1.5 * z2 - 3.0 / 16.0 * d12 - 3.0 / 70.0 * d34) / lam,
        exchange_xy=j / lam ** 2 * (45.0 / 32.0 * d12 + 333.0 / 1225.0 * d34),
        exchange_z=j / lam ** 2 * (2.0 * s12 + 0.5 * s34),
        two_s=m_atoms,
        graph=graph,
    )


def build_spin_hamiltonian(sp: SpinModelParams) -> SparseOperator:
    """Assemble the spin Hamiltonian on (two_s + 1)^n_cavities."""
    n = sp.graph.n_cavities
    space = uniform_space(sp.two_s + 1, n)
    ops = spin_operators(sp.two_s)
    s = sp.spin
    sz2 = SparseOperator(ops.z.space, (ops.z @ ops.z).matrix, hermitian=True)
    sx = (ops.plus + ops.minus) * 0.5
    sy = (ops.plus - ops.minus) * (-0.5j)
    sy = SparseOperator(sy.space, sy.matrix, hermitian=True)

    total = SparseOperator.zero(space)
    onsite_const = sp.casimir * s * (s + 1.0)
    if onsite_const != 0:
        total = total + SparseOperator.identity(space) * (onsite_const * n)
    for site in range(n):
        if sp.anisotropy != 0:
            total = total + embed(sz2, site, space) * sp.anisotropy
        field = sp.site_field(site)
        if field != 0:
            total = total + embed(ops.z, site, space) * field
    for i, j in sp.graph.edges:
        if sp.exchange_xy != 0:
            xx = embed(sx, i, space) @ embed(sx, j, space)
            yy = embed(sy, i, space) @ embed(sy, j, space)
            total = total + (xx + yy) * (-sp.exchange_xy)
        if sp.exchange_z != 0:
            zz = embed(ops.z, i, space) @ embed(ops.z, j, space)
            total = total + zz * (-sp.exchange_z)
    return SparseOperator(space, total.matrix, hermitian=True)


def afm_equivalent_params(sp: SpinModelParams) -> SpinModelParams:
    """Realizable parameters whose Hamiltonian is -1 times the given one.

    Negative-exchange (antiferromagnetic) targets become positive-exchange
    realizable sets with all on-site coefficients negated; the ``inverted``
    flag flips so downstream code reads ground-state questions off the
    highest eigenstate.  Applying the map twice restores the input.
    """
    profile = None
    if sp.field_profile is not None:
        profile = tuple(-v for v in sp.field_profile)
    return replace(
        sp,
        casimir=-sp.casimir,
        anisotropy=-sp.anisotropy,
        field=-sp.field,
        exchange_xy=-sp.exchange_xy,
        exchange_z=-sp.exchange_z,
        field_profile=profile,
        inverted=not sp.inverted,
    )


def depolarized_expectation(obs: SparseOperator, psi: QuantumState, t: float,
                            n_cavities: int, m_atoms: int, gamma: float) -> float:
    """Observable average under uniform depolarization of the spin register.

    Mixes the coherent expectation value with the maximally mixed one:
    exp(-N*M*gamma*t) <psi|O|psi> + (1 - exp(-N*M*gamma*t)) tr(O)/dim.
    The density matrix is never materialized.
    """
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    weight = exp(-n_cavities * m_atoms * gamma * t)
    coherent = obs.expectation(psi).real
    mixed = obs.trace().real / obs.dim
    return weight * coherent + (1.0 - weight) * mixed
