"""Time evolution engines.

Static Hermitian evolution runs a Krylov (Arnoldi with reorthogonalization)
approximation of exp(-iHt)|psi> with adaptive substeps; the same machinery
propagates non-Hermitian conditional Hamiltonians without renormalizing, so
the squared norm tracks the no-decay probability.

Time-dependent operators are advanced by midpoint-frozen piecewise-constant
steps: the operator is evaluated at each interval midpoint and the state is
advanced under that frozen snapshot.  When every rotating frequency is an
integer multiple of a common base, the drive is periodic and the per-step
unitaries repeat period after period; for moderate dimensions they are then
built densely once per period and whole periods are applied via binary
matrix powering.  This is the same midpoint-frozen scheme, evaluated
without redundant work, and it makes dispersive-regime windows (slow
effective dynamics under fast drives) affordable.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import QuantumState, SparseOperator
from .effective import SpinModelParams, build_spin_hamiltonian, derive_couplings, spin_params_full, spin_params_simple
from .errors import ConvergenceError, RegimeError, StepResolutionError
from .fullmodel import (
    CavityLayout,
    TimeDependentOperator,
    build_eliminated_hamiltonian,
    build_full_hamiltonian,
    build_intermediate_hamiltonian,
    cavity_spin_pm,
    cavity_spin_z,
    cavity_spin_zz,
    dressed_product_state,
    total_excited_population,
    total_photon_number,
)
from .graphs import CavityGraph
from .params import PhysicalParams
from .regime import RegimeThresholds, check_conditions
from .spins import spin_operators

_TIME_EPS = 1e-12


@dataclass(frozen=True)
class EvolutionSettings:
    """Knobs of the propagators.

    ``max_step`` bounds the outer (midpoint) step of time-dependent runs;
    it must still resolve the fastest rotating term, which by default means
    at least ``min_steps_per_period`` steps per fast period.
    ``use_periodic_cache`` enables the periodic reuse of step unitaries for
    commensurate frequency sets up to ``dense_cutoff`` dimensions.
    """

    krylov_dim: int = 30
    step_tolerance: float = 1e-10
    max_step: float | None = None
    renormalize: bool = True
    min_steps_per_period: int = 20
    use_periodic_cache: bool = True
    dense_cutoff: int = 512

    def __post_init__(self):
        if self.krylov_dim < 2:
            raise ValueError("krylov_dim must be >= 2")
        if self.step_tolerance <= 0:
            raise ValueError("step_tolerance must be positive")
        if self.min_steps_per_period < 2:
            raise ValueError("min_steps_per_period must be >= 2")


# ---------------------------------------------------------------------------
# Krylov exp(-iHt)v
# ---------------------------------------------------------------------------

def _arnoldi_step(matvec, v0, dt, m_max, tol):
    """One Krylov approximation of exp(-i dt H) v0.

    Returns (result, error_estimate).  A happy breakdown (invariant
    subspace) makes the result exact and the estimate zero.
    """
    beta = np.linalg.norm(v0)
    if beta == 0.0 or dt == 0.0:
        return v0.copy(), 0.0
    n = v0.shape[0]
    m_max = min(m_max, n)
    basis = np.empty((m_max, n), dtype=np.complex128)
    hess = np.zeros((m_max + 1, m_max), dtype=np.complex128)
    basis[0] = v0 / beta
    m = m_max
    exact = False
    scale = 0.0
    for j in range(m_max):
        w = matvec(basis[j])
        for _ in range(2):  # modified Gram-Schmidt with one re-pass
            for i in range(j + 1):
                c = np.vdot(basis[i], w)
                hess[i, j] += c
                w -= c * basis[i]
        h_next = np.linalg.norm(w)
        hess[j + 1, j] = h_next
        scale = max(scale, np.abs(hess[: j + 2, j]).max())
        if h_next <= 1e-13 * max(scale, 1.0):
            m = j + 1
            exact = True
            break
        if j + 1 < m_max:
            basis[j + 1] = w / h_next
    small = scipy.linalg.expm(-1j * dt * hess[:m, :m])
    coeffs = beta * small[:, 0]
    result = basis[:m].T @ coeffs
    if exact:
        return result, 0.0
    err = float(abs(hess[m, m - 1]) * abs(coeffs[m - 1]))
    return result, err


def _expmv_adaptive(matvec, v0, t_total, settings: EvolutionSettings):
    """exp(-i H t_total) v0 with adaptive substeps meeting step_tolerance."""
    if t_total < 0:
        raise ValueError("evolution time must be >= 0")
    if t_total == 0.0:
        return v0.copy()
    state = v0
    remaining = t_total
    dt = t_total
    floor = t_total * 1e-12
    while remaining > _TIME_EPS * t_total:
        dt = min(dt, remaining)
        result, err = _arnoldi_step(matvec, state, dt, settings.krylov_dim, settings.step_tolerance)
        if err <= settings.step_tolerance:
            state = result
            remaining -= dt
            if err < 0.1 * settings.step_tolerance:
                dt *= 1.8  # cheap growth; next iteration clips to remaining
        else:
            dt *= 0.5
            if dt < floor:
                raise ConvergenceError(
                    f"Krylov step size underflow (dt={dt:.3e}); raise krylov_dim or step_tolerance"
                )
    return state


def evolve_static(h: SparseOperator, psi0: QuantumState, t: float,
                  settings: EvolutionSettings | None = None) -> QuantumState:
    """Propagate |psi> under a static Hermitian operator for time t."""
    if not h.hermitian:
        raise ValueError("evolve_static needs a hermitian operator; use evolve_conditional otherwise")
    settings = settings or EvolutionSettings()
    vec = _expmv_adaptive(h.matvec, psi0.amplitudes, t, settings)
    state = QuantumState(h.space, vec)
    return state.normalized() if settings.renormalize else state


def evolve_conditional(h_c: SparseOperator, psi0: QuantumState, t: float,
                       settings: EvolutionSettings | None = None) -> QuantumState:
    """Propagate under a (generally non-Hermitian) conditional Hamiltonian.

    The result is deliberately left unnormalized: its squared norm is the
    probability that no decay event occurred up to time t.
    """
    settings = settings or EvolutionSettings(renormalize=False)
    if settings.renormalize:
        raise ValueError("conditional evolution must keep the decaying norm (renormalize=False)")
    vec = _expmv_adaptive(h_c.matvec, psi0.amplitudes, t, settings)
    return QuantumState(h_c.space, vec)


# ---------------------------------------------------------------------------
# Midpoint-frozen propagation of time-dependent operators
# ---------------------------------------------------------------------------

def _float_gcd(a: float, b: float, tol: float) -> float:
    a, b = abs(a), abs(b)
    while b > tol:
        r = math.fmod(a, b)
        if r < tol or b - r < tol:
            r = 0.0
        a, b = b, r
    return a


def _dense_step_unitary(tdo: TimeDependentOperator, t_mid: float, dt: float) -> np.ndarray:
    energies, vectors = np.linalg.eigh(tdo.at(t_mid).to_dense())
    phases = np.exp(-1j * dt * energies)
    return (vectors * phases) @ vectors.conj().T


class PeriodicStepCache:
    """Midpoint step unitaries of one drive period, with fast powers.

    ``h_step`` divides the period exactly (``m_steps`` steps per period),
    so step ``s`` of every period shares the unitary built from the first
    period's midpoint; whole periods are applied by binary powering of the
    period unitary.
    """

    def __init__(self, tdo: TimeDependentOperator, period: float, m_steps: int):
        self.tdo = tdo
        self.period = period
        self.m_steps = m_steps
        self.h_step = period / m_steps
        self.step_unitaries = [
            _dense_step_unitary(tdo, (s + 0.5) * self.h_step, self.h_step)
            for s in range(m_steps)
        ]
        u = self.step_unitaries[0].copy()
        prefixes = [np.eye(u.shape[0], dtype=np.complex128), self.step_unitaries[0]]
        for s in range(1, m_steps):
            u = self.step_unitaries[s] @ u
            prefixes.append(u.copy())
        self.period_unitary = u
        self._prefixes = prefixes  # prefixes[r] advances r steps from a period start
        self._powers: dict[int, np.ndarray] = {}

    def power(self, n_periods: int) -> np.ndarray:
        """period_unitary ** n_periods by binary powering (memoized)."""
        if n_periods == 0:
            return np.eye(self.period_unitary.shape[0], dtype=np.complex128)
        if n_periods in self._powers:
            return self._powers[n_periods]
        result = None
        square = self.period_unitary
        k = n_periods
        while k:
            if k & 1:
                result = square if result is None else square @ result
            k >>= 1
            if k:
                square = square @ square
        self._powers[n_periods] = result
        return result

    def advance(self, vec: np.ndarray, n_steps: int) -> np.ndarray:
        """Apply n_steps midpoint steps starting from a period boundary."""
        n_periods, rest = divmod(n_steps, self.m_steps)
        if n_periods:
            vec = self.power(n_periods) @ vec
        if rest:
            vec = self._prefixes[rest] @ vec
        return vec


def _resolution_bound(tdo: TimeDependentOperator, settings: EvolutionSettings) -> float:
    nu_max = tdo.max_frequency
    return 2.0 * math.pi / (nu_max * settings.min_steps_per_period)


def _step_cap(tdo: TimeDependentOperator, settings: EvolutionSettings) -> float:
    bound = _resolution_bound(tdo, settings)
    if settings.max_step is not None:
        if settings.max_step > bound * (1.0 + 1e-12):
            raise StepResolutionError(
                f"max_step {settings.max_step:.6g} cannot resolve the fastest rotating term "
                f"|nu| = {tdo.max_frequency:.6g} (need <= {bound:.6g})"
            )
        return settings.max_step
    return bound


def _build_periodic_cache(tdo: TimeDependentOperator, step_cap: float,
                          t_final: float, settings: EvolutionSettings):
    if not settings.use_periodic_cache:
        return None
    if tdo.space.total_dim > settings.dense_cutoff:
        return None
    freqs = tdo.frequencies
    tol = 1e-9 * max(freqs)
    base = freqs[0]
    for f in freqs[1:]:
        base = _float_gcd(base, f, tol)
        if base <= tol:
            return None
    for f in freqs:
        k = round(f / base)
        if k <= 0 or abs(f - k * base) > tol:
            return None
    period = 2.0 * math.pi / base
    m_steps = max(1, math.ceil(period / step_cap - 1e-9))
    if m_steps > 100_000:
        return None
    if t_final < 2.0 * period:
        return None  # too short for the cache to pay off
    return PeriodicStepCache(tdo, period, m_steps)


def evolve_time_dependent(tdo: TimeDependentOperator, psi0: QuantumState, t_final: float,
                          settings: EvolutionSettings | None = None) -> QuantumState:
    """Midpoint-frozen piecewise-constant propagation to t_final."""
    settings = settings or EvolutionSettings()
    if t_final < 0:
        raise ValueError("evolution time must be >= 0")
    if tdo.is_static:
        return evolve_static(tdo.static_part, psi0, t_final, settings)
    if t_final == 0.0:
        return psi0.copy()
    cap = _step_cap(tdo, settings)

    cache = _build_periodic_cache(tdo, cap, t_final, settings)
    if cache is not None:
        n_steps = math.floor(t_final / cache.h_step + 1e-9)
        vec = cache.advance(psi0.amplitudes, n_steps)
        remainder = t_final - n_steps * cache.h_step
        if remainder > 1e-9 * cache.h_step:
            u_last = _dense_step_unitary(tdo, n_steps * cache.h_step + remainder / 2.0, remainder)
            vec = u_last @ vec
        state = QuantumState(tdo.space, vec)
        return state.normalized() if settings.renormalize else state

    n_steps = max(1, math.ceil(t_final / cap - 1e-12))
    h_step = t_final / n_steps
    vec = psi0.amplitudes
    for s in range(n_steps):
        frozen = tdo.at((s + 0.5) * h_step)
        vec = _expmv_adaptive(frozen.matvec, vec, h_step, settings)
    state = QuantumState(tdo.space, vec)
    return state.normalized() if settings.renormalize else state


def sample_time_dependent(tdo: TimeDependentOperator, psi0: QuantumState,
                          settings: EvolutionSettings, t_target: float, n_points: int):
    """States at n_points+1 times spanning >= t_target.

    With a periodic cache the grid is snapped to whole drive periods (the
    observables of interest move on far slower scales); otherwise the grid
    is uniform and the propagation steps through it sequentially.
    Returns (times, list_of_vectors).
    """
    cap = _step_cap(tdo, settings)
    cache = _build_periodic_cache(tdo, cap, t_target, settings)
    vecs = [psi0.amplitudes.copy()]
    if cache is not None:
        q_periods = max(1, math.ceil(t_target / (n_points * cache.period) - 1e-9))
        block = cache.power(q_periods)
        times = [0.0]
        vec = psi0.amplitudes
        for i in range(1, n_points + 1):
            vec = block @ vec
            if settings.renormalize:
                vec = vec / np.linalg.norm(vec)
            vecs.append(vec)
            times.append(i * q_periods * cache.period)
        return np.array(times), vecs
    times = np.linspace(0.0, t_target, n_points + 1)
    vec = psi0.amplitudes
    for i in range(1, n_points + 1):
        t0, t1 = times[i - 1], times[i]
        span = t1 - t0
        n_steps = max(1, math.ceil(span / cap - 1e-12))
        h_step = span / n_steps
        for s in range(n_steps):
            frozen = tdo.at(t0 + (s + 0.5) * h_step)
            vec = _expmv_adaptive(frozen.matvec, vec, h_step, settings)
        if settings.renormalize:
            vec = vec / np.linalg.norm(vec)
        vecs.append(vec.copy())
    return times, vecs


def sample_static(h: SparseOperator, psi0: QuantumState,
                  settings: EvolutionSettings, times) -> list[np.ndarray]:
    """States of a static Hermitian evolution at the given increasing times.

    Small operators are diagonalized once and sampled by phase rotation
    (exact); larger ones are marched between grid points with the Krylov
    propagator.
    """
    if h.dim <= settings.dense_cutoff:
        energies, vectors = np.linalg.eigh(h.to_dense())
        weights = vectors.conj().T @ psi0.amplitudes
        return [vectors @ (np.exp(-1j * energies * float(t)) * weights) for t in times]
    vecs = [psi0.amplitudes.copy()]
    vec = psi0.amplitudes
    for t_prev, t_next in zip(times[:-1], times[1:]):
        vec = _expmv_adaptive(h.matvec, vec, float(t_next - t_prev), settings)
        if settings.renormalize:
            vec = vec / np.linalg.norm(vec)
        vecs.append(vec.copy())
    return vecs


# ---------------------------------------------------------------------------
# Adiabatic schedules
# ---------------------------------------------------------------------------

def _interp(a: float, b: float, w: float) -> float:
    return a + (b - a) * w


@dataclass(frozen=True)
class AdiabaticSchedule:
    """Piecewise-linear interpolation between spin-model parameter sets.

    Control points are (s, params) with s strictly increasing from 0 to 1;
    every coefficient (including a per-site field profile, when present at
    either end of a segment) is interpolated linearly in s.
    """

    duration: float
    control_points: tuple[tuple[float, SpinModelParams], ...]

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        pts = tuple((float(s), p) for s, p in self.control_points)
        if len(pts) < 2:
            raise ValueError("need at least the s=0 and s=1 control points")
        svals = [s for s, _ in pts]
        if svals[0] != 0.0 or svals[-1] != 1.0:
            raise ValueError("control points must start at s=0 and end at s=1")
        if any(s1 >= s2 for s1, s2 in zip(svals, svals[1:])):
            raise ValueError("control-point positions must increase strictly")
        first = pts[0][1]
        for _, p in pts[1:]:
            if p.two_s != first.two_s or p.graph != first.graph or p.inverted != first.inverted:
                raise ValueError("control points must share spin, graph, and inversion flag")
        object.__setattr__(self, "control_points", pts)

    @property
    def inverted(self) -> bool:
        return self.control_points[0][1].inverted

    def at(self, s: float) -> SpinModelParams:
        s = min(max(s, 0.0), 1.0)
        svals = [x for x, _ in self.control_points]
        hi = min(max(bisect_right(svals, s), 1), len(svals) - 1)
        s0, p0 = self.control_points[hi - 1]
        s1, p1 = self.control_points[hi]
        w = 0.0 if s1 == s0 else (s - s0) / (s1 - s0)
        profile = None
        if p0.field_profile is not None or p1.field_profile is not None:
            prof0 = p0.field_profile or tuple(p0.field for _ in range(p0.graph.n_cavities))
            prof1 = p1.field_profile or tuple(p1.field for _ in range(p1.graph.n_cavities))
            profile = tuple(_interp(a, b, w) for a, b in zip(prof0, prof1))
        return SpinModelParams(
            casimir=_interp(p0.casimir, p1.casimir, w),
            anisotropy=_interp(p0.anisotropy, p1.anisotropy, w),
            field=_interp(p0.field, p1.field, w),
            exchange_xy=_interp(p0.exchange_xy, p1.exchange_xy, w),
            exchange_z=_interp(p0.exchange_z, p1.exchange_z, w),
            two_s=p0.two_s,
            graph=p0.graph,
            field_profile=profile,
            inverted=p0.inverted,
        )


@dataclass
class AdiabaticResult:
    final_state: QuantumState
    fidelity: float
    target_energy: float
    n_steps: int


def _extremal_eigenspace(h: SparseOperator, highest: bool, tol_scale: float = 1e-8):
    """(energy, orthonormal columns) of the lowest or highest eigenspace."""
    dense = h.to_dense()
    energies, vectors = np.linalg.eigh(dense)
    spread = max(energies[-1] - energies[0], 1.0)
    if highest:
        e_star = energies[-1]
        mask = energies >= e_star - tol_scale * spread
    else:
        e_star = energies[0]
        mask = energies <= e_star + tol_scale * spread
    return float(e_star), vectors[:, mask]


def _spectral_norm_estimate(h: SparseOperator) -> float:
    diag = np.abs(h.matrix.diagonal()).max() if h.nnz else 0.0
    row_sums = np.abs(h.matrix).sum(axis=1).max()
    return float(max(diag, row_sums, 1e-12))


def adiabatic_prepare(schedule: AdiabaticSchedule, psi0: QuantumState,
                      settings: EvolutionSettings | None = None,
                      n_steps: int | None = None) -> AdiabaticResult:
    """Sweep the spin Hamiltonian along the schedule and score the result.

    ``psi0`` must be an eigenstate of the s=0 Hamiltonian (residual below
    1e-8).  The returned fidelity is the squared projection of the final
    state onto the exact target eigenspace of the s=1 Hamiltonian: the
    ground space normally, the highest space when the schedule carries the
    spectrum-inversion flag.
    """
    settings = settings or EvolutionSettings()
    h0 = build_spin_hamiltonian(schedule.at(0.0))
    vec = psi0.amplitudes
    h_vec = h0.matvec(vec)
    energy = np.vdot(vec, h_vec).real / psi0.norm_squared
    residual = np.linalg.norm(h_vec - energy * vec) / psi0.norm
    if residual > 1e-8:
        raise ValueError(f"initial state is not an eigenstate of the s=0 Hamiltonian (residual {residual:.3e})")

    if n_steps is None:
        norm_bound = max(_spectral_norm_estimate(build_spin_hamiltonian(p))
                         for _, p in schedule.control_points)
        n_steps = max(256, math.ceil(8.0 * schedule.duration * norm_bound))
        if settings.max_step is not None:
            n_steps = max(n_steps, math.ceil(schedule.duration / settings.max_step))
    h_step = schedule.duration / n_steps
    state = vec
    for k in range(n_steps):
        s_mid = (k + 0.5) * h_step / schedule.duration
        frozen = build_spin_hamiltonian(schedule.at(s_mid))
        state = _expmv_adaptive(frozen.matvec, state, h_step, settings)
    if settings.renormalize:
        state = state / np.linalg.norm(state)

    h1 = build_spin_hamiltonian(schedule.at(1.0))
    target_energy, basis = _extremal_eigenspace(h1, highest=schedule.inverted)
    fidelity = float(np.linalg.norm(basis.conj().T @ state) ** 2)
    final = QuantumState(h1.space, state)
    return AdiabaticResult(final, fidelity, target_energy, n_steps)


def minimum_gap(schedule: AdiabaticSchedule, n_samples: int = 101) -> float:
    """Smallest spacing between the tracked extremal level and its neighbour.

    Tracked level = ground state, or the highest state for inverted
    schedules.  Dense diagonalization, so desk-scale dimensions only.
    """
    gaps = []
    for s in np.linspace(0.0, 1.0, n_samples):
        h = build_spin_hamiltonian(schedule.at(float(s)))
        energies = np.linalg.eigvalsh(h.to_dense())
        gap = energies[-1] - energies[-2] if schedule.inverted else energies[1] - energies[0]
        gaps.append(gap)
    return float(min(gaps))


# ---------------------------------------------------------------------------
# Full-model vs effective-model comparison
# ---------------------------------------------------------------------------

@dataclass
class ComparisonReport:
    """Observable-by-observable deviation between two descriptions."""

    model: str
    times: np.ndarray
    reference_series: dict[str, np.ndarray]
    effective_series: dict[str, np.ndarray]
    deviations: dict[str, float] = field(default_factory=dict)
    photon_series: np.ndarray | None = None
    excited_series: np.ndarray | None = None
    max_photon_population: float = 0.0
    max_excited_population: float | None = None
    spin_params: SpinModelParams | None = None

    @property
    def max_deviation(self) -> float:
        return max(self.deviations.values()) if self.deviations else 0.0


def _spin_observables(sp: SpinModelParams):
    """Per-site z, per-site S+S-, and edge zz operators on the spin space."""
    from .core import embed, uniform_space

    n = sp.graph.n_cavities
    space = uniform_space(sp.two_s + 1, n)
    ops = spin_operators(sp.two_s)
    pm_local = SparseOperator(ops.z.space, (ops.plus @ ops.minus).matrix, hermitian=True)
    out = {}
    for j in range(n):
        out[f"sz[{j}]"] = embed(ops.z, j, space)
        out[f"pm[{j}]"] = embed(pm_local, j, space)
    for i, j in sp.graph.edges:
        zz = embed(ops.z, i, space) @ embed(ops.z, j, space)
        out[f"zz[{i},{j}]"] = SparseOperator(space, zz.matrix, hermitian=True)
    return space, out


def _layout_observables(layout: CavityLayout, graph: CavityGraph):
    out = {}
    for j in range(layout.n_cavities):
        out[f"sz[{j}]"] = cavity_spin_z(layout, j)
        out[f"pm[{j}]"] = cavity_spin_pm(layout, j)
    for i, j in graph.edges:
        out[f"zz[{i},{j}]"] = cavity_spin_zz(layout, i, j)
    return out


def spin_basis_state(sp: SpinModelParams, pattern) -> QuantumState:
    """Product state with each site fully polarized up or down."""
    from .core import uniform_space

    n = sp.graph.n_cavities
    space = uniform_space(sp.two_s + 1, n)
    vectors = []
    for orientation in pattern:
        local = np.zeros(sp.two_s + 1, dtype=np.complex128)
        local[0 if orientation == "up" else sp.two_s] = 1.0
        vectors.append(local)
    return QuantumState.from_product(space, vectors)


def compare_full_vs_effective(params: PhysicalParams, graph: CavityGraph, n_max: int = 2,
                              t_grid: np.ndarray | None = None,
                              n_points: int = 160,
                              model: str = "full",
                              settings: EvolutionSettings | None = None,
                              thresholds: RegimeThresholds | None = None,
                              initial_pattern: list[str] | None = None) -> ComparisonReport:
    """Certify the reduction chain by evolving both descriptions.

    The reference side is the selected detailed model ("full",
    "intermediate", or "eliminated"); the effective side is the spin
    Hamiltonian obtained from the coefficient map.  Both start from the
    same dressed product state (photons in vacuum) and are sampled on a
    common grid; the report carries the maximal per-observable deviations
    plus the photon and excited-level populations of the reference side.

    Refuses to run when the operating-regime conditions fail at the given
    (default) thresholds, since the reduction is meaningless there.
    """
    report = check_conditions(params, thresholds, n_cavities=graph.n_cavities)
    if not report.conditions_ok():
        raise RegimeError(
            "parameters violate the operating regime: " + "; ".join(report.messages),
            report=report,
        )
    settings = settings or EvolutionSettings()
    couplings = derive_couplings(params)
    m = params.atoms_per_cavity
    if params.uses_aux_lasers:
        sp = spin_params_full(couplings, m, graph)
    else:
        sp = spin_params_simple(couplings, m, graph)

    pattern = initial_pattern or ["up" if j % 2 == 0 else "down" for j in range(graph.n_cavities)]

    if model == "full":
        tdo = build_full_hamiltonian(params, graph, n_max)
        layout = CavityLayout(graph.n_cavities, m, 3, n_max, atom_basis="bare")
    elif model == "intermediate":
        tdo = build_intermediate_hamiltonian(params, graph, n_max)
        layout = CavityLayout(graph.n_cavities, m, 2, n_max, atom_basis="dressed")
    elif model == "eliminated":
        tdo = build_eliminated_hamiltonian(params, graph, n_max)
        layout = CavityLayout(graph.n_cavities, m, 2, n_max, atom_basis="bare")
    else:
        raise ValueError("model must be 'full', 'intermediate', or 'eliminated'")

    psi_ref = dressed_product_state(layout, pattern)

    exchange_scale = max(sp.exchange_xy, sp.exchange_z, 1e-30)
    t_target = float(t_grid[-1]) if t_grid is not None else 5.0 / exchange_scale
    if t_grid is not None:
        n_points = len(t_grid) - 1

    if tdo.is_static:
        times = np.linspace(0.0, t_target, n_points + 1) if t_grid is None else np.asarray(t_grid, dtype=float)
        ref_vecs = sample_static(tdo.static_part, psi_ref, settings, times)
    else:
        times, ref_vecs = sample_time_dependent(tdo, psi_ref, settings, t_target, n_points)

    ref_obs = _layout_observables(layout, graph)
    photon_op = total_photon_number(layout)
    excited_op = total_excited_population(layout) if layout.atom_dim == 3 else None

    ref_series = {name: np.empty(len(times)) for name in ref_obs}
    photon_series = np.empty(len(times))
    excited_series = np.empty(len(times)) if excited_op is not None else None
    for idx, vec in enumerate(ref_vecs):
        for name, op in ref_obs.items():
            ref_series[name][idx] = np.vdot(vec, op.matvec(vec)).real
        photon_series[idx] = np.vdot(vec, photon_op.matvec(vec)).real
        if excited_series is not None:
            excited_series[idx] = np.vdot(vec, excited_op.matvec(vec)).real

    _, spin_obs = _spin_observables(sp)
    h_spin = build_spin_hamiltonian(sp)
    psi_eff = spin_basis_state(sp, pattern)
    eff_vecs = sample_static(h_spin, psi_eff, settings, times)
    eff_series = {name: np.empty(len(times)) for name in spin_obs}
    for idx, vec in enumerate(eff_vecs):
        for name, op in spin_obs.items():
            eff_series[name][idx] = np.vdot(vec, op.matvec(vec)).real

    deviations = {
        name: float(np.max(np.abs(ref_series[name] - eff_series[name])))
        for name in spin_obs
    }
    return ComparisonReport(
        model=model,
        times=times,
        reference_series=ref_series,
        effective_series=eff_series,
        deviations=deviations,
        photon_series=photon_series,
        excited_series=excited_series,
        max_photon_population=float(photon_series.max()),
        max_excited_population=None if excited_series is None else float(excited_series.max()),
        spin_params=sp,
    )
