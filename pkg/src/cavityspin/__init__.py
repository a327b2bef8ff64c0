"""cavityspin: coupled-cavity arrays reduced to tunable spin models.

A library plus CLI for building the full atom-cavity Hamiltonian of a
driven cavity array, reducing it in two stages to an effective
arbitrary-spin Heisenberg model, and checking the reduction numerically
with exact-diagonalization and Krylov time-evolution tools.
"""

__version__ = "0.1.0"

from .analysis import (
    CorrelationResult,
    GapResult,
    SpectrumSlice,
    correlation,
    excitation_gap,
    extremal_eigenpairs,
    fidelity,
    magnetization_profile,
    total_spin_per_site,
)
from .core import HilbertSpace, QuantumState, SparseOperator, commutator, embed, embed_block
from .dynamics import (
    AdiabaticResult,
    AdiabaticSchedule,
    ComparisonReport,
    EvolutionSettings,
    adiabatic_prepare,
    compare_full_vs_effective,
    evolve_conditional,
    evolve_static,
    evolve_time_dependent,
    minimum_gap,
    spin_basis_state,
)
from .effective import (
    DerivedCouplings,
    SpinModelParams,
    afm_equivalent_params,
    build_spin_hamiltonian,
    depolarized_expectation,
    derive_couplings,
    raman_amplitude,
    spin_params_full,
    spin_params_simple,
)
from .errors import (
    CavitySpinError,
    ConfigError,
    ConvergenceError,
    DimensionMismatchError,
    FrequencyCollisionError,
    RegimeError,
    StepResolutionError,
)
from .fullmodel import (
    CavityLayout,
    TimeDependentOperator,
    build_eliminated_hamiltonian,
    build_full_hamiltonian,
    build_intermediate_hamiltonian,
    conditional_hamiltonian,
    dressed_product_state,
    effective_decay_rates,
    total_excited_population,
    total_photon_number,
)
from .graphs import CavityGraph, chain, from_edge_list, single_cavity
from .params import PhysicalParams, working_point
from .regime import RegimeReport, RegimeThresholds, check_conditions, decoherence_budget
from .spins import (
    annihilation,
    collective_spin_ops,
    collective_transition,
    dressed_spin_ops,
    rotated_identities_check,
    spin_operators,
    symmetric_embedding,
)

__all__ = [name for name in dir() if not name.startswith("_")]
