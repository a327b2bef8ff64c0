"""Coefficient maps and the effective spin Hamiltonian."""

from fractions import Fraction

import numpy as np
import pytest

from cavityspin.core import QuantumState, uniform_space
from cavityspin.effective import (
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
from cavityspin.errors import FrequencyCollisionError
from cavityspin.graphs import chain, single_cavity
from cavityspin.params import PhysicalParams


def couplings(shift=3.0, splitting=1.0, diff=0.1, total=0.2, hopping=0.01,
              aux_sum=0.0, aux_diff=0.0, stark=0.0, aux_shift=None):
    if aux_shift is None:
        aux_shift = -6.0 * splitting
    return DerivedCouplings(
        photon_shift=shift, splitting=splitting,
        drive_sum=total, drive_diff=diff,
        aux_drive_sum=aux_sum, aux_drive_diff=aux_diff,
        stark_drive=stark, hopping=hopping,
        photon_shift_aux=aux_shift,
    )


class TestDeriveCouplings:
    def test_raman_amplitude(self):
        assert raman_amplitude(1.0, 0.1, 100.0) == pytest.approx(1e-3)
        assert raman_amplitude(2.0, 1j, 4.0) == pytest.approx(-0.5j)

    def test_photon_shift_scales_with_atom_number(self):
        p = PhysicalParams(g1=1.0, g2=1.1, delta1=200.0, delta2=242.0,
                           splitting=0.003, hopping=0.0001, atoms_per_cavity=2)
        c = derive_couplings(p)
        assert c.photon_shift == pytest.approx(0.01)

    def test_symmetric_drives_cancel_difference(self):
        p = PhysicalParams(g1=1.0, g2=1.0, delta1=100.0, delta2=100.0,
                           splitting=0.003, hopping=0.0,
                           rabi1=0.05, rabi2=0.05)
        c = derive_couplings(p)
        assert c.drive_diff == 0.0

    def test_aux_amplitude_value(self):
        p = PhysicalParams(g1=1.0, g2=1.0, delta1=100.0, delta2=100.0,
                           splitting=0.0029, hopping=0.0, rabi3=0.2, aux_detuning=50.0)
        c = derive_couplings(p)
        mu3 = 0.1 * (1.0 / 100.0 + 1.0 / 150.0)
        assert c.aux_drive_sum == pytest.approx(mu3, rel=1e-12)
        assert f"{abs(c.aux_drive_sum):.4g}" == "0.001667"

    def test_shift_splitting_collision(self):
        p = PhysicalParams(g1=1.0, g2=1.0, delta1=100.0, delta2=100.0,
                           splitting=0.01, hopping=0.0)
        with pytest.raises(FrequencyCollisionError):
            derive_couplings(p)  # shift == splitting

    def test_two_photon_resonance_rejected(self):
        p = PhysicalParams(g1=1.0, g2=1.0, delta1=100.0, delta2=100.0,
                           splitting=0.02, hopping=0.0)
        with pytest.raises(FrequencyCollisionError, match="collide"):
            derive_couplings(p)  # splitting = 2 * shift

    def test_aux_set_collision_named(self):
        p = PhysicalParams(g1=1.0, g2=1.0, delta1=100.0, delta2=100.0,
                           splitting=0.003, hopping=0.0, rabi3=0.01,
                           aux_detuning=0.01)  # aux shift hits zero
        with pytest.raises(FrequencyCollisionError, match="aux shift"):
            derive_couplings(p)


class TestSimpleMap:
    def test_spot_values_from_exact_fractions(self):
        # independent oracle: evaluate the closed forms in exact rational
        # arithmetic, then require the float implementation to match
        lam, omega = Fraction(3), Fraction(1)
        diff_sq, total_sq = Fraction(1, 100), Fraction(1, 25)
        hop = Fraction(1, 100)
        a_exact = lam / (lam ** 2 - omega ** 2) * diff_sq / 2
        b_exact = total_sq / lam - a_exact
        c_exact = -omega / (lam ** 2 - omega ** 2) * diff_sq / 2
        d_exact = hop / 2 * (diff_sq / (lam + omega) ** 2 + diff_sq / (lam - omega) ** 2)
        e_exact = 2 * hop * total_sq / lam ** 2
        assert (a_exact, b_exact, c_exact, d_exact, e_exact) == (
            Fraction(3, 1600), Fraction(11, 960), Fraction(-1, 1600),
            Fraction(1, 64000), Fraction(1, 11250))

        sp = spin_params_simple(couplings(), 1, chain(2))
        assert sp.casimir == pytest.approx(float(a_exact), rel=1e-12)
        assert sp.anisotropy == pytest.approx(float(b_exact), rel=1e-12)
        assert sp.field == pytest.approx(float(c_exact), rel=1e-12)
        assert sp.exchange_xy == pytest.approx(float(d_exact), rel=1e-12)
        assert sp.exchange_z == pytest.approx(float(e_exact), rel=1e-12)

    def test_no_difference_drive(self):
        sp = spin_params_simple(couplings(diff=0.0), 1, chain(2))
        assert sp.casimir == 0.0 and sp.field == 0.0 and sp.exchange_xy == 0.0

    def test_no_sum_drive(self):
        sp = spin_params_simple(couplings(total=0.0), 1, chain(2))
        assert sp.exchange_z == 0.0
        assert sp.anisotropy == pytest.approx(-sp.casimir)

    def test_rejects_aux(self):
        with pytest.raises(ValueError):
            spin_params_simple(couplings(aux_diff=0.1), 1, chain(2))

    def test_spin_magnitude_tracks_atom_number(self):
        sp = spin_params_simple(couplings(), 3, chain(2))
        assert sp.two_s == 3 and sp.spin == 1.5

    def test_phase_invariance(self):
        base = spin_params_simple(couplings(diff=0.1 + 0.0j, total=0.2 + 0.0j), 1, chain(2))
        phase = np.exp(0.7j)
        rotated = spin_params_simple(couplings(diff=0.1 * phase, total=0.2 * phase), 1, chain(2))
        for name in ("casimir", "anisotropy", "field", "exchange_xy", "exchange_z"):
            assert getattr(rotated, name) == pytest.approx(getattr(base, name), rel=1e-12)


class TestFullMap:
    def test_overlap_with_simple_map(self):
        rng = np.random.default_rng(42)
        g = chain(2)
        for _ in range(50):
            omega = rng.uniform(0.5, 2.0)
            c = couplings(shift=3 * omega, splitting=omega,
                          diff=complex(rng.normal(), rng.normal()) * 0.1,
                          total=complex(rng.normal(), rng.normal()) * 0.1,
                          hopping=rng.uniform(0.001, 0.1))
            simple = spin_params_simple(c, 2, g)
            full = spin_params_full(c, 2, g)
            for name in ("casimir", "anisotropy", "field", "exchange_xy", "exchange_z"):
                a, b = getattr(simple, name), getattr(full, name)
                assert abs(a - b) <= 1e-12 * max(abs(a), abs(b), 1e-300), name

    def test_difference_drive_only(self):
        c = couplings(total=0.0, diff=0.1)
        sp = spin_params_full(c, 1, chain(2))
        assert sp.exchange_xy == pytest.approx(45.0 / 32.0 * 0.01 * 0.01 / 9.0, rel=1e-12)

    def test_stark_only_field(self):
        c = couplings(diff=0.0, total=0.0, stark=0.2)
        sp = spin_params_full(c, 1, chain(2))
        assert sp.casimir == 0.0 and sp.anisotropy == 0.0
        assert sp.exchange_xy == 0.0 and sp.exchange_z == 0.0
        assert sp.field == pytest.approx(1.5 * 0.04 / 3.0, rel=1e-12)

    def test_wrong_shift_rejected(self):
        with pytest.raises(FrequencyCollisionError):
            spin_params_full(couplings(shift=2.5), 1, chain(2))

    def test_aux_needs_special_detuning(self):
        bad = couplings(aux_diff=0.05, aux_shift=-5.0)
        with pytest.raises(FrequencyCollisionError):
            spin_params_full(bad, 1, chain(2))
        good = couplings(aux_diff=0.05, aux_shift=-6.0)
        sp = spin_params_full(good, 1, chain(2))
        assert sp.exchange_xy == pytest.approx(
            (45.0 / 32.0 * 0.01 + 333.0 / 1225.0 * 0.0025) * 0.01 / 9.0, rel=1e-12)


class TestSpinHamiltonian:
    def test_two_site_isotropic_spectrum(self):
        # oracle: dense diagonalization of the 4x4
        k = 0.7
        sp = SpinModelParams(0.0, 0.0, 0.0, k, k, two_s=1, graph=chain(2))
        eigs = np.sort(np.linalg.eigvalsh(build_spin_hamiltonian(sp).to_dense()))
        assert np.allclose(eigs, [-k / 4, -k / 4, -k / 4, 3 * k / 4])

    def test_field_only_counts_magnetization(self):
        c_val = 0.3
        sp = SpinModelParams(0.0, 0.0, c_val, 0.0, 0.0, two_s=1, graph=chain(3))
        h = build_spin_hamiltonian(sp).to_dense()
        assert np.allclose(h, np.diag(np.diag(h)))
        eigs = np.sort(np.diag(h).real)
        expected = np.sort([c_val * m for m in
                            (1.5, 0.5, 0.5, 0.5, -0.5, -0.5, -0.5, -1.5)])
        assert np.allclose(eigs, expected)

    def test_anisotropy_constant_on_spin_half(self):
        base = SpinModelParams(0.0, 0.0, 0.0, 0.4, 0.2, two_s=1, graph=chain(2))
        shifted = SpinModelParams(0.0, 1.3, 0.0, 0.4, 0.2, two_s=1, graph=chain(2))
        e0 = np.linalg.eigvalsh(build_spin_hamiltonian(base).to_dense())
        e1 = np.linalg.eigvalsh(build_spin_hamiltonian(shifted).to_dense())
        assert np.allclose(e1 - e0, 1.3 / 4 * 2)  # (S^z)^2 = 1/4 per site

    def test_casimir_is_constant_shift(self):
        sp0 = SpinModelParams(0.0, 0.1, 0.2, 0.3, 0.4, two_s=2, graph=chain(2))
        sp1 = SpinModelParams(0.5, 0.1, 0.2, 0.3, 0.4, two_s=2, graph=chain(2))
        e0 = np.linalg.eigvalsh(build_spin_hamiltonian(sp0).to_dense())
        e1 = np.linalg.eigvalsh(build_spin_hamiltonian(sp1).to_dense())
        assert np.allclose(e1 - e0, 0.5 * 2.0 * 2)  # S(S+1)=2 per site, 2 sites

    def test_spectrum_shape_invariant_under_onsite_terms_spin_half(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            a, b = rng.normal(size=2)
            sp0 = SpinModelParams(0.0, 0.0, 0.1, 0.3, 0.7, two_s=1, graph=chain(2))
            sp1 = SpinModelParams(a, b, 0.1, 0.3, 0.7, two_s=1, graph=chain(2))
            e0 = np.sort(np.linalg.eigvalsh(build_spin_hamiltonian(sp0).to_dense()))
            e1 = np.sort(np.linalg.eigvalsh(build_spin_hamiltonian(sp1).to_dense()))
            diffs = e1 - e0
            assert np.allclose(diffs, diffs[0])

    def test_hermitian_for_any_inputs(self):
        sp = SpinModelParams(0.1, -0.2, 0.3, -0.4, 0.5, two_s=3, graph=chain(3, periodic=True))
        assert build_spin_hamiltonian(sp).is_hermitian()

    def test_field_profile(self):
        sp = SpinModelParams(0.0, 0.0, 0.0, 0.0, 0.0, two_s=1, graph=chain(2),
                             field_profile=(0.5, -0.5))
        h = build_spin_hamiltonian(sp).to_dense()
        assert np.allclose(np.diag(h), [0.0, 0.5, -0.5, 0.0])

    def test_field_profile_length_checked(self):
        with pytest.raises(ValueError):
            SpinModelParams(0, 0, 0, 0, 0, two_s=1, graph=chain(3), field_profile=(1.0,))


class TestSpectrumInversion:
    def target(self):
        return SpinModelParams(0.2, -0.1, 0.3, -0.8, -0.8, two_s=1, graph=chain(2))

    def test_involution(self):
        sp = self.target()
        assert afm_equivalent_params(afm_equivalent_params(sp)) == sp

    def test_hamiltonian_negated(self):
        sp = self.target()
        flipped = afm_equivalent_params(sp)
        assert flipped.inverted and not sp.inverted
        assert flipped.exchange_xy > 0
        h = build_spin_hamiltonian(sp).to_dense()
        h_flip = build_spin_hamiltonian(flipped).to_dense()
        assert np.allclose(h_flip, -h)

    def test_two_site_singlet_from_highest_state(self):
        # antiferromagnetic isotropic pair via the inversion route
        k = 1.0
        target = SpinModelParams(0.0, 0.0, 0.0, -k, -k, two_s=1, graph=chain(2))
        realizable = afm_equivalent_params(target)
        h = build_spin_hamiltonian(realizable)
        eigs, vecs = np.linalg.eigh(h.to_dense())
        highest = vecs[:, -1]
        singlet = np.zeros(4, dtype=complex)
        singlet[1], singlet[2] = 1 / np.sqrt(2), -1 / np.sqrt(2)
        assert abs(np.vdot(singlet, highest)) ** 2 >= 1 - 1e-10
        # the target's own ground energy is -3k/4, recovered as -max(eigs)
        assert -eigs[-1] == pytest.approx(-0.75 * k)


class TestDepolarizedExpectation:
    def setup_method(self):
        from cavityspin.core import embed
        from cavityspin.spins import spin_operators

        self.space = uniform_space(2, 2)
        self.obs = embed(spin_operators(1).z, 0, self.space)
        self.psi = QuantumState.basis_state(self.space, 0)

    def test_initial_time(self):
        val = depolarized_expectation(self.obs, self.psi, 0.0, 2, 1, 0.3)
        assert val == pytest.approx(0.5)

    def test_long_time_limit(self):
        val = depolarized_expectation(self.obs, self.psi, 1e6, 2, 1, 0.3)
        assert val == pytest.approx(0.0, abs=1e-12)  # traceless observable

    def test_halving_time_for_traceless_observable(self):
        gamma, n, m = 0.05, 2, 1
        t_half = np.log(2.0) / (n * m * gamma)
        val = depolarized_expectation(self.obs, self.psi, t_half, n, m, gamma)
        assert val == pytest.approx(0.25, rel=1e-12)

    def test_matches_density_matrix_formula(self):
        rng = np.random.default_rng(21)
        psi = QuantumState.random(self.space, 22)
        t, gamma, n, m = 0.7, 0.11, 2, 1
        weight = np.exp(-n * m * gamma * t)
        rho = (weight * np.outer(psi.amplitudes, psi.amplitudes.conj())
               + (1 - weight) * np.eye(4) / 4)
        direct = np.trace(self.obs.to_dense() @ rho).real
        val = depolarized_expectation(self.obs, psi, t, n, m, gamma)
        assert val == pytest.approx(direct, abs=1e-13)
