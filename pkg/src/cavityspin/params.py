"""Physical constants of the cavity-array model.

All rates and frequencies are angular and share one unit system; by
convention the hopping rate is the unit in run configurations.  Complex
Rabi amplitudes carry the drive phases.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import sqrt


@dataclass(frozen=True)
class PhysicalParams:
    """Cavity, laser, and atom constants.

    Attributes
    ----------
    g1, g2:
        Atom-cavity coupling rates of the two optical transitions sharing
        the common cavity mode.
    delta1, delta2:
        Detunings of those transitions (both nonzero).
    rabi1..rabi4:
        Complex Rabi frequencies of the classical fields.  ``rabi3`` and
        ``rabi4`` belong to the auxiliary pair applied with the extra
        detuning ``aux_detuning``.
    splitting:
        Energy splitting between the dressed two-level states; the
        associated drive term enters the Hamiltonian with amplitude
        ``splitting / 2``.
    aux_detuning:
        Additional detuning of the auxiliary laser pair.
    stark_drive:
        Amplitude of the extra Stark-shift term on level b (complex in the
        coefficient maps; must be real to build a Hermitian lab-frame
        model).
    hopping:
        Photon tunneling rate between neighbouring cavities.
    decay:
        Atomic spontaneous-decay rate.
    atoms_per_cavity:
        Number of identical atoms per cavity.
    """

    g1: float
    g2: float
    delta1: float
    delta2: float
    splitting: float
    hopping: float
    rabi1: complex = 0.0
    rabi2: complex = 0.0
    rabi3: complex = 0.0
    rabi4: complex = 0.0
    aux_detuning: float = 0.0
    stark_drive: complex = 0.0
    decay: float = 0.0
    atoms_per_cavity: int = 1

    def __post_init__(self):
        if self.atoms_per_cavity < 1:
            raise ValueError("atoms_per_cavity must be >= 1")
        if self.hopping < 0:
            raise ValueError("hopping must be >= 0")
        if self.decay < 0:
            raise ValueError("decay must be >= 0")
        if self.delta1 == 0 or self.delta2 == 0:
            raise ValueError("detunings must be nonzero")
        for name in ("rabi1", "rabi2", "rabi3", "rabi4", "stark_drive"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    @property
    def uses_aux_lasers(self) -> bool:
        return self.rabi3 != 0 or self.rabi4 != 0 or self.stark_drive != 0

    def scaled(self, factor: float) -> "PhysicalParams":
        """All frequencies and rates multiplied by a common factor."""
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return replace(
            self,
            g1=self.g1 * factor, g2=self.g2 * factor,
            delta1=self.delta1 * factor, delta2=self.delta2 * factor,
            splitting=self.splitting * factor, hopping=self.hopping * factor,
            rabi1=self.rabi1 * factor, rabi2=self.rabi2 * factor,
            rabi3=self.rabi3 * factor, rabi4=self.rabi4 * factor,
            aux_detuning=self.aux_detuning * factor,
            stark_drive=self.stark_drive * factor,
            decay=self.decay * factor,
        )


def working_point(atoms_per_cavity: int = 1, hopping: float = 1.0,
                  decay: float = 0.0) -> PhysicalParams:
    """A reference parameter set deep in the dispersive operating regime.

    Tier structure (in units of the hopping rate): detunings in the
    thousands, collective couplings sqrt(M/2)*g in the hundreds, drive
    amplitudes at the hopping rate.  The two detunings share the same
    g^2/Delta; the photon Stark shift per cavity is 60 and the dressed
    splitting 20, so the slow frequencies {20, 40, 60, 80} are mutually
    comparable, mutually separated, and clear of low-order multi-photon
    resonances (the shift is three times the splitting).  All regime
    checks pass at their default thresholds, for any atom number.
    """
    m = atoms_per_cavity
    j = hopping
    g1 = 480.0 / sqrt(m) * j           # M g1^2 / delta1 = 60 j exactly
    delta1 = 3840.0 * j
    delta2 = 9984.0 * j                # 2.6 * delta1; gcd(3840, 9984) = 192
    g2 = g1 * sqrt(delta2 / delta1)    # equalizes g^2/Delta across branches
    return PhysicalParams(
        g1=g1, g2=g2,
        delta1=delta1, delta2=delta2,
        splitting=20.0 * j,
        hopping=j,
        rabi1=1.0 * j,
        rabi2=-1.0 * j,                # opposite sign maximizes the drive difference
        decay=decay,
        atoms_per_cavity=m,
    )
