"""Machine checks of the dispersive operating regime.

The regime has three conditions plus a decoherence budget:

1. the two transitions induce the same photon Stark shift
   (g1^2/delta1 == g2^2/delta2);
2. the scale hierarchy detunings >> collective couplings >> hopping >=
   drive amplitudes, with the detuning difference in the top tier;
3. the slow frequencies (photon shift, shift +- splitting, splitting)
   are mutually comparable, mutually separated by more than the photon
   bandwidth scale, and all dominate twice the hopping;
4. the atomic decay fits below the spin-dynamics scale,
   decay << (hopping / 2N) * (detuning / collective coupling)^2.

The informal ">>" and "~" are quantified by configurable ratios (defaults:
10x for ">>", within 3x for "~", ">=" for ">~"); the checks are advisory,
so model builders warn rather than refuse on violations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import inf, sqrt

from .params import PhysicalParams


@dataclass(frozen=True)
class RegimeThresholds:
    """Quantification of the informal inequalities (all configurable)."""

    much_ratio: float = 10.0       # "a >> b" means a/b >= much_ratio
    similar_ratio: float = 3.0     # "a ~ b" means a/b in [1/similar_ratio, similar_ratio]
    balance_rtol: float = 1e-3     # Stark-shift balance, relative
    budget_margin: float = 10.0    # decay must sit this far below its bound

    def __post_init__(self):
        if self.much_ratio < 1 or self.similar_ratio < 1:
            raise ValueError("threshold ratios must be >= 1")


@dataclass
class RatioCheck:
    """One recorded inequality: numerator / denominator vs threshold."""

    name: str
    numerator: float
    denominator: float
    ratio: float
    threshold: float
    ok: bool


@dataclass
class RegimeReport:
    condition1_ok: bool
    condition2_ok: bool
    condition3_ok: bool
    budget_ok: bool
    ratios: list[RatioCheck] = field(default_factory=list)
    messages: list[str] = field(default_factory=list)

    @property
    def all_ok(self) -> bool:
        return self.condition1_ok and self.condition2_ok and self.condition3_ok and self.budget_ok

    def conditions_ok(self) -> bool:
        """Conditions 1-3 only (the Hamiltonian-level regime)."""
        return self.condition1_ok and self.condition2_ok and self.condition3_ok


def _safe_ratio(numerator: float, denominator: float) -> float:
    if denominator == 0.0:
        return inf if numerator != 0.0 else 1.0
    return numerator / denominator


# boundary slack: ratios within one part in 1e12 of a threshold count as
# satisfied, so exact-ratio working points stay robust to rounding
_SLACK = 1e-12


def _dominates(report, checks, name, big, small, factor):
    """Record big >= factor * small."""
    bound = factor * small
    ratio = _safe_ratio(big, bound)
    ok = big >= bound * (1.0 - _SLACK)
    checks.append(RatioCheck(name, big, bound, ratio, 1.0, ok))
    if not ok:
        report.append(f"violated: {name} (need >= {factor:g} x, got ratio {_safe_ratio(big, small):.4g})")
    return ok


def _similar(report, checks, name, a, b, band):
    ratio = _safe_ratio(a, b)
    ok = (1.0 / band) * (1.0 - _SLACK) <= ratio <= band * (1.0 + _SLACK)
    checks.append(RatioCheck(name, a, b, ratio, band, ok))
    if not ok:
        report.append(f"violated: {name} (need within {band:g}x, got ratio {ratio:.4g})")
    return ok


def check_conditions(params: PhysicalParams,
                     thresholds: RegimeThresholds | None = None,
                     n_cavities: int = 1) -> RegimeReport:
    """Evaluate every regime inequality and report each ratio.

    Always returns a report; nothing is raised on violations.  The budget
    flag uses ``n_cavities`` (pass the actual array size for a meaningful
    number).
    """
    th = thresholds or RegimeThresholds()
    msgs: list[str] = []
    checks: list[RatioCheck] = []
    m = params.atoms_per_cavity
    coll1 = sqrt(m / 2.0) * abs(params.g1)
    coll2 = sqrt(m / 2.0) * abs(params.g2)
    j = params.hopping

    # condition 1: balanced photon Stark shifts
    stark1 = params.g1 ** 2 / params.delta1
    stark2 = params.g2 ** 2 / params.delta2
    scale = max(abs(stark1), abs(stark2))
    balance_ok = scale == 0.0 or abs(stark1 - stark2) <= th.balance_rtol * scale
    checks.append(RatioCheck("balance: g1^2/delta1 == g2^2/delta2",
                             stark1, stark2, _safe_ratio(stark1, stark2), th.balance_rtol, balance_ok))
    if not balance_ok:
        msgs.append(
            "violated: balance: g1^2/delta1 == g2^2/delta2 "
            f"({stark1:.6g} vs {stark2:.6g}, tolerance {th.balance_rtol:g} relative)"
        )

    # condition 2: detunings >> collective couplings >> hopping >= drives
    cond2 = True
    delta_gap = abs(params.delta1 - params.delta2)
    for label, coll in (("1", coll1), ("2", coll2)):
        delta = abs(getattr(params, f"delta{label}"))
        cond2 &= _dominates(msgs, checks, f"hierarchy: |delta{label}| >> sqrt(M/2)*g{label}",
                            delta, coll, th.much_ratio)
        cond2 &= _dominates(msgs, checks, f"hierarchy: |delta1 - delta2| >> sqrt(M/2)*g{label}",
                            delta_gap, coll, th.much_ratio)
        cond2 &= _dominates(msgs, checks, f"hierarchy: sqrt(M/2)*g{label} >> hopping",
                            coll, j, th.much_ratio)
    for idx in ("1", "2", "3", "4"):
        amp = abs(getattr(params, f"rabi{idx}"))
        cond2 &= _dominates(msgs, checks, f"drive: hopping >= |rabi{idx}|", j, amp, 1.0)

    # condition 3: slow frequencies comparable, mutually separated, and all
    # >> 2 * hopping.  The shift +- splitting pair enters the similarity
    # comparison through its binding (smaller) member; the pairwise
    # spacings get the same >> 2*hopping bound as the frequencies
    # themselves, which rules out multi-photon resonances such as
    # splitting = 2 * shift.
    shift = m * params.g1 ** 2 / params.delta1
    omega = params.splitting
    quantities = [
        ("photon_shift", abs(shift)),
        ("photon_shift+splitting", abs(shift + omega)),
        ("photon_shift-splitting", abs(shift - omega)),
        ("splitting", abs(omega)),
    ]
    cond3 = True
    sideband = min(abs(shift + omega), abs(shift - omega))
    similar_set = [("photon_shift", abs(shift)),
                   ("photon_shift-+splitting (binding)", sideband),
                   ("splitting", abs(omega))]
    for i, (name_i, q_i) in enumerate(similar_set):
        for name_j, q_j in similar_set[i + 1:]:
            cond3 &= _similar(msgs, checks, f"similar: {name_i} ~ {name_j}", q_i, q_j,
                              th.similar_ratio)
    for i, (name_i, q_i) in enumerate(quantities):
        cond3 &= _dominates(msgs, checks, f"separation: {name_i} >> 2*hopping",
                            q_i, 2.0 * j, th.much_ratio)
        for name_j, q_j in quantities[i + 1:]:
            cond3 &= _dominates(msgs, checks, f"spacing: |{name_i} - {name_j}| >> 2*hopping",
                                abs(q_i - q_j), 2.0 * j, th.much_ratio)

    budget_ok, lhs, rhs = decoherence_budget(params, n_cavities, margin=th.budget_margin)
    checks.append(RatioCheck("budget: decay << spin-coupling bound", lhs, rhs,
                             _safe_ratio(lhs, rhs), 1.0 / th.budget_margin, budget_ok))
    if not budget_ok:
        msgs.append(
            f"violated: budget: decay << (hopping/2N)*(detuning/collective coupling)^2 "
            f"(decay {lhs:.4g} vs bound {rhs:.4g} at margin {th.budget_margin:g})"
        )

    return RegimeReport(
        condition1_ok=balance_ok,
        condition2_ok=bool(cond2),
        condition3_ok=bool(cond3),
        budget_ok=budget_ok,
        ratios=checks,
        messages=msgs,
    )


def decoherence_budget(params: PhysicalParams, n_cavities: int,
                       margin: float = 10.0) -> tuple[bool, float, float]:
    """Check decay << (hopping / 2N) * (detuning / collective coupling)^2.

    Uses the smaller of the two transition bounds.  Returns
    ``(ok, decay, bound)`` so callers can report both sides; ``ok`` means
    decay <= bound / margin.
    """
    if n_cavities < 1:
        raise ValueError("n_cavities must be >= 1")
    m = params.atoms_per_cavity
    bounds = []
    for g, delta in ((params.g1, params.delta1), (params.g2, params.delta2)):
        coll = sqrt(m / 2.0) * abs(g)
        if coll == 0.0:
            bounds.append(inf)
        else:
            bounds.append(params.hopping / (2.0 * n_cavities) * (delta / coll) ** 2)
    rhs = min(bounds)
    ok = params.decay <= rhs / margin if rhs != inf else True
    return ok, params.decay, rhs
