# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Cash additivity at time t_s: structural test on the controls versus probing.

A robust risk measure is cash additive at s exactly when every control with
finite penalty puts its full mass on [t_s, T]. In factor form this reads
D_{s-1} = 1 on {L_s > 0} for optional pairs and D_s = 1 on {L_s > 0} for
predictable pairs.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import logging
# Create a logger for the riskcore component
logger = logging.getLogger(__name__)

from rp_toolbox.scalars import is_exact
from rp_toolbox.filtration import constant, random_process, single_payment
from rp_toolbox.riskcore.config import config
from rp_toolbox.riskcore.controls import DeflatorPair, DualControl
from rp_toolbox.riskcore.penalty import PenaltyFunction
from rp_toolbox.riskcore.risk_measure import RobustRiskMeasure


@dataclass
class CashAdditivityResult:
    level: int
    structural: bool
    behavioral: bool
    # Control label and node where the structural condition fails
    structural_witness: dict | None = None
    # Sample, amount and gap of the first violating probe
    behavioral_witness: dict | None = None
    probes: int = 0

    @property
    def agree(self) -> bool:
        return self.structural == self.behavioral

    @property
    def additive(self) -> bool:
        return self.structural and self.behavioral


def pair_is_additive(pair: DeflatorPair, level) -> int | None:
    """First level node violating the factor condition, None when it holds."""
    tree = pair.L.tree
    for node in tree.level_nodes(level):
        if pair.L[node] <= 0:
            continue
        survival = pair.D[node] if pair.predictable else pair.D.previous(node)
        if survival != 1:
            return node
    return None


def structural_cash_additivity(controls, level) -> tuple[bool, dict | None]:
    for control in controls:
        for pair in control.deflator_pairs():
            node = pair_is_additive(pair, level)
            if node is not None:
                return False, {"control": control.label, "node": node}
    return True, None


def _equal(left, right, relative) -> bool:
    if is_exact(left) and is_exact(right):
        return left == right
    return abs(float(left) - float(right)) <= relative * max(1.0, abs(float(left)), abs(float(right)))


def probe_cash_additivity(rm, tree, level, rng=None, sample_count=5, relative=1e-9) -> tuple[bool, dict | None, int]:
    """rho(X + m 1_{[t_s,T]}) == rho(X) - m for X = 0 and random X, m = +-10**k."""
    samples = [constant(tree, Fraction(0))]
    if rng is not None:
        samples += [random_process(tree, rng) for _ in range(sample_count)]
    probes = 0
    for index, x in enumerate(samples):
        rho_x = rm.evaluate(x)
        for exponent in config.probe_exponents:
            for sign in (1, -1):
                m = sign * Fraction(10) ** exponent
                shifted = rm.evaluate(x + single_payment(tree, m, level))
                probes += 1
                if not _equal(shifted, rho_x - m, relative):
                    return False, {"sample": index, "m": m, "gap": shifted - (rho_x - m)}, probes
    return True, None, probes


def cash_additivity_characterization(
    penalty: PenaltyFunction,
    level,
    rng=None,
    sample_count=5,
) -> CashAdditivityResult:
    """Structural verdict over the finite-penalty controls, cross-checked by probing."""
    supported: list[DualControl] = [control for control, _ in penalty.support()]
    structural, structural_witness = structural_cash_additivity(supported, level)
    rm = RobustRiskMeasure(penalty)
    behavioral, behavioral_witness, probes = probe_cash_additivity(
        rm, supported[0].tree, level, rng, sample_count
    )
    result = CashAdditivityResult(level, structural, behavioral, structural_witness, behavioral_witness, probes)
    if not result.agree:
        logger.warning(f"Cash additivity verdicts disagree at level {level}: structural {structural}, probe {behavioral}.")
    else:
        logger.debug(f"Cash additivity at level {level}: {structural}.")
    return result


@dataclass
class AdditivityProfile:
    """Verdicts for every level; additivity at s must imply additivity before s."""

    results: dict[int, CashAdditivityResult] = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        additive = [level for level, result in self.results.items() if result.additive]
        return all(self.results[earlier].additive for level in additive for earlier in self.results if earlier <= level)


def additivity_profile(penalty: PenaltyFunction, rng=None, sample_count=5) -> AdditivityProfile:
    tree = next(penalty.support())[0].tree
    return AdditivityProfile(
        {level: cash_additivity_characterization(penalty, level, rng, sample_count) for level in range(tree.depth + 1)}
    )
