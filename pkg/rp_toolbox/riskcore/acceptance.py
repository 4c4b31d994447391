# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

from fractions import Fraction
import logging
# Create a logger for the riskcore component
logger = logging.getLogger(__name__)

from rp_toolbox.scalars import scalar_le
from rp_toolbox.filtration import AdaptedProcess, random_process, single_payment
from rp_toolbox.riskcore.axioms import AxiomReport, SampleConfig
from rp_toolbox.riskcore.config import config
from rp_toolbox.riskcore.risk_measure import RiskMeasure
from rp_toolbox.riskcore.errors.riskcore_errors import NonMonotoneAcceptanceError

# Doublings allowed while looking for a bisection bracket
MAX_BRACKET_DOUBLINGS = 64


class AcceptanceSet:
    """A = {X | rho(X) <= 0}."""

    def __init__(self, rm: RiskMeasure, tolerance=0.0):
        self.rm = rm
        self.tolerance = tolerance

    def contains(self, x: AdaptedProcess) -> bool:
        return scalar_le(self.rm.evaluate(x), 0, self.tolerance)

    __contains__ = contains


# Raises: NonMonotoneAcceptanceError
def capital_requirement(acceptance: AcceptanceSet, x: AdaptedProcess, tolerance: float | None = None) -> float:
    """inf{m | X + m 1_{[0,T]} in A} by bisection on m.

    The bracket [low, high] is grown by doubling until low is rejected and
    high accepted; bisection then keeps that invariant until high - low is
    below ``tolerance`` and returns high.
    """
    tolerance = config.bisection_tolerance if tolerance is None else tolerance
    tree = x.tree

    def accepted(m: float) -> bool:
        return acceptance.contains(x + single_payment(tree, m, 0))

    low, high = -1.0, 1.0
    for _ in range(MAX_BRACKET_DOUBLINGS):
        if accepted(high):
            break
        high *= 2
    else:
        logger.error("No acceptable cash amount found while bracketing the capital requirement.")
        raise NonMonotoneAcceptanceError("acceptance set admits no cash shift of X")
    low = min(low, high - 1.0)
    for _ in range(MAX_BRACKET_DOUBLINGS):
        if not accepted(low):
            break
        low *= 2
    else:
        logger.error("Every cash shift of X is acceptable; the capital requirement is -inf.")
        raise NonMonotoneAcceptanceError("acceptance set contains every cash shift of X")
    if low >= high:
        raise NonMonotoneAcceptanceError(f"bracket [{low}, {high}] is inverted")

    while high - low > tolerance:
        middle = (low + high) / 2
        if middle in (low, high):
            break
        if accepted(middle):
            high = middle
        else:
            low = middle
    if not accepted(high) or accepted(low):
        logger.error(f"Acceptance of X + m changes non-monotonically on [{low}, {high}].")
        raise NonMonotoneAcceptanceError("bisection bracket failed")
    logger.debug(f"Capital requirement {high} found in [{low}, {high}].")
    return high


def acceptance_set_check(acceptance: AcceptanceSet, tree, rng, samples: SampleConfig = SampleConfig()) -> AxiomReport:
    """Convexity and solidity of A on sampled members.

    Members are produced as X + rho(X) 1_{[0,T]}, which lie on the boundary of
    A for a cash invariant rho.
    """
    tolerance = samples.comparison_tolerance
    report = AxiomReport(acceptance.rm.name)
    convex = report.result("convexity")
    solid = report.result("solidity")
    rm = acceptance.rm

    def member() -> AdaptedProcess:
        x = random_process(tree, rng, samples.low, samples.high, samples.denominator)
        return x + single_payment(tree, rm.evaluate(x), 0)

    for trial in range(samples.count):
        first, second = member(), member()
        weight = Fraction(int(rng.integers(0, 9)), 8)
        mixture = rm.evaluate(weight * first + (1 - weight) * second)
        convex.record(not scalar_le(mixture, 0, tolerance), mixture, {"trial": trial, "lambda": weight})
        dominating = rm.evaluate(first + random_process(tree, rng, 0, samples.high, samples.denominator))
        solid.record(not scalar_le(dominating, 0, tolerance), dominating, {"trial": trial})
    return report
