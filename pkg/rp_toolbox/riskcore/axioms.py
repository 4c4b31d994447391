# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Randomized axiom harness for (conditional) risk measures.

All checks are report-only: they never raise on a failed axiom, they record
the first witness instead. Comparisons are exact when both sides are rational
and use ``config.comparison_tolerance`` otherwise.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import logging
# Create a logger for the riskcore component
logger = logging.getLogger(__name__)

from rp_toolbox.scalars import Scalar, scalar_le, scalars_close
from rp_toolbox.filtration import (
    AdaptedProcess,
    conditional_payment,
    constant,
    random_process,
    single_payment,
)
from rp_toolbox.riskcore.config import config
from rp_toolbox.riskcore.risk_measure import RiskMeasure


@dataclass(frozen=True)
class SampleConfig:
    count: int = 50
    low: int = -10
    high: int = 10
    denominator: int = 4
    # Cash amounts are drawn in [-cash_range, cash_range]
    cash_range: int = 10
    tolerance: float | None = None

    @property
    def comparison_tolerance(self) -> float:
        return config.comparison_tolerance if self.tolerance is None else self.tolerance


@dataclass
class AxiomResult:
    trials: int = 0
    violations: int = 0
    max_violation: float = 0.0
    witness: dict | None = None
    informational: bool = False

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def record(self, violated: bool, magnitude, witness: dict):
        self.trials += 1
        if violated:
            self.violations += 1
            self.max_violation = max(self.max_violation, abs(float(magnitude)))
            if self.witness is None:
                self.witness = witness


@dataclass
class AxiomReport:
    name: str
    results: dict[str, AxiomResult] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def result(self, axiom) -> AxiomResult:
        return self.results.setdefault(axiom, AxiomResult())

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results.values() if not result.informational)

    def failed_axioms(self) -> list[str]:
        return [axiom for axiom, result in self.results.items() if not result.passed and not result.informational]


def _cash(rng, samples: SampleConfig) -> Fraction:
    return Fraction(int(rng.integers(-samples.cash_range * samples.denominator, samples.cash_range * samples.denominator + 1)), samples.denominator)


def _weight(rng, denominator=8) -> Fraction:
    return Fraction(int(rng.integers(0, denominator + 1)), denominator)


def _sample(tree, rng, samples: SampleConfig) -> AdaptedProcess:
    return random_process(tree, rng, samples.low, samples.high, samples.denominator)


def axiom_check(rm: RiskMeasure, tree, rng, samples: SampleConfig = SampleConfig()) -> AxiomReport:
    """Normalization, cash invariance, monotonicity and convexity on random samples.

    Positive homogeneity is reported as an informational axiom (it separates
    coherent from merely convex measures).
    """
    tolerance = samples.comparison_tolerance
    report = AxiomReport(rm.name)
    zero = constant(tree, Fraction(0))

    normalization = report.result("normalization")
    rho_zero = rm.evaluate(zero)
    normalization.record(not scalars_close(rho_zero, 0, tolerance), rho_zero, {"rho(0)": rho_zero})

    cash = report.result("cash_invariance")
    monotonicity = report.result("monotonicity")
    convexity = report.result("convexity")
    homogeneity = report.result("positive_homogeneity")
    homogeneity.informational = True
    for trial in range(samples.count):
        x = _sample(tree, rng, samples)
        y = _sample(tree, rng, samples)
        rho_x, rho_y = rm.evaluate(x), rm.evaluate(y)

        m = _cash(rng, samples)
        shifted = rm.evaluate(x + single_payment(tree, m, 0))
        cash.record(not scalars_close(shifted, rho_x - m, tolerance), shifted - (rho_x - m), {"trial": trial, "m": m})

        # Dominating process: X + nonnegative noise
        noise = random_process(tree, rng, 0, samples.high, samples.denominator)
        dominating = rm.evaluate(x + noise)
        monotonicity.record(not scalar_le(dominating, rho_x, tolerance), dominating - rho_x, {"trial": trial})

        weight = _weight(rng)
        mixed = rm.evaluate(weight * x + (1 - weight) * y)
        bound = weight * rho_x + (1 - weight) * rho_y
        convexity.record(not scalar_le(mixed, bound, tolerance), mixed - bound, {"trial": trial, "lambda": weight})

        scale = Fraction(int(rng.integers(1, 9)), 4)
        scaled = rm.evaluate(scale * x)
        homogeneity.record(not scalars_close(scaled, scale * rho_x, tolerance), scaled - scale * rho_x, {"trial": trial, "lambda": scale})

    if report.failed_axioms():
        logger.warning(f"Risk measure {rm.name} fails {report.failed_axioms()}.")
    else:
        logger.info(f"Risk measure {rm.name} passes the axiom check on {samples.count} samples.")
    return report


def cash_subadditivity_check(rm: RiskMeasure, tree, rng, samples: SampleConfig = SampleConfig()) -> AxiomReport:
    """rho(X) - m <= rho(X + m 1_{[t,T]}) <= rho(X) for m >= 0 (reversed for m < 0), t > 0.

    Strictly positive gaps rho(X + m 1_{[t,T]}) - (rho(X) - m) are collected in
    the ``strict_gap`` result; levels declared cash additive must show no gap.
    """
    tolerance = samples.comparison_tolerance
    report = AxiomReport(rm.name)
    subadditivity = report.result("cash_subadditivity")
    declared = report.result("declared_cash_additivity")
    strict = report.result("strict_gap")
    strict.informational = True
    declared_levels = rm.cash_additive_levels or frozenset()
    first_level = 1 if tree.depth > 0 else 0
    for trial in range(samples.count):
        x = _sample(tree, rng, samples)
        level = int(rng.integers(first_level, tree.depth + 1))
        m = _cash(rng, samples)
        rho_x = rm.evaluate(x)
        shifted = rm.evaluate(x + single_payment(tree, m, level))
        gap = shifted - (rho_x - m)
        witness = {"trial": trial, "level": level, "m": m, "gap": gap}
        if m >= 0:
            violated = not (scalar_le(rho_x - m, shifted, tolerance) and scalar_le(shifted, rho_x, tolerance))
        else:
            violated = not (scalar_le(rho_x, shifted, tolerance) and scalar_le(shifted, rho_x - m, tolerance))
        subadditivity.record(violated, gap, witness)
        strict.record(not scalars_close(gap, 0, tolerance), gap, witness)
        if level in declared_levels:
            declared.record(not scalars_close(gap, 0, tolerance), gap, witness)
    if not report.passed:
        logger.warning(f"Risk measure {rm.name} fails {report.failed_axioms()}.")
    return report


def _random_slice(tree, rng, level, draw) -> dict[int, Scalar]:
    return {node: draw() for node in tree.level_nodes(level)}


def conditional_axiom_check(rm: RiskMeasure, tree, level, rng, samples: SampleConfig = SampleConfig()) -> AxiomReport:
    """Conditional axioms of rho_level with F_level-measurable m and lambda."""
    tolerance = samples.comparison_tolerance
    report = AxiomReport(f"{rm.name}@{level}")
    nodes = tree.level_nodes(level)

    def compare(result, trial, left, right, exact_equality):
        for node in nodes:
            if exact_equality:
                violated = not scalars_close(left[node], right[node], tolerance)
            else:
                violated = not scalar_le(left[node], right[node], tolerance)
            result.record(violated, left[node] - right[node], {"trial": trial, "node": node})

    zero = constant(tree, Fraction(0))
    rho_zero = rm.conditional_evaluate(zero, level)
    compare(report.result("normalization"), 0, rho_zero, {node: Fraction(0) for node in nodes}, True)
    for trial in range(samples.count):
        x = _sample(tree, rng, samples)
        y = _sample(tree, rng, samples)
        rho_x = rm.conditional_evaluate(x, level)
        rho_y = rm.conditional_evaluate(y, level)

        amounts = _random_slice(tree, rng, level, lambda: _cash(rng, samples))
        shifted = rm.conditional_evaluate(x + conditional_payment(tree, amounts, level), level)
        compare(report.result("cash_invariance"), trial, shifted, {n: rho_x[n] - amounts[n] for n in nodes}, True)

        noise = random_process(tree, rng, 0, samples.high, samples.denominator)
        compare(report.result("monotonicity"), trial, rm.conditional_evaluate(x + noise, level), rho_x, False)

        weights = _random_slice(tree, rng, level, lambda: _weight(rng))
        weight_process = conditional_payment(tree, weights, level)
        complement = conditional_payment(tree, {n: 1 - weights[n] for n in nodes}, level)
        mixed = rm.conditional_evaluate(weight_process.times(x) + complement.times(y), level)
        bound = {n: weights[n] * rho_x[n] + (1 - weights[n]) * rho_y[n] for n in nodes}
        compare(report.result("convexity"), trial, mixed, bound, False)
    if not report.passed:
        logger.warning(f"Conditional axioms of {rm.name} at level {level} fail: {report.failed_axioms()}.")
    return report


def time_consistency_gap(rm: RiskMeasure, x: AdaptedProcess, level, later_level) -> float:
    """max over level nodes of |rho_t(X) - rho_t(X 1_{[t,s)} - rho_s(X) 1_{[s,T]})|."""
    tree = x.tree
    later = rm.conditional_evaluate(x, later_level)
    restarted = AdaptedProcess(
        tree,
        tuple(
            x[n] if tree.level_of(n) < later_level else -later[tree.ancestor(n, later_level)]
            for n in range(tree.node_count)
        ),
    )
    direct = rm.conditional_evaluate(x, level)
    recursive = rm.conditional_evaluate(restarted, level)
    return max(abs(float(direct[n] - recursive[n])) for n in tree.level_nodes(level))


def time_consistency_check(rm: RiskMeasure, tree, rng, samples: SampleConfig = SampleConfig()) -> AxiomReport:
    """The recursion rho_t(X) = rho_t(X 1_{[t,s)} - rho_s(X) 1_{[s,T]}) for random t <= s."""
    tolerance = samples.comparison_tolerance
    report = AxiomReport(rm.name)
    result = report.result("time_consistency")
    for trial in range(samples.count):
        x = _sample(tree, rng, samples)
        level = int(rng.integers(0, tree.depth + 1))
        later_level = int(rng.integers(level, tree.depth + 1))
        gap = time_consistency_gap(rm, x, level, later_level)
        result.record(gap > tolerance, gap, {"trial": trial, "t": level, "s": later_level})
    if not report.passed:
        logger.warning(f"Time consistency of {rm.name} fails with gap {result.max_violation}.")
    return report
