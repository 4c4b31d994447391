# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Acceptance criteria run by the ``suite`` subcommand.

Every criterion takes its own generator and an instance count and returns a
list of checks; failed checks carry the first offending instance.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
import logging
# Create a logger for the cli component
logger = logging.getLogger(__name__)

import numpy as np

from rp_toolbox.filtration import (
    AdaptedProcess,
    FiltrationTree,
    constant,
    random_process,
    random_tree,
    single_payment,
    terminal_payoff,
)
from rp_toolbox.decomposition import (
    OptionalMeasure,
    associate_measure,
    coincide_before_tau,
    decompose_optional,
    decompose_predictable,
    has_vanishing_bracket,
    linear_form,
    random_optional_measure,
    recompose,
    verify_decomposition,
    weighted_stieltjes_expectation,
)
from rp_toolbox.riskcore import (
    PenaltyFunction,
    RobustRiskMeasure,
    SampleConfig,
    additivity_profile,
    axiom_check,
    cash_subadditivity_check,
    discounted_control,
    extreme_point_controls,
    random_mixture_controls,
    robust_evaluate,
    stopping_time_controls,
    terminal_controls,
    time_consistency_check,
)
from rp_toolbox.bsde import (
    BrownianLattice,
    boundedness_violation,
    brownian_values,
    build_brownian_tree,
    custom_grid_driver,
    linear_driver,
    negative_example_check,
    quadratic_driver,
    risk_measure_from_bsde,
    snell_envelope,
    solve_bsde,
    solve_rbsde,
    zero_driver,
)
from rp_toolbox.cli.config import config
from rp_toolbox.cli.report import Check
from rp_toolbox.cli.commands import GRID_TOLERANCE, duality_checks


@dataclass
class Tally:
    """Failures of one property over many instances."""

    name: str
    tolerance: float | None = None
    trials: int = 0
    failures: int = 0
    worst: float = 0.0
    witness: dict | None = None

    def record(self, failed, witness, magnitude=0.0):
        self.trials += 1
        self.worst = max(self.worst, float(magnitude))
        if failed:
            self.failures += 1
            if self.witness is None:
                self.witness = witness

    def check(self) -> Check:
        value = self.worst if self.tolerance is not None else self.failures
        witness = None if self.witness is None else {**self.witness, "failures": self.failures, "trials": self.trials}
        return Check(self.name, self.failures == 0, value, self.tolerance, witness)


def _first_difference(left, right) -> int | None:
    return next((node for node, (a, b) in enumerate(zip(left, right)) if a != b), None)


def _random_tree(rng, max_depth, max_branching=3):
    depth = int(rng.integers(1, max_depth + 1))
    return random_tree(rng, depth, max_branching, config.suite_max_nodes)


def decomposition_round_trip(rng, count) -> list[Check]:
    round_trip = Tally("decomposition.round_trip")
    verified = Tally("decomposition.verify")
    for instance in range(count):
        measure = random_optional_measure(_random_tree(rng, 8), rng)
        decomposition = decompose_optional(measure)
        node = _first_difference(measure.a.values, recompose(decomposition).a.values)
        round_trip.record(node is not None, {"instance": instance, "node": node})
        report = verify_decomposition(decomposition, measure)
        verified.record(not report.passed(), {"instance": instance, "failed": sorted(k for k, v in report.checks().items() if not v)})
    return [round_trip.check(), verified.check()]


def bracket_counterexample() -> OptionalMeasure:
    """Predictable measure on the binary two-period tree with a non-vanishing bracket.

    a jumps by 1/2 at time 1 on both atoms and by 1 more at time 2 only below
    the first one, so M and a move together at time 1.
    """
    tree = FiltrationTree.from_branching(2, [Fraction(1, 2), Fraction(1, 2)])
    first = tree.level_nodes(1)[0]
    values = []
    for node in range(tree.node_count):
        level = tree.level_of(node)
        if level == 0:
            values.append(Fraction(0))
        elif level == 1:
            values.append(Fraction(1, 2))
        else:
            values.append(Fraction(3, 2) if tree.parent(node) == first else Fraction(1, 2))
    return OptionalMeasure(AdaptedProcess(tree, tuple(values)))


def predictable_decomposition(rng, count) -> list[Check]:
    round_trip = Tally("predictable.round_trip")
    verified = Tally("predictable.verify")
    coincidence = Tally("predictable.coincidence")
    vanishing_instances = 0
    for instance in range(count):
        measure = random_optional_measure(_random_tree(rng, 6), rng, predictable=True)
        predictable = decompose_predictable(measure)
        node = _first_difference(measure.a.values, recompose(predictable).a.values)
        round_trip.record(node is not None, {"instance": instance, "node": node})
        verified.record(not verify_decomposition(predictable, measure).passed(), {"instance": instance})
        if has_vanishing_bracket(measure):
            vanishing_instances += 1
            optional = decompose_optional(measure)
            same = coincide_before_tau(optional, predictable)
            coincidence.record(not same, {"instance": instance})
    counterexample = bracket_counterexample()
    optional = decompose_optional(counterexample)
    predictable = decompose_predictable(counterexample)
    differ = optional.D.values != predictable.D.values or optional.L.values != predictable.L.values
    return [
        round_trip.check(),
        verified.check(),
        coincidence.check(),
        Check(
            "predictable.differs_with_bracket",
            differ and not has_vanishing_bracket(counterexample),
            vanishing_instances,
            witness={"optional_D": list(optional.D.values), "predictable_D": list(predictable.D.values)},
        ),
    ]


def measure_association(rng, count) -> list[Check]:
    agreement = Tally("association.two_evaluators")
    for instance in range(count):
        tree = _random_tree(rng, 5)
        decomposition = decompose_optional(random_optional_measure(tree, rng))
        x = random_process(tree, rng)
        via_q = associate_measure(decomposition.L).stieltjes_expectation(x, decomposition.D)
        via_p = weighted_stieltjes_expectation(decomposition.L, x, decomposition.D)
        agreement.record(via_q != via_p, {"instance": instance, "under_q": via_q, "under_p": via_p})
    return [agreement.check()]


def dual_representation(rng, count) -> list[Check]:
    exact = Tally("dual_representation.robust_equals_direct")
    axioms = Tally("dual_representation.axioms")
    subadditivity = Tally("dual_representation.cash_subadditivity")
    samples = SampleConfig(count=10)
    for instance in range(count):
        tree = _random_tree(rng, 3, max_branching=2)
        controls = extreme_point_controls(tree) + random_mixture_controls(extreme_point_controls(tree), rng, 3)
        penalty = PenaltyFunction.random(controls, rng) if instance % 2 else PenaltyFunction.zero(controls)
        rm = RobustRiskMeasure(penalty)
        x = random_process(tree, rng)
        direct = max(-linear_form(control.measure, x) - value for control, value in penalty.support())
        robust = robust_evaluate(x, penalty).value
        exact.record(robust != direct, {"instance": instance, "robust": robust, "direct": direct})
        axiom_report = axiom_check(rm, tree, rng, samples)
        axioms.record(not axiom_report.passed, {"instance": instance, "failed": axiom_report.failed_axioms()})
        cash_report = cash_subadditivity_check(rm, tree, rng, samples)
        subadditivity.record(not cash_report.passed, {"instance": instance, "failed": cash_report.failed_axioms()})
    return [exact.check(), axioms.check(), subadditivity.check()]


def _control_family(kind, tree, rng) -> tuple[PenaltyFunction, float | None]:
    """Penalty over one of five control families; the rate is set for the discounted one."""
    match kind:
        case 0:
            return PenaltyFunction.zero(extreme_point_controls(tree), "extreme points"), None
        case 1:
            return PenaltyFunction.zero(stopping_time_controls(tree), "stopping times"), None
        case 2:
            return PenaltyFunction.zero(terminal_controls(tree, [constant(tree, 1).terminal()]), "terminal"), None
        case 3:
            mixtures = random_mixture_controls(extreme_point_controls(tree), rng, 3)
            return PenaltyFunction.random(mixtures, rng, description="random mixtures"), None
    rate = float(rng.choice([0.25, 0.5, 1.0]))
    return PenaltyFunction.zero([discounted_control(tree, rate)], f"discounted:{rate}"), rate


def cash_additivity(rng, count) -> list[Check]:
    agreement = Tally("cash_additivity.structural_matches_probe")
    consistency = Tally("cash_additivity.consistent_profile")
    discounted_gap = Tally("cash_additivity.discounted_gap", GRID_TOLERANCE)
    discounted_verdict = Tally("cash_additivity.discounted_not_additive")
    for family in range(count):
        kind = family % 5
        if kind in (1, 4):
            tree = FiltrationTree.from_branching(2 if kind == 1 else 3, [Fraction(1, 2), Fraction(1, 2)])
        else:
            tree = _random_tree(rng, 3, 2)
        penalty, rate = _control_family(kind, tree, rng)
        profile = additivity_profile(penalty, rng, sample_count=2)
        disagreeing = [level for level, result in profile.results.items() if not result.agree]
        agreement.record(bool(disagreeing), {"family": family, "description": penalty.description, "levels": disagreeing})
        consistency.record(not profile.consistent, {"family": family, "description": penalty.description})
        if rate is None:
            continue
        additive_later = [level for level in range(1, tree.depth + 1) if profile.results[level].structural]
        discounted_verdict.record(bool(additive_later), {"family": family, "rate": rate, "levels": additive_later})
        rm = RobustRiskMeasure(penalty)
        x = random_process(tree, rng)
        rho = rm.evaluate(x)
        for level in range(1, tree.depth + 1):
            m = Fraction(int(rng.integers(1, 9)), 2)
            gap = float(rm.evaluate(x + single_payment(tree, m, level)) - (rho - m))
            closed_form = float(m) * (1 - math.exp(-rate * float(tree.time(level))))
            error = abs(gap - closed_form)
            discounted_gap.record(error > GRID_TOLERANCE, {"family": family, "level": level, "m": m, "gap": gap}, error)
    return [agreement.check(), consistency.check(), discounted_verdict.check(), discounted_gap.check()]


def random_bounded_driver(rng):
    """A normalized monotone driver of a random family, with the parameters drawn.

    Constants stay small enough for |Y| <= sup|X| to hold on lattices with at
    least two steps and |X| <= 4.
    """
    family = ("linear", "quadratic", "custom-grid")[int(rng.integers(0, 3))]
    beta = float(rng.integers(0, 5)) / 4
    if family == "quadratic":
        # gamma <= 2 / sup|X| on the binomial lattice
        gamma = float(rng.integers(1, 5)) / 8
        return quadratic_driver(gamma, beta), {"family": family, "beta": beta, "gamma": gamma}
    if family == "custom-grid":
        up, down = (float(k) / 4 for k in rng.integers(0, 5, size=2))
        y_grid = np.linspace(-8.0, 8.0, 5)
        z_grid = np.linspace(-16.0, 16.0, 9)
        values = [[up * max(z, 0.0) + down * max(-z, 0.0) - beta * y for z in z_grid] for y in y_grid]
        return custom_grid_driver(y_grid, z_grid, values), {"family": family, "beta": beta, "up": up, "down": down}
    theta = float(rng.integers(0, 5)) / 4
    return linear_driver(beta, theta), {"family": family, "beta": beta, "theta": theta}


def bsde_boundedness(rng, count) -> list[Check]:
    tallies = {reflected: Tally(f"boundedness.{'rbsde' if reflected else 'bsde'}", GRID_TOLERANCE) for reflected in (False, True)}
    for run in range(count):
        space = BrownianLattice(int(rng.integers(2, 11)))
        driver, draws = random_bounded_driver(rng)
        x = random_process(space, rng, -4, 4)
        for reflected, tally in tallies.items():
            solution = (solve_rbsde if reflected else solve_bsde)(x, driver, space)
            violation = boundedness_violation(solution)
            tally.record(violation > GRID_TOLERANCE, {"run": run, **draws, "violation": violation}, violation)
    return [tally.check() for tally in tallies.values()]


def linear_convergence(rng=None, count=None, steps=(16, 32, 64), beta=0.5) -> list[Check]:
    """Y_0 for g = -beta y and X = -1_{[T]} against exp(-beta), with the fitted order."""
    driver = linear_driver(beta=beta)
    errors = []
    for n in steps:
        space = BrownianLattice(n)
        errors.append(abs(solve_bsde(single_payment(space, -1.0, n), driver, space).value - math.exp(-beta)))
    slope, _ = np.polyfit(np.log(steps), np.log(errors), 1)
    order = float(-slope)
    constant_bound = max(error * n for error, n in zip(errors, steps))
    witness = {"steps": list(steps), "errors": errors, "C": constant_bound}
    return [Check("linear_convergence.order", order >= 0.9, order, witness=witness)]


def strong_duality(rng=None, count=None, steps=10, beta=0.4, theta=0.3) -> list[Check]:
    space = BrownianLattice(steps)
    values = brownian_values(space)
    x = terminal_payoff(space, lambda leaf: float(np.sign(values[leaf])))
    checks, _ = duality_checks(x, linear_driver(beta, theta), space, tolerance=1e-6)
    return [Check(f"strong_duality.{check.name}", check.passed, check.value, check.tolerance, check.witness) for check in checks]


def reflected_duality(rng, count, theta=0.3, epsilon=1e-6) -> list[Check]:
    oracle = Tally("reflected_duality.snell_oracle")
    for run in range(count):
        space = BrownianLattice(int(rng.integers(1, 13)))
        x = random_process(space, rng)
        reflected = solve_rbsde(x, zero_driver(), space).Y.values
        envelope = snell_envelope(-x.as_float(), space)
        node = _first_difference(envelope, reflected)
        oracle.record(node is not None, {"run": run, "node": node})
    space = BrownianLattice(10)
    x = random_process(space, rng, -4, 4)
    checks, _ = duality_checks(x, linear_driver(theta=theta), space, reflected=True, epsilon=epsilon, tolerance=1e-6)
    return [oracle.check()] + [
        Check(f"reflected_duality.{check.name}", check.passed, check.value, check.tolerance, check.witness) for check in checks
    ]


def negative_example(rng=None, count=None) -> list[Check]:
    result = negative_example_check()
    return [
        Check(
            "negative_example.classical_violation",
            result.classical_violation >= 1e-3,
            result.classical_violation,
            witness=result.witness or {"probes": result.probes},
        ),
        Check(
            "negative_example.cash_flow_form",
            result.cash_flow_violation <= GRID_TOLERANCE,
            result.cash_flow_violation,
            GRID_TOLERANCE,
            result.cash_flow_witness,
        ),
    ]


def time_consistency(rng, count, steps=5) -> list[Check]:
    space = build_brownian_tree(steps)
    driver = linear_driver(beta=0.4, theta=0.3)
    samples = SampleConfig(count=count, low=-4, high=4, tolerance=GRID_TOLERANCE)
    checks = []
    for reflected in (False, True):
        rm = risk_measure_from_bsde(driver, reflected, space)
        result = time_consistency_check(rm, space, rng, samples).result("time_consistency")
        checks.append(
            Check(f"time_consistency.{rm.name}", result.passed, result.max_violation, GRID_TOLERANCE, result.witness)
        )
    return checks


@dataclass(frozen=True)
class Criterion:
    index: int
    name: str
    run: object
    # Key into the suite counts, None for single-instance criteria
    count_key: str | None = None


CRITERIA = (
    Criterion(1, "decomposition round trip", decomposition_round_trip, "decomposition"),
    Criterion(2, "predictable decomposition", predictable_decomposition, "predictable"),
    Criterion(3, "measure association", measure_association, "association"),
    Criterion(4, "dual representation", dual_representation, "dual_representation"),
    Criterion(5, "cash additivity characterization", cash_additivity, "cash_additivity"),
    Criterion(6, "BSDE boundedness", bsde_boundedness, "boundedness"),
    Criterion(7, "linear driver convergence", linear_convergence),
    Criterion(8, "strong duality", strong_duality),
    Criterion(9, "reflected duality", reflected_duality, "snell"),
    Criterion(10, "negative example", negative_example),
    Criterion(11, "time consistency", time_consistency, "time_consistency"),
)


def run_criterion(criterion: Criterion, seed, counts) -> list[Check]:
    """Checks of one criterion, prefixed with its index; the generator depends only on (seed, index)."""
    rng = np.random.default_rng([seed, criterion.index])
    count = None if criterion.count_key is None else counts[criterion.count_key]
    checks = criterion.run(rng, count)
    failed = [check.name for check in checks if not check.passed]
    if failed:
        logger.warning(f"Criterion {criterion.index} ({criterion.name}) failed: {failed}.")
    else:
        logger.info(f"Criterion {criterion.index} ({criterion.name}) passed.")
    return [
        Check(f"c{criterion.index:02d}.{check.name}", check.passed, check.value, check.tolerance, check.witness)
        for check in checks
    ]
