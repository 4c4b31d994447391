# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

import math
from fractions import Fraction

import numpy as np
import pytest

from rp_toolbox.filtration import (
    AdaptedProcess,
    FiltrationTree,
    constant,
    optimal_stopping_value,
    random_process,
    single_payment,
)
from rp_toolbox.decomposition import OptionalMeasure
from rp_toolbox.riskcore import (
    AcceptanceSet,
    DiscountedExpectedLoss,
    ExpectedLoss,
    OptionalControl,
    PenaltyFunction,
    PenaltyKind,
    RobustRiskMeasure,
    SampleConfig,
    WorstCase,
    acceptance_set_check,
    additivity_profile,
    axiom_check,
    capital_requirement,
    cash_subadditivity_check,
    conditional_axiom_check,
    extreme_point_controls,
    minimal_penalty,
    robust_evaluate,
    stopping_time_controls,
    terminal_controls,
    time_consistency_check,
)
from rp_toolbox.riskcore.errors.riskcore_errors import (
    ControlValidationError,
    EmptyControlSetError,
    PenaltyNormalizationError,
)

HALF = Fraction(1, 2)
SAMPLES = SampleConfig(count=20)


@pytest.fixture
def tree():
    return FiltrationTree.from_branching(3, [HALF, HALF])


@pytest.fixture
def rng():
    return np.random.default_rng(17)


def test_worst_case_is_the_robust_measure_of_point_masses(tree, rng):
    rm = RobustRiskMeasure(PenaltyFunction.zero(extreme_point_controls(tree)))
    for _ in range(10):
        x = random_process(tree, rng)
        assert rm.evaluate(x) == WorstCase().evaluate(x)


def test_robust_value_over_stopping_times_is_the_snell_envelope(tree, rng):
    penalty = PenaltyFunction.zero(stopping_time_controls(tree))
    for _ in range(5):
        x = random_process(tree, rng)
        assert robust_evaluate(x, penalty).value == optimal_stopping_value(-x)[tree.root]


def test_expected_loss_is_the_terminal_control(tree, rng):
    penalty = PenaltyFunction.zero(terminal_controls(tree, [constant(tree, 1).terminal()]))
    x = random_process(tree, rng)
    assert robust_evaluate(x, penalty).value == ExpectedLoss().evaluate(x)


def test_robust_evaluation_is_independent_of_workers(tree, rng):
    controls = extreme_point_controls(tree)
    penalty = PenaltyFunction.random(controls, rng)
    x = random_process(tree, rng)
    sequential = robust_evaluate(x, penalty, workers=1)
    threaded = robust_evaluate(x, penalty, workers=4)
    assert sequential.value == threaded.value
    assert sequential.index == threaded.index


def test_penalty_must_be_normalized(tree):
    controls = extreme_point_controls(tree)[:2]
    with pytest.raises(PenaltyNormalizationError):
        PenaltyFunction(controls, [1, 2])
    with pytest.raises(PenaltyNormalizationError):
        PenaltyFunction(controls, [0, -1])
    with pytest.raises(EmptyControlSetError):
        PenaltyFunction([], [])


def test_indicator_penalty_restricts_the_support(tree, rng):
    controls = extreme_point_controls(tree)
    penalty = PenaltyFunction.indicator(controls, [0])
    x = random_process(tree, rng)
    assert robust_evaluate(x, penalty).value == -x[tree.root]
    assert penalty(controls[1]) == math.inf


def test_optional_control_needs_unit_mass(tree):
    a = AdaptedProcess(tree, (Fraction(2),) * tree.node_count)
    with pytest.raises(ControlValidationError):
        OptionalControl(OptionalMeasure(a))


@pytest.mark.parametrize("rm", [ExpectedLoss(3), WorstCase()])
def test_static_axioms(rm, tree, rng):
    report = axiom_check(rm, tree, rng, SAMPLES)
    assert report.passed
    assert report.results["positive_homogeneity"].informational
    assert cash_subadditivity_check(rm, tree, rng, SAMPLES).passed


@pytest.mark.parametrize("rm", [ExpectedLoss(3), WorstCase()])
def test_conditional_axioms_and_time_consistency(rm, tree, rng):
    for level in range(tree.depth + 1):
        assert conditional_axiom_check(rm, tree, level, rng, SampleConfig(count=5)).passed
    assert time_consistency_check(rm, tree, rng, SAMPLES).passed


def test_discounted_measure_gap_has_closed_form(tree, rng):
    beta = 0.5
    rm = DiscountedExpectedLoss(tree, beta)
    x = random_process(tree, rng)
    m = Fraction(3)
    for level in range(tree.depth + 1):
        gap = rm.evaluate(x + single_payment(tree, m, level)) - (rm.evaluate(x) - m)
        assert gap == pytest.approx(float(m) * (1 - math.exp(-beta * level)), abs=1e-12)
    report = cash_subadditivity_check(rm, tree, rng, SAMPLES)
    assert report.passed
    assert report.results["strict_gap"].violations > 0


def test_capital_requirement_of_cash_invariant_measure(tree, rng):
    acceptance = AcceptanceSet(WorstCase())
    for _ in range(5):
        x = random_process(tree, rng)
        assert capital_requirement(acceptance, x) == pytest.approx(float(WorstCase().evaluate(x)), abs=1e-6)
    assert acceptance_set_check(acceptance, tree, rng, SAMPLES).passed


def test_minimal_penalty_of_supported_control_is_zero(tree):
    controls = extreme_point_controls(tree)
    estimate = minimal_penalty(WorstCase(), controls[3])
    assert estimate.kind == PenaltyKind.EXACT
    assert estimate.value == pytest.approx(0.0, abs=1e-7)


def test_minimal_penalty_outside_a_linear_measure_is_unbounded(tree):
    estimate = minimal_penalty(ExpectedLoss(), extreme_point_controls(tree)[0])
    assert estimate.kind == PenaltyKind.UNBOUNDED
    assert not estimate.is_finite


def test_point_mass_measure_is_cash_additive_at_zero_only(tree, rng):
    profile = additivity_profile(PenaltyFunction.zero(extreme_point_controls(tree)), rng, sample_count=2)
    assert all(result.agree for result in profile.results.values())
    assert profile.results[0].additive
    assert not profile.results[1].additive
    assert profile.consistent
