# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from rp_toolbox.filtration import AdaptedProcess, FiltrationTree, from_level_values, random_process, random_tree
from rp_toolbox.decomposition import (
    DecompositionMode,
    OptionalMeasure,
    associate_measure,
    bracket_process,
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
from rp_toolbox.decomposition.errors.decomposition_errors import (
    MeasureAssociationError,
    MeasureNormalizationError,
    MeasureValidationError,
    NotPredictableError,
)
from rp_toolbox.cli.acceptance import bracket_counterexample

HALF = Fraction(1, 2)


@pytest.fixture
def binary_tree():
    return FiltrationTree.from_branching(2, [HALF, HALF])


@pytest.fixture
def deterministic_measure(binary_tree):
    return OptionalMeasure(from_level_values(binary_tree, [Fraction(1, 4), HALF, Fraction(1)]))


def test_deterministic_measure_decomposition(deterministic_measure):
    decomposition = decompose_optional(deterministic_measure)
    assert set(decomposition.L.values) == {1}
    assert decomposition.D.values == (Fraction(3, 4), HALF, HALF, 0, 0, 0, 0)
    assert decomposition.mass == 1
    assert decomposition.tau.canonical() == (3, 4, 5, 6)
    assert recompose(decomposition).a.values == deterministic_measure.a.values
    assert verify_decomposition(decomposition, deterministic_measure).passed()


def test_deterministic_measure_both_modes_agree(deterministic_measure):
    assert has_vanishing_bracket(deterministic_measure)
    optional = decompose_optional(deterministic_measure)
    predictable = decompose_predictable(deterministic_measure)
    assert predictable.mode == DecompositionMode.PREDICTABLE
    assert optional.L.values == predictable.L.values
    assert optional.D.values == predictable.D.values


def test_modes_differ_when_bracket_does_not_vanish():
    measure = bracket_counterexample()
    bracket = bracket_process(measure)
    assert bracket[1] == Fraction(1, 4)
    assert bracket[2] == Fraction(-1, 4)
    optional = decompose_optional(measure)
    predictable = decompose_predictable(measure)
    assert optional.D[1] == Fraction(2, 3)
    assert predictable.D[1] == HALF
    assert optional.L[1] == Fraction(3, 2)
    assert predictable.L[1] == 2
    assert recompose(optional).a.values == measure.a.values
    assert recompose(predictable).a.values == measure.a.values


def test_degenerate_step_sets_discount_to_zero(binary_tree):
    # Nothing left to pay below node 1: U_1 + da_1 = 0
    measure = OptionalMeasure(AdaptedProcess(binary_tree, (0, 0, 0, 0, 0, 2, 2)))
    optional = decompose_optional(measure)
    assert optional.D.values == (1, 0, 1, 0, 0, 0, 0)
    assert optional.L.values == (1, 0, 2, 0, 0, 2, 2)
    assert recompose(optional).a.values == measure.a.values
    assert verify_decomposition(optional, measure).passed()
    # Predictable: U_1 = 0, so D drops at the children of node 1
    predictable = decompose_predictable(measure)
    assert predictable.D.values == (1, 1, 1, 0, 0, 0, 0)
    assert recompose(predictable).a.values == measure.a.values
    assert verify_decomposition(predictable, measure).passed()
    assert has_vanishing_bracket(measure)
    assert coincide_before_tau(optional, predictable)


def test_freezing_check_rejects_discount_moves_off_support(binary_tree):
    measure = OptionalMeasure(AdaptedProcess(binary_tree, (0, 0, 0, 0, 0, 2, 2)))
    decomposition = decompose_optional(measure)
    # D halved at node 1 where L = 0, instead of dropping to 0
    moved = AdaptedProcess(binary_tree, (1, HALF, 1, HALF, HALF, 0, 0), Fraction(1))
    tampered = replace(decomposition, D=moved)
    report = verify_decomposition(tampered, measure)
    assert not report.checks()["support_freezing"]


def test_unnormalized_measure_needs_override(binary_tree):
    measure = OptionalMeasure(from_level_values(binary_tree, [HALF, 1, 2]))
    with pytest.raises(MeasureNormalizationError):
        decompose_optional(measure)
    decomposition = decompose_optional(measure, mass_override=True)
    assert decomposition.mass == 2
    assert decomposition.L[0] == 2
    assert recompose(decomposition).a.values == measure.a.values
    with pytest.raises(MeasureAssociationError):
        associate_measure(decomposition.L)


def test_decreasing_process_is_not_a_measure(binary_tree):
    with pytest.raises(MeasureValidationError):
        OptionalMeasure(AdaptedProcess(binary_tree, (1, 0, 1, 1, 1, 1, 1)))


def test_predictable_mode_rejects_optional_jumps(binary_tree):
    values = (0, Fraction(1, 4), Fraction(3, 4), 1, 1, 1, 1)
    measure = OptionalMeasure(AdaptedProcess(binary_tree, values))
    with pytest.raises(NotPredictableError):
        decompose_predictable(measure)


def test_random_measures_round_trip_exactly():
    rng = np.random.default_rng(21)
    for _ in range(20):
        tree = random_tree(rng, int(rng.integers(1, 6)), max_nodes=200)
        measure = random_optional_measure(tree, rng)
        decomposition = decompose_optional(measure)
        assert recompose(decomposition).a.values == measure.a.values
        assert verify_decomposition(decomposition, measure).passed()


def test_random_predictable_measures_round_trip_exactly():
    rng = np.random.default_rng(22)
    for _ in range(20):
        tree = random_tree(rng, int(rng.integers(1, 5)), max_nodes=200)
        measure = random_optional_measure(tree, rng, predictable=True)
        decomposition = decompose_predictable(measure)
        assert recompose(decomposition).a.values == measure.a.values


def test_associated_measure_evaluators_agree():
    rng = np.random.default_rng(23)
    for _ in range(10):
        tree = random_tree(rng, 4, max_nodes=120)
        measure = random_optional_measure(tree, rng)
        decomposition = decompose_optional(measure)
        x = random_process(tree, rng)
        under_q = associate_measure(decomposition.L).stieltjes_expectation(x, decomposition.D)
        under_p = weighted_stieltjes_expectation(decomposition.L, x, decomposition.D)
        assert under_q == under_p
        assert linear_form(measure, x) == -under_p
