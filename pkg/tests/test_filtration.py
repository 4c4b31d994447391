# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

from fractions import Fraction

import numpy as np
import pytest

from rp_toolbox.filtration import (
    AdaptedProcess,
    FiltrationTree,
    StoppingTime,
    conditional_expectation_process,
    conditional_payment,
    count_stopping_times,
    enumerate_stopping_times,
    from_level_values,
    is_martingale,
    optimal_stopping_value,
    predictable_projection,
    random_process,
    random_tree,
    single_payment,
    terminal_payoff,
)
from rp_toolbox.filtration.errors.filtration_errors import (
    LevelOutOfRangeError,
    PredictabilityError,
    ProcessTotalityError,
    StoppingTimeError,
    StoppingTimeExplosionError,
    TreeValidationError,
)

HALF = Fraction(1, 2)


@pytest.fixture
def binary_tree():
    return FiltrationTree.from_branching(2, [HALF, HALF])


def test_branching_tree_layout(binary_tree):
    assert binary_tree.node_count == 7
    assert binary_tree.depth == 2
    assert binary_tree.levels == ((0,), (1, 2), (3, 4, 5, 6))
    assert binary_tree.node_probability(5) == Fraction(1, 4)
    assert binary_tree.path(6) == (0, 2, 6)
    assert binary_tree.ancestor(4, 1) == 1
    assert binary_tree.subtree_leaves(2) == (5, 6)


def test_probabilities_must_sum_to_one():
    with pytest.raises(TreeValidationError):
        FiltrationTree.from_edges([None, 0, 0], [1, Fraction(1, 2), Fraction(1, 3)])


def test_leaf_before_horizon_is_rejected():
    with pytest.raises(TreeValidationError):
        FiltrationTree.from_edges([None, 0, 0, 1], [1, HALF, HALF, 1])


def test_time_grid_must_increase():
    with pytest.raises(TreeValidationError):
        FiltrationTree.from_branching(2, [HALF, HALF], time_grid=[0, 1, 1])


def test_random_tree_reaches_horizon():
    rng = np.random.default_rng(4)
    for _ in range(10):
        tree = random_tree(rng, 4, max_nodes=60)
        assert tree.depth == 4
        assert all(tree.level_of(leaf) == 4 for leaf in tree.leaves)
        assert sum(tree.node_probability(leaf) for leaf in tree.leaves) == 1


def test_single_payment_starts_at_level(binary_tree):
    payment = single_payment(binary_tree, Fraction(3), 1)
    assert payment.values == (0, 3, 3, 3, 3, 3, 3)
    with pytest.raises(LevelOutOfRangeError):
        single_payment(binary_tree, 1, 3)


def test_conditional_payment_follows_level_node(binary_tree):
    payment = conditional_payment(binary_tree, {1: Fraction(2), 2: Fraction(-1)}, 1)
    assert payment.values == (0, 2, -1, 2, 2, -1, -1)


def test_process_must_be_total(binary_tree):
    with pytest.raises(ProcessTotalityError):
        AdaptedProcess(binary_tree, (0, 1))
    with pytest.raises(ProcessTotalityError):
        from_level_values(binary_tree, [1, 2])


def test_predictable_flag_is_checked(binary_tree):
    with pytest.raises(PredictabilityError):
        AdaptedProcess(binary_tree, (0, 1, 2, 0, 0, 0, 0), predictable=True)


def test_conditional_expectation_process_is_martingale():
    rng = np.random.default_rng(1)
    tree = random_tree(rng, 3)
    payoff = random_process(tree, rng)
    martingale = conditional_expectation_process(terminal_payoff(tree, lambda leaf: payoff[leaf]))
    assert is_martingale(martingale)
    assert martingale[tree.root] == sum(tree.node_probability(leaf) * payoff[leaf] for leaf in tree.leaves)


def test_predictable_projection_is_sibling_constant(binary_tree):
    x = AdaptedProcess(binary_tree, (5, 1, 3, 0, 4, 2, 2))
    projected = predictable_projection(x)
    assert projected.values == (5, 2, 2, 2, 2, 2, 2)
    assert projected.is_sibling_constant()


def test_stopping_time_needs_one_mark_per_path(binary_tree):
    with pytest.raises(StoppingTimeError):
        StoppingTime(binary_tree, frozenset({1, 3}))
    with pytest.raises(StoppingTimeError):
        StoppingTime(binary_tree, frozenset({0, 1, 5, 6}))
    tau = StoppingTime(binary_tree, frozenset({1, 5, 6}))
    assert tau.stopping_node(4) == 1
    assert tau.min_level() == 1
    assert tau.indicator_alive().values == (1, 0, 1, 0, 0, 0, 0)


def test_stopping_time_count_and_enumeration(binary_tree):
    assert count_stopping_times(binary_tree) == 5
    assert count_stopping_times(binary_tree, from_level=1) == 4
    times = list(enumerate_stopping_times(binary_tree))
    assert len(times) == 5
    assert len({tau.canonical() for tau in times}) == 5


def test_enumeration_limit_raises(binary_tree):
    with pytest.raises(StoppingTimeExplosionError):
        enumerate_stopping_times(binary_tree, limit=3)


def test_optimal_stopping_matches_enumeration():
    rng = np.random.default_rng(9)
    for _ in range(5):
        tree = random_tree(rng, 3, max_nodes=40)
        reward = random_process(tree, rng)
        best = max(
            sum(tree.node_probability(node) * reward[node] for node in tau.stops)
            for tau in enumerate_stopping_times(tree)
        )
        assert optimal_stopping_value(reward)[tree.root] == best
