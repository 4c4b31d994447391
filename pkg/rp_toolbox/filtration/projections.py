# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

import logging
# Create a logger for the filtration component
logger = logging.getLogger(__name__)

from rp_toolbox.scalars import Scalar, scalars_close
from rp_toolbox.filtration.process import AdaptedProcess, LevelSlice
from rp_toolbox.filtration.errors.filtration_errors import LevelOutOfRangeError


def expectation_below(tree, node, child_values) -> Scalar:
    # One-step conditional expectation at ``node`` of values held by its children
    total: Scalar = 0
    for child in tree.children(node):
        total += tree.node(child).probability * child_values[child]
    return total


# Raises: LevelOutOfRangeError
def conditional_expectation(source: LevelSlice, level) -> LevelSlice:
    """E[source | F_level], computed by one-step averaging (tower property).

    ``source`` is a RandomVariable or any level slice of an adapted process;
    the result is exact whenever the inputs are rational.
    """
    tree = source.tree
    if not 0 <= level <= source.level:
        logger.error(f"Cannot condition a level-{source.level} variable on level {level}.")
        raise LevelOutOfRangeError(f"level {level} outside [0, {source.level}]")
    values = dict(source.values)
    for current in range(source.level - 1, level - 1, -1):
        values = {node: expectation_below(tree, node, values) for node in tree.level_nodes(current)}
    return LevelSlice(tree, level, values)


def conditional_expectation_process(x: AdaptedProcess) -> AdaptedProcess:
    """The martingale E[x_T | F_k] at every node."""
    tree = x.tree
    values = list(x.values)
    for level in range(tree.depth - 1, -1, -1):
        for node in tree.level_nodes(level):
            values[node] = expectation_below(tree, node, values)
    return AdaptedProcess(tree, tuple(values))


def predictable_projection(x: AdaptedProcess) -> AdaptedProcess:
    """E[x_k | F_{k-1}] at every level-k node; the root value is kept as is."""
    tree = x.tree
    values = list(x.values)
    for level in tree.levels[:-1]:
        for parent in level:
            projected = expectation_below(tree, parent, x.values)
            for child in tree.children(parent):
                values[child] = projected
    return AdaptedProcess(tree, tuple(values), x.pre_time_zero, predictable=True)


def sup_norm(x: AdaptedProcess) -> Scalar:
    return max(abs(v) for v in x.values)


def is_martingale(x: AdaptedProcess, tolerance=0.0) -> bool:
    tree = x.tree
    return all(
        scalars_close(expectation_below(tree, node, x.values), x.values[node], tolerance)
        for level in tree.levels[:-1]
        for node in level
    )
