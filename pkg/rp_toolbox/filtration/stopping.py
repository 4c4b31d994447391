# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

import itertools
from dataclasses import dataclass
from typing import Callable, Iterator
import logging
# Create a logger for the filtration component
logger = logging.getLogger(__name__)

from rp_toolbox.filtration.config import config
from rp_toolbox.filtration.process import AdaptedProcess
from rp_toolbox.filtration.projections import expectation_below
from rp_toolbox.filtration.errors.filtration_errors import (
    LevelOutOfRangeError,
    StoppingTimeError,
    StoppingTimeExplosionError,
)


@dataclass(frozen=True)
class StoppingTime:
    """A stopping time given by the set of nodes where it stops.

    Exactly one node is marked along every root-to-leaf path. Deciding per
    node makes {tau <= t_k} a union of level-k subtrees automatically.
    """

    tree: object
    stops: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "stops", frozenset(self.stops))
        self.validate()

    # Raises: StoppingTimeError
    def validate(self):
        tree = self.tree
        for node in self.stops:
            if not 0 <= node < tree.node_count:
                raise StoppingTimeError(f"stop node {node} is not in the tree")
        for leaf in tree.leaves:
            marked = sum(1 for node in tree.path(leaf) if node in self.stops)
            if marked != 1:
                logger.error(f"Path to leaf {leaf} carries {marked} stop marks.")
                raise StoppingTimeError(f"path to leaf {leaf} carries {marked} stop marks")

    def canonical(self) -> tuple[int, ...]:
        return tuple(sorted(self.stops))

    def stops_at(self, node) -> bool:
        return node in self.stops

    def is_alive(self, node) -> bool:
        """True when tau >= level(node) on the atom of ``node``."""
        parent = self.tree.parent(node)
        while parent is not None:
            if parent in self.stops:
                return False
            parent = self.tree.parent(parent)
        return True

    def stopping_node(self, leaf) -> int:
        for node in self.tree.path(leaf):
            if node in self.stops:
                return node
        raise StoppingTimeError(f"no stop mark on the path to leaf {leaf}")

    def min_level(self) -> int:
        return min(self.tree.level_of(node) for node in self.stops)

    def indicator_alive(self) -> AdaptedProcess:
        """1_{tau > t_k} as an adapted process."""
        tree = self.tree
        values = [0] * tree.node_count
        for level in tree.levels:
            for node in level:
                parent = tree.parent(node)
                alive_before = 1 if parent is None else values[parent]
                values[node] = 0 if (alive_before == 0 or node in self.stops) else 1
        return AdaptedProcess(tree, tuple(values))


def constant_time(tree, level) -> StoppingTime:
    if not 0 <= level <= tree.depth:
        raise LevelOutOfRangeError(f"level {level} outside [0, {tree.depth}]")
    return StoppingTime(tree, frozenset(tree.level_nodes(level)))


def first_hitting_time(tree, predicate: Callable[[int], bool], from_level=0) -> StoppingTime:
    """First node at level >= from_level where ``predicate`` holds; leaves always stop."""
    stops = set()
    frontier = list(tree.level_nodes(from_level))
    while frontier:
        next_frontier = []
        for node in frontier:
            if not tree.children(node) or predicate(node):
                stops.add(node)
            else:
                next_frontier.extend(tree.children(node))
        frontier = next_frontier
    return StoppingTime(tree, frozenset(stops))


def count_stopping_times(tree, from_level=0) -> int:
    counts = [0] * tree.node_count
    for level in range(tree.depth, -1, -1):
        for node in tree.level_nodes(level):
            below = 1
            for child in tree.children(node):
                below *= counts[child]
            if not tree.children(node):
                counts[node] = 1
            elif level >= from_level:
                counts[node] = 1 + below
            else:
                counts[node] = below
    return counts[0]


def enumerate_stopping_times(tree, from_level=0, limit=None) -> Iterator[StoppingTime]:
    """Every stopping time tau with from_level <= tau <= T, each exactly once.

    Raises StoppingTimeExplosionError when the count exceeds ``limit`` (default
    ``config.stopping_time_limit``); use ``optimal_stopping_value`` instead.
    """
    if not 0 <= from_level <= tree.depth:
        raise LevelOutOfRangeError(f"level {from_level} outside [0, {tree.depth}]")
    limit = config.stopping_time_limit if limit is None else limit
    count = count_stopping_times(tree, from_level)
    if count > limit:
        logger.error(
            f"{count} stopping times from level {from_level} exceed the limit {limit}; "
            f"use the dynamic-programming evaluator."
        )
        raise StoppingTimeExplosionError(
            f"{count} stopping times exceed the enumeration limit {limit}; use optimal_stopping_value"
        )
    logger.debug(f"Enumerating {count} stopping times from level {from_level}.")
    return _generate_stopping_times(tree, from_level)


def _generate_stopping_times(tree, from_level) -> Iterator[StoppingTime]:
    def _choices(node) -> Iterator[frozenset[int]]:
        children = tree.children(node)
        if not children:
            yield frozenset((node,))
            return
        if tree.level_of(node) >= from_level:
            yield frozenset((node,))
        for combination in itertools.product(*(list(_choices(child)) for child in children)):
            yield frozenset().union(*combination)

    for stops in _choices(tree.root):
        yield StoppingTime(tree, stops)


def optimal_stopping_value(reward: AdaptedProcess, from_level=0) -> AdaptedProcess:
    """Snell envelope V_k = max(reward_k, E[V_{k+1} | F_k]) for levels >= from_level.

    Below ``from_level`` stopping is not allowed and V_k = E[V_{k+1} | F_k].
    """
    tree = reward.tree
    values = list(reward.values)
    for level in range(tree.depth - 1, -1, -1):
        for node in tree.level_nodes(level):
            continuation = expectation_below(tree, node, values)
            values[node] = max(reward.values[node], continuation) if level >= from_level else continuation
    return AdaptedProcess(tree, tuple(values))
