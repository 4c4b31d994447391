# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence
import logging
# Create a logger for the filtration component
logger = logging.getLogger(__name__)

from rp_toolbox.scalars import Scalar, to_scalar
from rp_toolbox.filtration.errors.filtration_errors import (
    LevelOutOfRangeError,
    TreeValidationError,
)


@dataclass(frozen=True)
class Node:
    index: int
    level: int
    parent: int | None
    children: tuple[int, ...]
    # Transition probability from the parent (1 at the root)
    probability: Fraction
    # Brownian increment carried by the edge into this node, if any
    increment: float | None = None


class FiltrationTree:
    """Finite filtered probability space stored as a rooted event tree.

    Node ``0`` is the root (level 0); every leaf sits at level ``depth``.
    The atoms of F_k are the nodes of level k, so a process is adapted as soon
    as it assigns one value per node. Nodes are numbered so that a parent
    always precedes its children.
    """

    def __init__(self, nodes: Sequence[Node], time_grid: Sequence[Scalar] | None = None):
        self._nodes = tuple(nodes)
        if not self._nodes:
            logger.error("A filtration tree needs at least a root node.")
            raise TreeValidationError("empty tree")
        depth = max(node.level for node in self._nodes)
        if time_grid is None:
            time_grid = [Fraction(k) for k in range(depth + 1)]
        self._time_grid = tuple(to_scalar(t) if not isinstance(t, float) else t for t in time_grid)
        levels: list[list[int]] = [[] for _ in range(depth + 1)]
        for node in self._nodes:
            levels[node.level].append(node.index)
        self._levels = tuple(tuple(level) for level in levels)
        self.validate()

    # Raises: TreeValidationError
    def validate(self):
        root = self._nodes[0]
        if root.index != 0 or root.level != 0 or root.parent is not None:
            logger.error("Node 0 must be the root at level 0.")
            raise TreeValidationError("node 0 is not a root")
        if len(self._levels[0]) != 1:
            logger.error(f"Level 0 holds {len(self._levels[0])} nodes, expected a single root.")
            raise TreeValidationError("level 0 is not a singleton")
        if len(self._time_grid) != self.depth + 1:
            logger.error(f"Time grid has {len(self._time_grid)} points for {self.depth} steps.")
            raise TreeValidationError("time grid length mismatch")
        if self._time_grid[0] != 0 or any(
            later <= earlier for earlier, later in zip(self._time_grid, self._time_grid[1:])
        ):
            logger.error(f"Time grid must start at 0 and increase strictly: {self._time_grid}.")
            raise TreeValidationError("invalid time grid")
        for position, node in enumerate(self._nodes):
            if node.index != position:
                raise TreeValidationError(f"node {node.index} stored at position {position}")
            if node.parent is not None:
                if not 0 <= node.parent < node.index:
                    raise TreeValidationError(f"node {node.index} has an invalid parent {node.parent}")
                parent = self._nodes[node.parent]
                if parent.level + 1 != node.level or node.index not in parent.children:
                    raise TreeValidationError(f"node {node.index} is not linked to its parent")
                if not 0 < node.probability <= 1:
                    logger.error(f"Transition probability into node {node.index} is {node.probability}.")
                    raise TreeValidationError(f"probability of node {node.index} outside (0, 1]")
            elif position != 0:
                raise TreeValidationError(f"node {node.index} has no parent")
            if node.children:
                if sum(self._nodes[child].probability for child in node.children) != 1:
                    logger.error(f"Child probabilities of node {node.index} do not sum to 1.")
                    raise TreeValidationError(f"probabilities below node {node.index} do not sum to 1")
            elif node.level != self.depth:
                logger.error(f"Node {node.index} at level {node.level} has no children.")
                raise TreeValidationError(f"node {node.index} is a leaf before the horizon")

    @classmethod
    def from_edges(cls, parents, probabilities, time_grid=None, increments=None):
        """Build a tree from per-node parent indices and transition probabilities.

        ``parents[0]`` must be ``None``; ``probabilities[0]`` is ignored.
        """
        count = len(parents)
        children: list[list[int]] = [[] for _ in range(count)]
        levels = [0] * count
        for index, parent in enumerate(parents):
            if parent is None:
                continue
            if not 0 <= parent < index:
                raise TreeValidationError(f"node {index} has an invalid parent {parent}")
            children[parent].append(index)
            levels[index] = levels[parent] + 1
        nodes = [
            Node(
                index=index,
                level=levels[index],
                parent=parents[index],
                children=tuple(children[index]),
                probability=Fraction(1) if parents[index] is None else to_scalar(probabilities[index]),
                increment=None if increments is None else increments[index],
            )
            for index in range(count)
        ]
        return cls(nodes, time_grid)

    @classmethod
    def from_branching(cls, depth, probabilities, time_grid=None):
        """Homogeneous tree: every non-terminal node has ``len(probabilities)`` children."""
        probabilities = [to_scalar(p) for p in probabilities]
        parents: list[int | None] = [None]
        node_probabilities = [Fraction(1)]
        frontier = [0]
        for _ in range(depth):
            next_frontier = []
            for parent in frontier:
                for probability in probabilities:
                    parents.append(parent)
                    node_probabilities.append(probability)
                    next_frontier.append(len(parents) - 1)
            frontier = next_frontier
        return cls.from_edges(parents, node_probabilities, time_grid)

    @property
    def nodes(self) -> tuple[Node, ...]:
        return self._nodes

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def depth(self) -> int:
        return len(self._levels) - 1

    @property
    def levels(self) -> tuple[tuple[int, ...], ...]:
        return self._levels

    @property
    def time_grid(self) -> tuple[Scalar, ...]:
        return self._time_grid

    @property
    def time_horizon(self) -> Scalar:
        return self._time_grid[-1]

    @property
    def root(self) -> int:
        return 0

    @property
    def leaves(self) -> tuple[int, ...]:
        return self._levels[-1]

    def node(self, index) -> Node:
        return self._nodes[index]

    def level_nodes(self, level) -> tuple[int, ...]:
        self._check_level(level)
        return self._levels[level]

    def level_of(self, index) -> int:
        return self._nodes[index].level

    def parent(self, index) -> int | None:
        return self._nodes[index].parent

    def children(self, index) -> tuple[int, ...]:
        return self._nodes[index].children

    def child_probabilities(self, index) -> tuple[Fraction, ...]:
        return tuple(self._nodes[child].probability for child in self._nodes[index].children)

    def increment(self, index) -> float | None:
        return self._nodes[index].increment

    def child_increments(self, index) -> tuple[float | None, ...]:
        return tuple(self._nodes[child].increment for child in self._nodes[index].children)

    def time(self, level) -> Scalar:
        self._check_level(level)
        return self._time_grid[level]

    def step(self, level) -> Scalar:
        # Length of the grid interval (t_level, t_level+1]
        self._check_level(level + 1)
        return self._time_grid[level + 1] - self._time_grid[level]

    @cached_property
    def _node_probabilities(self) -> tuple[Fraction, ...]:
        probabilities = [Fraction(1)] * len(self._nodes)
        for node in self._nodes[1:]:
            probabilities[node.index] = probabilities[node.parent] * node.probability
        return tuple(probabilities)

    def node_probability(self, index) -> Fraction:
        """P(atom of F_level reached through ``index``)."""
        return self._node_probabilities[index]

    def path(self, index) -> tuple[int, ...]:
        # Root first
        path = []
        current: int | None = index
        while current is not None:
            path.append(current)
            current = self._nodes[current].parent
        return tuple(reversed(path))

    def ancestor(self, index, level) -> int:
        node_level = self._nodes[index].level
        if not 0 <= level <= node_level:
            raise LevelOutOfRangeError(f"level {level} is not an ancestor level of node {index}")
        current = index
        for _ in range(node_level - level):
            current = self._nodes[current].parent
        return current

    def subtree_leaves(self, index) -> tuple[int, ...]:
        frontier = [index]
        while frontier and self._nodes[frontier[0]].children:
            frontier = [child for node in frontier for child in self._nodes[node].children]
        return tuple(frontier)

    def siblings(self, index) -> tuple[int, ...]:
        parent = self._nodes[index].parent
        if parent is None:
            return (index,)
        return self._nodes[parent].children

    # Raises: LevelOutOfRangeError
    def _check_level(self, level):
        if not 0 <= level <= self.depth:
            logger.error(f"Level {level} outside [0, {self.depth}].")
            raise LevelOutOfRangeError(f"level {level} outside [0, {self.depth}]")


def random_tree(rng, depth, max_branching=3, max_nodes=2_000, max_weight=5):
    """Random tree with rational transition probabilities.

    Branching per node is drawn in ``1..max_branching``; once ``max_nodes`` would
    be exceeded the remaining nodes get a single child so the horizon is still
    reached.
    """
    parents: list[int | None] = [None]
    probabilities: list[Fraction] = [Fraction(1)]
    frontier = [0]
    for level in range(depth):
        remaining_levels = depth - level
        next_frontier = []
        for parent in frontier:
            # Keep room for single-child chains down to the horizon
            budget = max_nodes - len(parents) - len(frontier) * remaining_levels
            branching = int(rng.integers(1, max_branching + 1))
            if budget < branching * remaining_levels:
                branching = 1
            weights = [int(rng.integers(1, max_weight + 1)) for _ in range(branching)]
            total = sum(weights)
            for weight in weights:
                parents.append(parent)
                probabilities.append(Fraction(weight, total))
                next_frontier.append(len(parents) - 1)
        frontier = next_frontier
    return FiltrationTree.from_edges(parents, probabilities)
