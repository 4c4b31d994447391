# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Binomial discretizations of a one-dimensional Brownian filtration.

``build_brownian_tree`` returns a full binary FiltrationTree (2^(N+1) - 1
nodes) carrying the increments +-sqrt(dt) on its edges; path-dependent cash
flows need it. ``BrownianLattice`` stores the recombining version (one node per
(level, number of up moves)) and exposes the part of the tree interface the
backward solvers use, so Markov cash flows can be solved for large N.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
import logging
# Create a logger for the bsde component
logger = logging.getLogger(__name__)

from rp_toolbox.scalars import Scalar, to_scalar
from rp_toolbox.filtration import FiltrationTree
from rp_toolbox.filtration.errors.filtration_errors import LevelOutOfRangeError
from rp_toolbox.bsde.errors.bsde_errors import UnsupportedDimensionError

HALF = Fraction(1, 2)


def _time_grid(steps, horizon) -> list[Scalar]:
    horizon = horizon if isinstance(horizon, float) else to_scalar(horizon)
    return [horizon * k / steps for k in range(steps + 1)]


# Raises: UnsupportedDimensionError, ValueError
def _check_arguments(steps, dims):
    if dims != 1:
        logger.error(f"Brownian discretization requested in dimension {dims}.")
        raise UnsupportedDimensionError("only one-dimensional Brownian motion is supported")
    if steps < 1:
        raise ValueError(f"at least one time step is needed, got {steps}")


def build_brownian_tree(steps, horizon=1, dims=1) -> FiltrationTree:
    """Binary tree, probabilities 1/2, first child +sqrt(dt), second -sqrt(dt)."""
    _check_arguments(steps, dims)
    grid = _time_grid(steps, horizon)
    root_step = math.sqrt(float(grid[1]))
    parents: list[int | None] = [None]
    probabilities: list[Fraction] = [Fraction(1)]
    increments: list[float | None] = [None]
    frontier = [0]
    for _ in range(steps):
        next_frontier = []
        for parent in frontier:
            for sign in (1.0, -1.0):
                parents.append(parent)
                probabilities.append(HALF)
                increments.append(sign * root_step)
                next_frontier.append(len(parents) - 1)
        frontier = next_frontier
    logger.debug(f"Brownian tree with {steps} steps and {len(parents)} nodes built.")
    return FiltrationTree.from_edges(parents, probabilities, grid, increments)


class BrownianLattice:
    """Recombining binomial lattice; node (k, j) has j up moves out of k."""

    def __init__(self, steps, horizon=1, dims=1):
        _check_arguments(steps, dims)
        self._steps = steps
        self._time_grid = tuple(_time_grid(steps, horizon))
        self._root_step = math.sqrt(float(self._time_grid[1]))
        self._levels = tuple(
            tuple(range(k * (k + 1) // 2, k * (k + 1) // 2 + k + 1)) for k in range(steps + 1)
        )

    @property
    def depth(self) -> int:
        return self._steps

    @property
    def node_count(self) -> int:
        return (self._steps + 1) * (self._steps + 2) // 2

    @property
    def levels(self) -> tuple[tuple[int, ...], ...]:
        return self._levels

    @property
    def root(self) -> int:
        return 0

    @property
    def leaves(self) -> tuple[int, ...]:
        return self._levels[-1]

    @property
    def time_grid(self) -> tuple[Scalar, ...]:
        return self._time_grid

    @property
    def time_horizon(self) -> Scalar:
        return self._time_grid[-1]

    @cached_property
    def _level_of(self) -> tuple[int, ...]:
        return tuple(k for k, level in enumerate(self._levels) for _ in level)

    def level_nodes(self, level) -> tuple[int, ...]:
        if not 0 <= level <= self._steps:
            raise LevelOutOfRangeError(f"level {level} outside [0, {self._steps}]")
        return self._levels[level]

    def level_of(self, index) -> int:
        return self._level_of[index]

    def ups(self, index) -> int:
        level = self._level_of[index]
        return index - level * (level + 1) // 2

    def children(self, index) -> tuple[int, ...]:
        level = self._level_of[index]
        if level == self._steps:
            return ()
        down = (level + 1) * (level + 2) // 2 + self.ups(index)
        return (down + 1, down)

    def child_probabilities(self, index) -> tuple[Fraction, ...]:
        return (HALF, HALF) if self.children(index) else ()

    def child_increments(self, index) -> tuple[float, ...]:
        return (self._root_step, -self._root_step) if self.children(index) else ()

    def node_probability(self, index) -> Fraction:
        level = self._level_of[index]
        return Fraction(math.comb(level, self.ups(index)), 2**level)

    def brownian_value(self, index) -> float:
        level = self._level_of[index]
        return (2 * self.ups(index) - level) * self._root_step

    def time(self, level) -> Scalar:
        return self._time_grid[level]

    def step(self, level) -> Scalar:
        return self._time_grid[level + 1] - self._time_grid[level]


def brownian_values(space) -> tuple[float, ...]:
    """W at every node of a Brownian tree or lattice."""
    if isinstance(space, BrownianLattice):
        return tuple(space.brownian_value(n) for n in range(space.node_count))
    values = [0.0] * space.node_count
    for level in space.levels[1:]:
        for node in level:
            values[node] = values[space.parent(node)] + space.increment(node)
    return tuple(values)


@dataclass(frozen=True)
class StoppingRegion:
    """Stop at the first node of ``stops`` met along the path (leaves always stop).

    The lattice counterpart of a StoppingTime; the backward evaluators only
    ask ``stops_at``.
    """

    space: object
    stops: frozenset[int]

    def stops_at(self, node) -> bool:
        return node in self.stops or not self.space.children(node)
