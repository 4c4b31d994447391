# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping
import logging
# Create a logger for the filtration component
logger = logging.getLogger(__name__)

from rp_toolbox.scalars import Scalar, is_exact, to_scalar
from rp_toolbox.filtration.errors.filtration_errors import (
    LevelOutOfRangeError,
    PredictabilityError,
    ProcessTotalityError,
)


def _normalize(value):
    return value if isinstance(value, float) else to_scalar(value)


@dataclass(frozen=True)
class AdaptedProcess:
    """One value per node of a tree (or lattice).

    ``pre_time_zero`` holds the value at 0- (X_{0-}, a_{0-}, D_{0-}). When
    ``predictable`` is set, siblings carry equal values, i.e. the value at a
    level-k node is known at its parent.
    """

    tree: object
    values: tuple[Scalar, ...]
    pre_time_zero: Scalar = Fraction(0)
    predictable: bool = False

    # Raises: ProcessTotalityError, PredictabilityError
    def __post_init__(self):
        object.__setattr__(self, "values", tuple(_normalize(v) for v in self.values))
        object.__setattr__(self, "pre_time_zero", _normalize(self.pre_time_zero))
        if len(self.values) != self.tree.node_count:
            logger.error(
                f"Process has {len(self.values)} values for {self.tree.node_count} nodes."
            )
            raise ProcessTotalityError("process is not total on the tree")
        if self.predictable and not self.is_sibling_constant():
            logger.error("Process flagged predictable differs between siblings.")
            raise PredictabilityError("process flagged predictable is not predictable")

    def __getitem__(self, index) -> Scalar:
        return self.values[index]

    def __len__(self):
        return len(self.values)

    @property
    def is_exact(self) -> bool:
        return is_exact(self.pre_time_zero) and all(is_exact(v) for v in self.values)

    def previous(self, index) -> Scalar:
        # Value at the previous grid point (left limit), X_{0-} at the root
        parent = self.tree.parent(index)
        return self.pre_time_zero if parent is None else self.values[parent]

    def increment(self, index) -> Scalar:
        return self.values[index] - self.previous(index)

    def increments(self) -> "AdaptedProcess":
        return AdaptedProcess(
            self.tree,
            tuple(self.increment(n) for n in range(len(self.values))),
            Fraction(0),
        )

    def slice(self, level) -> "LevelSlice":
        return LevelSlice(self.tree, level, {n: self.values[n] for n in self.tree.level_nodes(level)})

    def terminal(self) -> "RandomVariable":
        return RandomVariable(self.tree, {leaf: self.values[leaf] for leaf in self.tree.leaves})

    def is_sibling_constant(self) -> bool:
        for level in self.tree.levels[1:]:
            for node in level:
                parent = self.tree.parent(node)
                first = self.tree.children(parent)[0]
                if self.values[node] != self.values[first]:
                    return False
        return True

    def as_predictable(self) -> "AdaptedProcess":
        return AdaptedProcess(self.tree, self.values, self.pre_time_zero, True)

    def is_non_decreasing(self) -> bool:
        return all(self.increment(n) >= 0 for n in range(len(self.values)))

    def is_non_increasing(self) -> bool:
        return all(self.increment(n) <= 0 for n in range(len(self.values)))

    def map(self, function: Callable[[Scalar], Scalar]) -> "AdaptedProcess":
        return AdaptedProcess(self.tree, tuple(function(v) for v in self.values), function(self.pre_time_zero))

    def as_float(self) -> "AdaptedProcess":
        return self.map(float)

    def __add__(self, other) -> "AdaptedProcess":
        if isinstance(other, AdaptedProcess):
            return AdaptedProcess(
                self.tree,
                tuple(x + y for x, y in zip(self.values, other.values)),
                self.pre_time_zero + other.pre_time_zero,
                self.predictable and other.predictable,
            )
        return NotImplemented

    def __sub__(self, other) -> "AdaptedProcess":
        if isinstance(other, AdaptedProcess):
            return self + (-other)
        return NotImplemented

    def __neg__(self) -> "AdaptedProcess":
        return AdaptedProcess(self.tree, tuple(-v for v in self.values), -self.pre_time_zero, self.predictable)

    def __mul__(self, scalar) -> "AdaptedProcess":
        if isinstance(scalar, AdaptedProcess):
            return NotImplemented
        return AdaptedProcess(
            self.tree, tuple(scalar * v for v in self.values), scalar * self.pre_time_zero, self.predictable
        )

    __rmul__ = __mul__

    def times(self, other: "AdaptedProcess") -> "AdaptedProcess":
        """Pointwise product."""
        return AdaptedProcess(
            self.tree,
            tuple(x * y for x, y in zip(self.values, other.values)),
            self.pre_time_zero * other.pre_time_zero,
        )

    def dominates(self, other: "AdaptedProcess") -> bool:
        return all(x >= y for x, y in zip(self.values, other.values))


@dataclass(frozen=True)
class LevelSlice:
    """Values of an F_level-measurable random variable, one per level node."""

    tree: object
    level: int
    values: Mapping[int, Scalar] = field(default_factory=dict)

    # Raises: ProcessTotalityError, LevelOutOfRangeError
    def __post_init__(self):
        if not 0 <= self.level <= self.tree.depth:
            raise LevelOutOfRangeError(f"level {self.level} outside [0, {self.tree.depth}]")
        expected = set(self.tree.level_nodes(self.level))
        if set(self.values) != expected:
            logger.error(f"Slice at level {self.level} is not total on the level nodes.")
            raise ProcessTotalityError(f"slice is not total on level {self.level}")

    def __getitem__(self, node) -> Scalar:
        return self.values[node]


class RandomVariable(LevelSlice):
    """F_T-measurable random variable (one value per leaf)."""

    def __init__(self, tree, values: Mapping[int, Scalar]):
        super().__init__(tree, tree.depth, dict(values))


def constant(tree, value) -> AdaptedProcess:
    return AdaptedProcess(tree, (value,) * tree.node_count, Fraction(0))


def single_payment(tree, amount, level) -> AdaptedProcess:
    """The cash flow m * 1_{[t_level, T]}."""
    if not 0 <= level <= tree.depth:
        raise LevelOutOfRangeError(f"level {level} outside [0, {tree.depth}]")
    zero = Fraction(0) if not isinstance(amount, float) else 0.0
    return AdaptedProcess(
        tree,
        tuple(amount if tree.level_of(n) >= level else zero for n in range(tree.node_count)),
        Fraction(0),
    )


def from_function(tree, function: Callable[[int], Scalar], pre_time_zero=Fraction(0)) -> AdaptedProcess:
    return AdaptedProcess(tree, tuple(function(n) for n in range(tree.node_count)), pre_time_zero)


def from_level_values(tree, level_values) -> AdaptedProcess:
    """Deterministic process taking ``level_values[k]`` at every level-k node."""
    if len(level_values) != tree.depth + 1:
        raise ProcessTotalityError(f"expected {tree.depth + 1} level values, got {len(level_values)}")
    return AdaptedProcess(tree, tuple(level_values[tree.level_of(n)] for n in range(tree.node_count)))


def terminal_payoff(tree, payoff: Callable[[int], Scalar]) -> AdaptedProcess:
    """X_T * 1_{[T]}: zero before the horizon, ``payoff(leaf)`` on the leaves."""
    depth = tree.depth
    return AdaptedProcess(
        tree,
        tuple(payoff(n) if tree.level_of(n) == depth else Fraction(0) for n in range(tree.node_count)),
    )


def random_process(tree, rng, low=-10, high=10, denominator=4) -> AdaptedProcess:
    """Rational process with values k / denominator, k uniform in [low*den, high*den]."""
    numerators = rng.integers(low * denominator, high * denominator + 1, size=tree.node_count)
    return AdaptedProcess(tree, tuple(Fraction(int(k), denominator) for k in numerators))


def conditional_payment(tree, amounts: Mapping[int, Scalar], level) -> AdaptedProcess:
    """m * 1_{[t_level, T]} for an F_level-measurable amount m given per level node."""
    if not 0 <= level <= tree.depth:
        raise LevelOutOfRangeError(f"level {level} outside [0, {tree.depth}]")
    return AdaptedProcess(
        tree,
        tuple(
            amounts[tree.ancestor(n, level)] if tree.level_of(n) >= level else Fraction(0)
            for n in range(tree.node_count)
        ),
    )
