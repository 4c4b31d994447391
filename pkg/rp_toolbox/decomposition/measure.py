# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Optional measures as non-decreasing adapted processes, and paired measures.

A measure on the optional sigma-field acts on a cash-flow process X through
E[sum_k X_k da_k], the jump at 0 (da_0 = a_0) included. Paired measures add a
predictable part integrated against the left limits X_{k-1}.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
import logging
# Create a logger for the decomposition component
logger = logging.getLogger(__name__)

from rp_toolbox.scalars import Scalar
from rp_toolbox.filtration import AdaptedProcess, RandomVariable, StoppingTime, predictable_projection
from rp_toolbox.decomposition.errors.decomposition_errors import MeasureValidationError


@dataclass(frozen=True)
class OptionalMeasure:
    a: AdaptedProcess

    # Raises: MeasureValidationError
    def __post_init__(self):
        if self.a.pre_time_zero != 0:
            logger.error(f"Optional measure with a_0- = {self.a.pre_time_zero}.")
            raise MeasureValidationError("a_0- must be 0")
        for node in range(len(self.a)):
            if self.a.increment(node) < 0:
                logger.error(f"Optional measure decreases at node {node}.")
                raise MeasureValidationError(f"negative increment at node {node}")

    @property
    def tree(self):
        return self.a.tree

    @cached_property
    def total_mass(self) -> Scalar:
        tree = self.tree
        return sum((tree.node_probability(leaf) * self.a[leaf] for leaf in tree.leaves), Fraction(0))

    @property
    def is_normalized(self) -> bool:
        return self.total_mass == 1

    @property
    def is_predictable(self) -> bool:
        return self.a.is_sibling_constant()

    def increment(self, node) -> Scalar:
        return self.a.increment(node)

    def node_weights(self) -> tuple[Scalar, ...]:
        # a(X) = sum_n weights[n] * X_n
        tree = self.tree
        return tuple(tree.node_probability(n) * self.a.increment(n) for n in range(tree.node_count))


@dataclass(frozen=True)
class PairedMeasure:
    """(a_pr, a_op) with a_pr predictable and a_pr_0 = 0.

    Components may be signed (the space A1); membership in the normalized
    non-negative cone is checked by ``is_nonnegative`` and ``is_normalized``.
    """

    a_pr: AdaptedProcess
    a_op: AdaptedProcess

    # Raises: MeasureValidationError
    def __post_init__(self):
        if self.a_pr.pre_time_zero != 0 or self.a_op.pre_time_zero != 0:
            raise MeasureValidationError("paired measure components must vanish at 0-")
        if self.a_pr[self.a_pr.tree.root] != 0:
            logger.error("Predictable part of a paired measure jumps at 0.")
            raise MeasureValidationError("a_pr_0 must be 0")
        if not self.a_pr.is_sibling_constant():
            logger.error("Predictable part of a paired measure is not predictable.")
            raise MeasureValidationError("a_pr is not predictable")

    @classmethod
    def from_optional(cls, measure: OptionalMeasure) -> "PairedMeasure":
        zero = AdaptedProcess(measure.tree, (Fraction(0),) * measure.tree.node_count)
        return cls(zero, measure.a)

    @property
    def tree(self):
        return self.a_op.tree

    def is_nonnegative(self) -> bool:
        return self.a_pr.is_non_decreasing() and self.a_op.is_non_decreasing()

    @cached_property
    def total_mass(self) -> Scalar:
        tree = self.tree
        return sum(
            (tree.node_probability(leaf) * (self.a_pr[leaf] + self.a_op[leaf]) for leaf in tree.leaves),
            Fraction(0),
        )

    @property
    def is_normalized(self) -> bool:
        return self.total_mass == 1

    def norm(self) -> Scalar:
        """E[Var(a_pr) + Var(a_op)]."""
        tree = self.tree
        return sum(
            (
                tree.node_probability(n) * (abs(self.a_pr.increment(n)) + abs(self.a_op.increment(n)))
                for n in range(tree.node_count)
            ),
            Fraction(0),
        )

    def node_weights(self) -> tuple[Scalar, ...]:
        tree = self.tree
        weights: list[Scalar] = [Fraction(0)] * tree.node_count
        for node in range(tree.node_count):
            probability = tree.node_probability(node)
            weights[node] += probability * self.a_op.increment(node)
            parent = tree.parent(node)
            if parent is not None:
                # Predictable part pays the left limit X_{k-1}
                weights[parent] += probability * self.a_pr.increment(node)
        return tuple(weights)


def linear_form(measure: OptionalMeasure, x: AdaptedProcess) -> Scalar:
    """E[sum_k X_k da_k], jump at 0 included."""
    tree = measure.tree
    return sum(
        (tree.node_probability(n) * x[n] * measure.increment(n) for n in range(tree.node_count)),
        Fraction(0),
    )


def paired_linear_form(measure: PairedMeasure, x: AdaptedProcess) -> Scalar:
    """E[sum_{k>=1} X_{k-1} da_pr_k + sum_{k>=0} X_k da_op_k]."""
    tree = measure.tree
    total: Scalar = Fraction(0)
    for node in range(tree.node_count):
        probability = tree.node_probability(node)
        total += probability * x[node] * measure.a_op.increment(node)
        parent = tree.parent(node)
        if parent is not None:
            total += probability * x[parent] * measure.a_pr.increment(node)
    return total


def paired_linear_form_projected(measure: PairedMeasure, x: AdaptedProcess) -> Scalar:
    """Same value as ``paired_linear_form``, written with the predictable projection of dX.

    E[sum_k X_k d(a_pr + a_op)_k - sum_{k>=1} p(dX)_k da_pr_k]
    """
    tree = measure.tree
    projected_jumps = predictable_projection(x.increments())
    total: Scalar = Fraction(0)
    for node in range(tree.node_count):
        probability = tree.node_probability(node)
        da_pr = measure.a_pr.increment(node)
        total += probability * x[node] * (da_pr + measure.a_op.increment(node))
        if tree.parent(node) is not None:
            total -= probability * projected_jumps[node] * da_pr
    return total


def terminal_measure(tree, density: RandomVariable) -> OptionalMeasure:
    """All mass at T: a = density * 1_{[T]}."""
    depth = tree.depth
    return OptionalMeasure(
        AdaptedProcess(
            tree,
            tuple(density[n] if tree.level_of(n) == depth else Fraction(0) for n in range(tree.node_count)),
        )
    )


def stopping_time_measure(tau: StoppingTime, weight=Fraction(1)) -> OptionalMeasure:
    """weight * 1_{[tau, T]}: unit mass on the graph of tau."""
    tree = tau.tree
    values: list[Scalar] = [Fraction(0)] * tree.node_count
    for level in tree.levels:
        for node in level:
            parent = tree.parent(node)
            if (parent is not None and values[parent] != 0) or node in tau.stops:
                values[node] = weight
    return OptionalMeasure(AdaptedProcess(tree, tuple(values)))


def node_mass_measure(tree, node) -> OptionalMeasure:
    """Normalized measure concentrated on the atom (node, t_level(node))."""
    mass = 1 / tree.node_probability(node)
    level = tree.level_of(node)
    values = []
    for index in range(tree.node_count):
        if tree.level_of(index) >= level and tree.ancestor(index, level) == node:
            values.append(mass)
        else:
            values.append(Fraction(0))
    return OptionalMeasure(AdaptedProcess(tree, tuple(values)))


def random_optional_measure(tree, rng, predictable=False, max_weight=4, zero_probability=0.4) -> OptionalMeasure:
    """Random normalized optional measure with rational increments.

    Increments are 0 with probability ``zero_probability`` and otherwise a
    random integer weight; with ``predictable`` siblings share their increment
    and the root carries no jump.
    """
    raw: list[Fraction] = [Fraction(0)] * tree.node_count

    def draw() -> Fraction:
        if rng.random() < zero_probability:
            return Fraction(0)
        return Fraction(int(rng.integers(1, max_weight + 1)))

    if not predictable:
        raw[tree.root] = draw()
    for level in tree.levels[:-1]:
        for parent in level:
            shared = draw()
            for child in tree.children(parent):
                raw[child] = raw[parent] + (shared if predictable else draw())
    mass = sum((tree.node_probability(leaf) * raw[leaf] for leaf in tree.leaves), Fraction(0))
    if mass == 0:
        # Put everything at the horizon
        raw = [Fraction(1) if tree.level_of(n) == tree.depth else Fraction(0) for n in range(tree.node_count)]
        mass = Fraction(1)
    return OptionalMeasure(AdaptedProcess(tree, tuple(value / mass for value in raw)))
