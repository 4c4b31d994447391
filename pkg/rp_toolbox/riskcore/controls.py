# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Dual controls: the objects a penalty function is defined on.

Three representations are supported:

* ``Z1``  optional measures a with E[a_T] = 1 (``OptionalControl``), or the
  same measure given through its factors (L, D) (``DeflatorControl``);
* ``Z1d`` non-negative normalized paired measures (``PairedControl``);
* ``S1``  quadruples (L, D, L', D') with D predictable (``SplitControl``).

Every control exposes its paired measure, so a single evaluator
(``paired_linear_form``) prices X for all of them.
"""

import math
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction
from functools import cached_property
from typing import Sequence
import logging
# Create a logger for the riskcore component
logger = logging.getLogger(__name__)

from rp_toolbox.scalars import Scalar
from rp_toolbox.filtration import (
    AdaptedProcess,
    RandomVariable,
    enumerate_stopping_times,
    is_martingale,
)
from rp_toolbox.decomposition import (
    DecompositionMode,
    OptionalMeasure,
    PairedMeasure,
    decompose_optional,
    decompose_predictable,
    node_mass_measure,
    paired_linear_form,
    stopping_time_measure,
    terminal_measure,
)
from rp_toolbox.decomposition.decompose import Decomposition
from rp_toolbox.riskcore.errors.riskcore_errors import ControlValidationError


class RepresentationForm(StrEnum):
    Z1 = "Z1"
    Z1D = "Z1d"
    S1 = "S1"


@dataclass(frozen=True)
class DeflatorPair:
    """A factor pair (L, D); ``predictable`` pairs pay L_{k-1} dD_k."""

    L: AdaptedProcess
    D: AdaptedProcess
    predictable: bool = False


class DualControl:
    form: RepresentationForm = RepresentationForm.Z1
    label: str = ""

    @property
    def paired(self) -> PairedMeasure:
        raise NotImplementedError

    @property
    def tree(self):
        return self.paired.tree

    def value(self, x: AdaptedProcess) -> Scalar:
        """a(X)."""
        return paired_linear_form(self.paired, x)

    def node_weights(self) -> tuple[Scalar, ...]:
        return self.paired.node_weights()

    def deflator_pairs(self) -> list[DeflatorPair]:
        raise NotImplementedError


def _pair(decomposition: Decomposition) -> DeflatorPair:
    return DeflatorPair(
        decomposition.L,
        decomposition.D,
        decomposition.mode == DecompositionMode.PREDICTABLE,
    )


class OptionalControl(DualControl):
    # Raises: ControlValidationError
    def __init__(self, measure: OptionalMeasure, label=""):
        if not measure.is_normalized:
            logger.error(f"Optional control has total mass {measure.total_mass}.")
            raise ControlValidationError("optional control must have total mass 1")
        self.measure = measure
        self.label = label
        self.form = RepresentationForm.Z1

    @cached_property
    def paired(self) -> PairedMeasure:
        return PairedMeasure.from_optional(self.measure)

    def deflator_pairs(self) -> list[DeflatorPair]:
        return [_pair(decompose_optional(self.measure))]


class DeflatorControl(DualControl):
    """An element of Z1 given as a = -sum L dD."""

    # Raises: ControlValidationError
    def __init__(self, L: AdaptedProcess, D: AdaptedProcess, label="", exact_tolerance=1e-12):
        tree = L.tree
        if any(value < 0 for value in L.values) or not is_martingale(L, exact_tolerance):
            raise ControlValidationError("L must be a non-negative martingale")
        if D.pre_time_zero != 1 or not D.is_non_increasing():
            raise ControlValidationError("D must be non-increasing with D_0- = 1")
        if any(L[leaf] * D[leaf] != 0 for leaf in tree.leaves):
            raise ControlValidationError("D_T must vanish where L_T is positive")
        if not math.isclose(float(L[tree.root]), 1.0, abs_tol=exact_tolerance):
            raise ControlValidationError("L_0 must be 1")
        self.L = L
        self.D = D
        self.label = label
        self.form = RepresentationForm.Z1

    @cached_property
    def paired(self) -> PairedMeasure:
        tree = self.L.tree
        a: list[Scalar] = [Fraction(0)] * tree.node_count
        for level in tree.levels:
            for node in level:
                parent = tree.parent(node)
                previous = Fraction(0) if parent is None else a[parent]
                a[node] = previous - self.L[node] * self.D.increment(node)
        zero = AdaptedProcess(tree, (Fraction(0),) * tree.node_count)
        return PairedMeasure(zero, AdaptedProcess(tree, tuple(a)))

    def deflator_pairs(self) -> list[DeflatorPair]:
        return [DeflatorPair(self.L, self.D)]


class PairedControl(DualControl):
    # Raises: ControlValidationError
    def __init__(self, measure: PairedMeasure, label=""):
        if not measure.is_nonnegative() or not measure.is_normalized:
            logger.error("Paired control is not a non-negative normalized paired measure.")
            raise ControlValidationError("paired control must be non-negative with total mass 1")
        self.measure = measure
        self.label = label
        self.form = RepresentationForm.Z1D

    @property
    def paired(self) -> PairedMeasure:
        return self.measure

    def deflator_pairs(self) -> list[DeflatorPair]:
        pairs = []
        predictable_part = OptionalMeasure(self.measure.a_pr)
        optional_part = OptionalMeasure(self.measure.a_op)
        if predictable_part.total_mass > 0:
            pairs.append(_pair(decompose_predictable(predictable_part, mass_override=True)))
        if optional_part.total_mass > 0:
            pairs.append(_pair(decompose_optional(optional_part, mass_override=True)))
        return pairs


class SplitControl(DualControl):
    """(L, D, L', D') with L_0 + L'_0 = 1, D predictable with D_0 = 1."""

    # Raises: ControlValidationError
    def __init__(self, L, D, L_optional, D_optional, label=""):
        tree = L.tree
        for name, martingale in (("L", L), ("L'", L_optional)):
            if any(value < 0 for value in martingale.values) or not is_martingale(martingale):
                raise ControlValidationError(f"{name} must be a non-negative martingale")
        if L[tree.root] + L_optional[tree.root] != 1:
            logger.error("Split control with L_0 + L'_0 different from 1.")
            raise ControlValidationError("L_0 + L'_0 must be 1")
        if not D.is_sibling_constant() or D[tree.root] != 1:
            raise ControlValidationError("D must be predictable with D_0 = 1")
        for name, survival, martingale in (("D", D, L), ("D'", D_optional, L_optional)):
            if survival.pre_time_zero != 1 or not survival.is_non_increasing():
                raise ControlValidationError(f"{name} must be non-increasing with value 1 at 0-")
            if any(martingale[leaf] * survival[leaf] != 0 for leaf in tree.leaves):
                raise ControlValidationError(f"{name}_T must vanish where its density is positive")
        self.L = AdaptedProcess(tree, L.values, L[tree.root])
        self.D = D
        self.L_optional = L_optional
        self.D_optional = D_optional
        self.label = label
        self.form = RepresentationForm.S1

    @cached_property
    def paired(self) -> PairedMeasure:
        tree = self.L.tree
        a_pr: list[Scalar] = [Fraction(0)] * tree.node_count
        a_op: list[Scalar] = [Fraction(0)] * tree.node_count
        for level in tree.levels:
            for node in level:
                parent = tree.parent(node)
                if parent is None:
                    a_op[node] = -self.L_optional[node] * self.D_optional.increment(node)
                    continue
                a_pr[node] = a_pr[parent] - self.L[parent] * self.D.increment(node)
                a_op[node] = a_op[parent] - self.L_optional[node] * self.D_optional.increment(node)
        return PairedMeasure(AdaptedProcess(tree, tuple(a_pr)), AdaptedProcess(tree, tuple(a_op)))

    def deflator_pairs(self) -> list[DeflatorPair]:
        return [DeflatorPair(self.L, self.D, True), DeflatorPair(self.L_optional, self.D_optional)]


def extreme_point_controls(tree) -> list[OptionalControl]:
    """Normalized point masses on every atom (node, t)."""
    return [OptionalControl(node_mass_measure(tree, node), f"node:{node}") for node in range(tree.node_count)]


def stopping_time_controls(tree, from_level=0, limit=None) -> list[OptionalControl]:
    return [
        OptionalControl(stopping_time_measure(tau), f"tau:{','.join(map(str, tau.canonical()))}")
        for tau in enumerate_stopping_times(tree, from_level, limit)
    ]


def terminal_controls(tree, densities: Sequence[RandomVariable]) -> list[OptionalControl]:
    """Controls with D = 1_{[0,T)}: all mass at the horizon."""
    return [
        OptionalControl(terminal_measure(tree, density), f"terminal:{index}")
        for index, density in enumerate(densities)
    ]


def discounted_control(tree, beta) -> DeflatorControl:
    """L = 1 and D_k = exp(-beta * t_{k+1}) before T, D_T = 0.

    Prices X as E[e^{-beta T}(-X_T) - sum_k X_k (e^{-beta t_k} - e^{-beta t_{k+1}})],
    the grid version of a constant discount rate beta.
    """
    depth = tree.depth
    one = AdaptedProcess(tree, (Fraction(1),) * tree.node_count)
    if beta == 0:
        survival = tuple(Fraction(1) if tree.level_of(n) < depth else Fraction(0) for n in range(tree.node_count))
    else:
        survival = tuple(
            math.exp(-beta * float(tree.time(tree.level_of(n) + 1))) if tree.level_of(n) < depth else 0.0
            for n in range(tree.node_count)
        )
    return DeflatorControl(one, AdaptedProcess(tree, survival, Fraction(1)), f"discounted:{beta}")


def random_mixture_controls(controls: Sequence[OptionalControl], rng, count, max_weight=5) -> list[OptionalControl]:
    """Random convex combinations of optional controls, rational weights."""
    mixtures = []
    for index in range(count):
        weights = [Fraction(int(rng.integers(0, max_weight + 1))) for _ in controls]
        total = sum(weights, Fraction(0))
        if total == 0:
            weights[0], total = Fraction(1), Fraction(1)
        tree = controls[0].measure.tree
        values = tuple(
            sum((weight * control.measure.a[n] for weight, control in zip(weights, controls)), Fraction(0)) / total
            for n in range(tree.node_count)
        )
        mixtures.append(OptionalControl(OptionalMeasure(AdaptedProcess(tree, values)), f"mixture:{index}"))
    return mixtures
