# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Multiplicative decomposition U = L * D of the potential of an optional measure.

Optional form (all mass paid against L):
    D_k = D_{k-1} * U_k / (U_k + da_k)      on {U_k + da_k > 0}
    L_k = L_{k-1} * (1 + dM_k / U_{k-1})    on {U_{k-1} > 0}
    a_k = -sum_{j<=k} L_j dD_j

Predictable form (a predictable, D predictable):
    pU_k = U_{k-1} - da_k
    D_k = D_{k-1} * pU_k / U_{k-1}          on {U_{k-1} > 0}
    L_k = L_{k-1} * U_k / pU_k              on {pU_k > 0}
    a_k = -sum_{j<=k} L_{j-1} dD_j

Outside the indicated sets L is frozen and D drops to 0 (degenerate step),
with U_{0-} = L_{0-} = total mass and D_{0-} = 1.
"""

from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction
import logging
# Create a logger for the decomposition component
logger = logging.getLogger(__name__)

from rp_toolbox.scalars import Scalar
from rp_toolbox.filtration import (
    AdaptedProcess,
    StoppingTime,
    conditional_expectation_process,
    first_hitting_time,
)
from rp_toolbox.decomposition.measure import OptionalMeasure
from rp_toolbox.decomposition.errors.decomposition_errors import (
    MeasureNormalizationError,
    NotPredictableError,
)


class DecompositionMode(StrEnum):
    OPTIONAL = "optional"
    PREDICTABLE = "predictable"


@dataclass(frozen=True)
class Potential:
    M: AdaptedProcess
    U: AdaptedProcess
    tau: StoppingTime


@dataclass(frozen=True)
class Decomposition:
    L: AdaptedProcess
    D: AdaptedProcess
    tau: StoppingTime
    M: AdaptedProcess
    U: AdaptedProcess
    mode: DecompositionMode = DecompositionMode.OPTIONAL

    @property
    def tree(self):
        return self.L.tree

    @property
    def mass(self) -> Scalar:
        return self.L.pre_time_zero


def potential(measure: OptionalMeasure) -> Potential:
    """Closing martingale M = E[a_T | F], potential U = M - a and exhaustion time tau."""
    a = measure.a
    M = conditional_expectation_process(a)
    U = M - a
    U = AdaptedProcess(U.tree, U.values, measure.total_mass)
    tau = first_hitting_time(a.tree, lambda node: U[node] == 0)
    return Potential(AdaptedProcess(M.tree, M.values, M[M.tree.root]), U, tau)


# Raises: MeasureNormalizationError
def _checked_mass(measure: OptionalMeasure, mass_override) -> Scalar:
    mass = measure.total_mass
    if mass != 1 and not mass_override:
        logger.error(f"Optional measure has total mass {mass}; pass mass_override to decompose it.")
        raise MeasureNormalizationError(f"total mass {mass} is not 1")
    return mass


# Raises: MeasureNormalizationError
def decompose_optional(measure: OptionalMeasure, mass_override=False) -> Decomposition:
    """Optional (L, D) decomposition; L_0 equals the total mass of ``measure``."""
    mass = _checked_mass(measure, mass_override)
    tree = measure.tree
    pot = potential(measure)
    M, U = pot.M, pot.U
    L: list[Scalar] = [Fraction(0)] * tree.node_count
    D: list[Scalar] = [Fraction(0)] * tree.node_count
    for level in tree.levels:
        for node in level:
            parent = tree.parent(node)
            if parent is None:
                L[node] = mass
                previous_d: Scalar = Fraction(1)
            else:
                previous_d = D[parent]
                if U[parent] > 0:
                    L[node] = L[parent] * (1 + (M[node] - M[parent]) / U[parent])
                else:
                    L[node] = L[parent]
            denominator = U[node] + measure.increment(node)
            # Degenerate step: D drops to 0 and stays there
            D[node] = previous_d * U[node] / denominator if denominator > 0 else Fraction(0)
    logger.debug(f"Optional decomposition computed on {tree.node_count} nodes.")
    return Decomposition(
        AdaptedProcess(tree, tuple(L), mass),
        AdaptedProcess(tree, tuple(D), Fraction(1)),
        pot.tau,
        M,
        U,
        DecompositionMode.OPTIONAL,
    )


# Raises: NotPredictableError, MeasureNormalizationError
def decompose_predictable(measure: OptionalMeasure, mass_override=False) -> Decomposition:
    """Predictable (L, D) decomposition of a predictable optional measure.

    D is predictable with D_0 = 1 - a_0 / mass, which is 1 whenever a has no
    jump at 0.
    """
    if not measure.is_predictable:
        logger.error("Predictable decomposition requested for a non-predictable measure.")
        raise NotPredictableError("measure increments differ between siblings")
    mass = _checked_mass(measure, mass_override)
    tree = measure.tree
    pot = potential(measure)
    U = pot.U
    L: list[Scalar] = [Fraction(0)] * tree.node_count
    D: list[Scalar] = [Fraction(0)] * tree.node_count
    for level in tree.levels:
        for node in level:
            parent = tree.parent(node)
            if parent is None:
                previous_u, previous_l, previous_d = mass, mass, Fraction(1)
            else:
                previous_u, previous_l, previous_d = U[parent], L[parent], D[parent]
            projected_u = previous_u - measure.increment(node)
            D[node] = previous_d * projected_u / previous_u if previous_u > 0 else Fraction(0)
            L[node] = previous_l * U[node] / projected_u if projected_u > 0 else previous_l
    logger.debug(f"Predictable decomposition computed on {tree.node_count} nodes.")
    return Decomposition(
        AdaptedProcess(tree, tuple(L), mass),
        AdaptedProcess(tree, tuple(D), Fraction(1), predictable=True),
        pot.tau,
        pot.M,
        U,
        DecompositionMode.PREDICTABLE,
    )


def recompose(decomposition: Decomposition, mode: DecompositionMode | None = None) -> OptionalMeasure:
    """a_k = -sum_{j<=k} L_j dD_j (optional) or -sum_{j<=k} L_{j-1} dD_j (predictable)."""
    mode = decomposition.mode if mode is None else DecompositionMode(mode)
    L, D = decomposition.L, decomposition.D
    tree = L.tree
    a: list[Scalar] = [Fraction(0)] * tree.node_count
    for level in tree.levels:
        for node in level:
            parent = tree.parent(node)
            previous_a = Fraction(0) if parent is None else a[parent]
            weight = L[node] if mode == DecompositionMode.OPTIONAL else L.previous(node)
            a[node] = previous_a - weight * D.increment(node)
    return OptionalMeasure(AdaptedProcess(tree, tuple(a)))


def bracket_process(measure: OptionalMeasure) -> AdaptedProcess:
    """Pathwise [M, a]_k = sum_{j<=k} dM_j da_j (M has no jump at 0)."""
    tree = measure.tree
    M = conditional_expectation_process(measure.a)
    values: list[Scalar] = [Fraction(0)] * tree.node_count
    for level in tree.levels[1:]:
        for node in level:
            parent = tree.parent(node)
            values[node] = values[parent] + (M[node] - M[parent]) * measure.increment(node)
    return AdaptedProcess(tree, tuple(values))


def has_vanishing_bracket(measure: OptionalMeasure) -> bool:
    """True when [M, a] vanishes identically, the case where both decompositions agree."""
    return all(value == 0 for value in bracket_process(measure).values)


def coincide_before_tau(first: Decomposition, second: Decomposition) -> bool:
    """Same L everywhere and same D strictly before tau.

    At the node where tau stops U is 0, and a degenerate step may drop D to 0
    in one mode only.
    """
    if first.L.values != second.L.values:
        return False
    tau = first.tau
    return all(
        first.D[node] == second.D[node]
        for node in range(first.tree.node_count)
        if tau.is_alive(node) and not tau.stops_at(node)
    )
