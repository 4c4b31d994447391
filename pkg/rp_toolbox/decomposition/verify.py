# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

import math
from dataclasses import dataclass, field
from fractions import Fraction
import logging
# Create a logger for the decomposition component
logger = logging.getLogger(__name__)

from rp_toolbox.scalars import Scalar
from rp_toolbox.filtration import AdaptedProcess, expectation_below, optimal_stopping_value
from rp_toolbox.decomposition.measure import OptionalMeasure
from rp_toolbox.decomposition.decompose import (
    Decomposition,
    DecompositionMode,
    potential,
    recompose,
)


@dataclass
class DecompositionReport:
    martingale: bool = True
    monotone_and_support: bool = True
    class_d: bool = True
    recomposition: bool = True
    support_freezing: bool = True
    multiplicative: bool = True
    uniqueness_before_tau: bool = True
    uniqueness_everywhere: bool = True
    # First offending node per failed check
    witnesses: dict[str, int] = field(default_factory=dict)

    def fail(self, check, node):
        setattr(self, check, False)
        self.witnesses.setdefault(check, node)

    def checks(self) -> dict[str, bool]:
        return {
            "martingale": self.martingale,
            "monotone_and_support": self.monotone_and_support,
            "class_d": self.class_d,
            "recomposition": self.recomposition,
            "support_freezing": self.support_freezing,
            "multiplicative": self.multiplicative,
            "uniqueness_before_tau": self.uniqueness_before_tau,
            "uniqueness_everywhere": self.uniqueness_everywhere,
        }

    def passed(self, enforce_freezing=True) -> bool:
        checks = self.checks()
        if not enforce_freezing:
            checks.pop("support_freezing")
            checks.pop("uniqueness_everywhere")
        return all(checks.values())


def product_form(measure: OptionalMeasure, mode: DecompositionMode) -> tuple[AdaptedProcess, AdaptedProcess]:
    """(L, D) as explicit products of jump factors along each path.

    Independent of the level recursions in ``decompose``: every node multiplies
    the factors of its own path from scratch.
    """
    tree = measure.tree
    pot = potential(measure)
    U = pot.U
    mass = measure.total_mass
    L_values: list[Scalar] = []
    D_values: list[Scalar] = []
    for node in range(tree.node_count):
        l_value: Scalar = mass
        d_value: Scalar = Fraction(1)
        previous_u: Scalar = mass
        for step in tree.path(node):
            jump = measure.increment(step)
            if mode == DecompositionMode.OPTIONAL:
                if tree.parent(step) is not None and previous_u > 0:
                    l_value *= (U[step] + jump) / previous_u
                if U[step] + jump > 0:
                    d_value *= U[step] / (U[step] + jump)
                else:
                    d_value = Fraction(0)
            else:
                projected = previous_u - jump
                if previous_u > 0:
                    d_value *= projected / previous_u
                else:
                    d_value = Fraction(0)
                if projected > 0:
                    l_value *= U[step] / projected
            previous_u = U[step]
        L_values.append(l_value)
        D_values.append(d_value)
    return AdaptedProcess(tree, tuple(L_values), mass), AdaptedProcess(tree, tuple(D_values), Fraction(1))


def verify_decomposition(decomposition: Decomposition, measure: OptionalMeasure) -> DecompositionReport:
    """Check conditions 1-5, U = L * D and agreement with the product form.

    Report only, never raises. Condition 3 (class D) cannot fail on a finite
    tree; it is still evaluated as the finiteness of sup_tau E[|L_tau D_tau|].
    """
    report = DecompositionReport()
    tree = measure.tree
    L, D = decomposition.L, decomposition.D
    mode = decomposition.mode
    pot = potential(measure)

    # 1) L non-negative martingale
    for node in range(tree.node_count):
        if L[node] < 0:
            report.fail("martingale", node)
        if tree.children(node) and expectation_below(tree, node, L.values) != L[node]:
            report.fail("martingale", node)
    # 2) D non-increasing from D_0- = 1, {D_T > 0} within {L_T = 0}
    for node in range(tree.node_count):
        if D[node] < 0 or D[node] > D.previous(node):
            report.fail("monotone_and_support", node)
    for leaf in tree.leaves:
        if D[leaf] > 0 and L[leaf] != 0:
            report.fail("monotone_and_support", leaf)
    if mode == DecompositionMode.PREDICTABLE and not D.is_sibling_constant():
        report.fail("monotone_and_support", tree.root)
    # 3) class (D)
    magnitude = AdaptedProcess(tree, tuple(abs(l * d) for l, d in zip(L.values, D.values)))
    if not math.isfinite(float(optimal_stopping_value(magnitude)[tree.root])):
        report.fail("class_d", tree.root)
    # 4) recomposition
    recomposed = recompose(decomposition)
    for node in range(tree.node_count):
        if recomposed.a[node] != measure.a[node]:
            report.fail("recomposition", node)
    # 5) support freezing; a degenerate step may only drop D to 0
    for node in range(tree.node_count):
        previous_l, previous_d = L.previous(node), D.previous(node)
        if mode == DecompositionMode.OPTIONAL:
            degenerate = pot.U[node] + measure.increment(node) == 0 and D[node] == 0
            if L[node] == 0 and D[node] != previous_d and not degenerate:
                report.fail("support_freezing", node)
            if previous_d == 0 and L[node] != previous_l:
                report.fail("support_freezing", node)
        else:
            parent = tree.parent(node)
            previous_u = measure.total_mass if parent is None else pot.U[parent]
            degenerate = previous_u == 0 and D[node] == 0
            if previous_l == 0 and D[node] != previous_d and not degenerate:
                report.fail("support_freezing", node)
            if D[node] == 0 and L[node] != previous_l:
                report.fail("support_freezing", node)
    # U = L * D
    for node in range(tree.node_count):
        if pot.U[node] != L[node] * D[node]:
            report.fail("multiplicative", node)
    # Uniqueness against the product form
    product_l, product_d = product_form(measure, mode)
    for node in range(tree.node_count):
        agrees = product_l[node] == L[node] and product_d[node] == D[node]
        if agrees:
            continue
        report.fail("uniqueness_everywhere", node)
        if pot.tau.is_alive(node) and not pot.tau.stops_at(node):
            report.fail("uniqueness_before_tau", node)
    if report.witnesses:
        logger.info(f"Decomposition verification failures: {report.witnesses}.")
    return report
