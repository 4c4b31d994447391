# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

from dataclasses import dataclass
from fractions import Fraction
import logging
# Create a logger for the decomposition component
logger = logging.getLogger(__name__)

from rp_toolbox.scalars import Scalar
from rp_toolbox.filtration import AdaptedProcess, RandomVariable, is_martingale
from rp_toolbox.decomposition.errors.decomposition_errors import MeasureAssociationError


@dataclass(frozen=True)
class AssociatedMeasure:
    """The measure Q with dQ/dP = L_T, stored as reweighted edge probabilities.

    Edges below a node where L vanishes keep their P-probabilities; such nodes
    carry no Q-mass anyway.
    """

    tree: object
    density: AdaptedProcess
    edge_probabilities: tuple[Scalar, ...]

    def probability(self, node) -> Scalar:
        probability: Scalar = Fraction(1)
        for step in self.tree.path(node)[1:]:
            probability *= self.edge_probabilities[step]
        return probability

    def expectation(self, variable: RandomVariable) -> Scalar:
        return sum((self.probability(leaf) * variable[leaf] for leaf in self.tree.leaves), Fraction(0))

    def stieltjes_expectation(self, x: AdaptedProcess, d: AdaptedProcess) -> Scalar:
        """E_Q[sum_k X_k dD_k], evaluated path by path on the leaves."""
        total: Scalar = Fraction(0)
        for leaf in self.tree.leaves:
            path_sum = sum((x[node] * d.increment(node) for node in self.tree.path(leaf)), Fraction(0))
            total += self.probability(leaf) * path_sum
        return total


# Raises: MeasureAssociationError
def associate_measure(l_process: AdaptedProcess) -> AssociatedMeasure:
    tree = l_process.tree
    negative = [leaf for leaf in tree.leaves if l_process[leaf] < 0]
    if negative:
        logger.error(f"Density is negative on leaf {negative[0]}.")
        raise MeasureAssociationError(f"L_T is negative on leaf {negative[0]}")
    if l_process[tree.root] != 1:
        logger.error(f"Density starts at {l_process[tree.root]} instead of 1.")
        raise MeasureAssociationError("L_0 must be 1")
    if not is_martingale(l_process):
        logger.error("Density process is not a martingale.")
        raise MeasureAssociationError("L is not a martingale")
    edges: list[Scalar] = [Fraction(1)] * tree.node_count
    for node in range(1, tree.node_count):
        parent = tree.parent(node)
        probability = tree.node(node).probability
        if l_process[parent] > 0:
            edges[node] = probability * l_process[node] / l_process[parent]
        else:
            edges[node] = probability
    return AssociatedMeasure(tree, l_process, tuple(edges))


def weighted_stieltjes_expectation(l_process: AdaptedProcess, x: AdaptedProcess, d: AdaptedProcess) -> Scalar:
    """E[sum_k X_k L_k dD_k] under the reference measure."""
    tree = l_process.tree
    return sum(
        (tree.node_probability(n) * x[n] * l_process[n] * d.increment(n) for n in range(tree.node_count)),
        Fraction(0),
    )
