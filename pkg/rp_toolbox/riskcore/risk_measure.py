# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Risk measure handles for cash-flow processes.

Sign convention: a process X is a cumulated cash flow (positive = income) and
rho(X) is the capital that has to be added at time 0 to make X acceptable, so
rho(X + m 1_{[0,T]}) = rho(X) - m.
"""

from fractions import Fraction
from typing import Callable, Sequence
import logging
# Create a logger for the riskcore component
logger = logging.getLogger(__name__)

from rp_toolbox.scalars import Scalar
from rp_toolbox.filtration import AdaptedProcess, LevelSlice, expectation_below
from rp_toolbox.riskcore.controls import DualControl, RepresentationForm, discounted_control
from rp_toolbox.riskcore.robust import robust_evaluate

# A linear piece (c, gamma) stands for the affine map X -> -c.X - gamma
LinearPiece = tuple[tuple[Scalar, ...], Scalar]


class RiskMeasure:
    name = "risk-measure"
    # Levels where the measure declares itself cash additive, None if undeclared
    cash_additive_levels: frozenset[int] | None = None

    def evaluate(self, x: AdaptedProcess) -> Scalar:
        raise NotImplementedError

    def conditional_evaluate(self, x: AdaptedProcess, level) -> LevelSlice:
        """rho_level(X), one value per level node; depends on X on [t_level, T] only."""
        raise NotImplementedError(f"{self.name} has no conditional evaluation")

    @property
    def is_dynamic(self) -> bool:
        return type(self).conditional_evaluate is not RiskMeasure.conditional_evaluate

    def linear_pieces(self, tree) -> list[LinearPiece] | None:
        """Pieces with rho(X) = max_i (-c_i.X - gamma_i), or None if not piecewise linear."""
        return None

    def __call__(self, x: AdaptedProcess) -> Scalar:
        return self.evaluate(x)


def _subtree_nodes(tree, node) -> list[int]:
    nodes = [node]
    frontier = [node]
    while frontier:
        frontier = [child for current in frontier for child in tree.children(current)]
        nodes.extend(frontier)
    return nodes


class ExpectedLoss(RiskMeasure):
    """rho(X) = E[-X_T]."""

    name = "expected-loss"

    def __init__(self, depth: int | None = None):
        self.cash_additive_levels = frozenset(range(depth + 1)) if depth is not None else None

    def evaluate(self, x):
        return self.conditional_evaluate(x, 0)[x.tree.root]

    def conditional_evaluate(self, x, level):
        tree = x.tree
        values = {leaf: -x[leaf] for leaf in tree.leaves}
        for current in range(tree.depth - 1, level - 1, -1):
            values = {node: expectation_below(tree, node, values) for node in tree.level_nodes(current)}
        return LevelSlice(tree, level, values)

    def linear_pieces(self, tree):
        weights = tuple(
            tree.node_probability(n) if tree.level_of(n) == tree.depth else Fraction(0) for n in range(tree.node_count)
        )
        return [(weights, Fraction(0))]


class WorstCase(RiskMeasure):
    """rho(X) = max over all nodes of -X, the coherent worst-case measure."""

    name = "worst-case"
    # Cash paid from t_s > 0 on leaves the earlier nodes untouched
    cash_additive_levels = frozenset((0,))

    def evaluate(self, x):
        return max(-value for value in x.values)

    def conditional_evaluate(self, x, level):
        tree = x.tree
        return LevelSlice(
            tree,
            level,
            {node: max(-x[n] for n in _subtree_nodes(tree, node)) for node in tree.level_nodes(level)},
        )

    def linear_pieces(self, tree):
        pieces = []
        for node in range(tree.node_count):
            weights = tuple(Fraction(1) if n == node else Fraction(0) for n in range(tree.node_count))
            pieces.append((weights, Fraction(0)))
        return pieces


class DiscountedExpectedLoss(RiskMeasure):
    """rho(X) = E[e^{-beta T}(-X_T) - sum_k X_k (e^{-beta t_k} - e^{-beta t_{k+1}})].

    The grid version of E[e^{-beta T}(-X_T) - int beta X_s e^{-beta s} ds]; it is
    cash additive only at time 0 when beta > 0.
    """

    name = "discounted-expected-loss"

    def __init__(self, tree, beta):
        self.beta = beta
        self.control = discounted_control(tree, beta)
        self.cash_additive_levels = frozenset(range(tree.depth + 1)) if beta == 0 else frozenset((0,))

    def evaluate(self, x):
        return -self.control.value(x)

    def conditional_evaluate(self, x, level):
        # E[-sum_{k>=level} X_k (D_{k-1} - D_k) | F_level] / D_{level-1}
        tree = x.tree
        survival = self.control.D
        values: dict[int, Scalar] = {}
        for leaf in tree.leaves:
            path = tree.path(leaf)[level:]
            values[leaf] = sum((x[n] * survival.increment(n) for n in path), Fraction(0))
        for current in range(tree.depth - 1, level - 1, -1):
            values = {node: expectation_below(tree, node, values) for node in tree.level_nodes(current)}
        return LevelSlice(tree, level, {node: values[node] / survival.previous(node) for node in values})

    def linear_pieces(self, tree):
        return [(self.control.node_weights(), Fraction(0))]


class FunctionalRiskMeasure(RiskMeasure):
    """Wraps plain callables; used for measures built ad hoc in scenarios and tests."""

    def __init__(
        self,
        function: Callable[[AdaptedProcess], Scalar],
        name="functional",
        conditional: Callable[[AdaptedProcess, int], LevelSlice] | None = None,
        pieces: Callable[[object], list[LinearPiece]] | None = None,
        cash_additive_levels: frozenset[int] | None = None,
    ):
        self.function = function
        self.name = name
        self.conditional = conditional
        self.pieces = pieces
        self.cash_additive_levels = cash_additive_levels

    def evaluate(self, x):
        return self.function(x)

    def conditional_evaluate(self, x, level):
        if self.conditional is None:
            raise NotImplementedError(f"{self.name} has no conditional evaluation")
        return self.conditional(x, level)

    @property
    def is_dynamic(self) -> bool:
        return self.conditional is not None

    def linear_pieces(self, tree):
        return None if self.pieces is None else self.pieces(tree)


class RobustRiskMeasure(RiskMeasure):
    """rho(X) = max over controls a with finite penalty of a(-X) - gamma(a)."""

    name = "robust"

    def __init__(self, penalty, form: RepresentationForm | str | None = None, workers=None):
        self.penalty = penalty
        self.form = None if form is None else RepresentationForm(form)
        self.workers = workers

    @property
    def controls(self) -> Sequence[DualControl]:
        return self.penalty.controls

    def evaluate(self, x):
        return robust_evaluate(x, self.penalty, form=self.form, workers=self.workers).value

    def linear_pieces(self, tree):
        return [(control.node_weights(), value) for control, value in self.penalty.support()]
