# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Minimal penalty alpha(a) = sup_X (a(-X) - rho(X)).

For a piecewise-linear rho = max_i (-c_i.X - gamma_i) the inner problem over
the box |X| <= B is the linear program

    min  w.X + s   s.t.  -c_i.X - s <= gamma_i,  -B <= X <= B,

with w the node weights of a, and alpha_B = -(w.X* + s*). The box is doubled
until alpha_B stops moving; a value that keeps growing is unbounded.
"""

import math
from dataclasses import dataclass
from enum import StrEnum
import logging
# Create a logger for the riskcore component
logger = logging.getLogger(__name__)

import numpy as np
from scipy.optimize import linprog

from rp_toolbox.filtration import AdaptedProcess
from rp_toolbox.riskcore.config import config
from rp_toolbox.riskcore.controls import DualControl
from rp_toolbox.riskcore.risk_measure import RiskMeasure


class PenaltyKind(StrEnum):
    EXACT = "exact"
    LOWER_BOUND = "lower_bound"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class PenaltySearch:
    box: float | None = None
    doublings: int | None = None
    cap: float | None = None
    samples: int | None = None
    tolerance: float = 1e-7

    def resolved(self) -> "PenaltySearch":
        return PenaltySearch(
            config.penalty_box if self.box is None else self.box,
            config.penalty_doublings if self.doublings is None else self.doublings,
            config.penalty_cap if self.cap is None else self.cap,
            config.penalty_samples if self.samples is None else self.samples,
            self.tolerance,
        )


@dataclass(frozen=True)
class PenaltyEstimate:
    value: float
    kind: PenaltyKind
    # Maximizing X of the last box, if any
    witness: tuple[float, ...] | None = None

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)


def _solve_box(weights: np.ndarray, pieces: np.ndarray, offsets: np.ndarray, box: float):
    count = weights.size
    objective = np.append(weights, 1.0)
    constraints = np.hstack([-pieces, -np.ones((pieces.shape[0], 1))])
    bounds = [(-box, box)] * count + [(None, None)]
    result = linprog(objective, A_ub=constraints, b_ub=offsets, bounds=bounds, method="highs")
    if result.status != 0:
        logger.warning(f"Penalty linear program failed: {result.message}")
        return None
    return -result.fun, tuple(float(v) for v in result.x[:count])


def _lp_penalty(weights, pieces, search: PenaltySearch) -> PenaltyEstimate | None:
    finite = [(c, gamma) for c, gamma in pieces if math.isfinite(float(gamma))]
    matrix = np.array([[float(v) for v in c] for c, _ in finite])
    offsets = np.array([float(gamma) for _, gamma in finite])
    box = search.box
    previous = None
    for _ in range(search.doublings + 1):
        solved = _solve_box(weights, matrix, offsets, box)
        if solved is None:
            return None
        value, witness = solved
        if value > search.cap:
            return PenaltyEstimate(math.inf, PenaltyKind.UNBOUNDED, witness)
        if previous is not None and abs(value - previous) <= search.tolerance * max(1.0, abs(value)):
            return PenaltyEstimate(value, PenaltyKind.EXACT, witness)
        previous = value
        box *= 2
    logger.info(f"Penalty still grows at box {box / 2}; reporting it as unbounded.")
    return PenaltyEstimate(math.inf, PenaltyKind.UNBOUNDED, witness)


def _sampled_penalty(rm: RiskMeasure, control: DualControl, rng, search: PenaltySearch) -> PenaltyEstimate:
    tree = control.tree
    best = -math.inf
    witness = None
    zero = AdaptedProcess(tree, (0.0,) * tree.node_count)
    candidates = [zero] + [
        AdaptedProcess(tree, tuple(float(v) for v in rng.uniform(-search.box, search.box, size=tree.node_count)))
        for _ in range(search.samples)
    ]
    for x in candidates:
        value = float(-control.value(x) - rm.evaluate(x))
        if value > best:
            best, witness = value, x.values
    if best > search.cap:
        return PenaltyEstimate(math.inf, PenaltyKind.UNBOUNDED, witness)
    return PenaltyEstimate(best, PenaltyKind.LOWER_BOUND, witness)


def minimal_penalty(rm: RiskMeasure, control: DualControl, rng=None, search: PenaltySearch = PenaltySearch()) -> PenaltyEstimate:
    """alpha(a), exact through linear programming when rho is piecewise linear.

    Otherwise a lower bound from random X in the box (``rng`` required).
    """
    search = search.resolved()
    tree = control.tree
    pieces = rm.linear_pieces(tree)
    weights = np.array([float(v) for v in control.node_weights()])
    if pieces:
        estimate = _lp_penalty(weights, pieces, search)
        if estimate is not None:
            logger.debug(f"Minimal penalty of {control.label}: {estimate.value} ({estimate.kind}).")
            return estimate
    if rng is None:
        raise ValueError("sampling the minimal penalty needs a random generator")
    return _sampled_penalty(rm, control, rng, search)
