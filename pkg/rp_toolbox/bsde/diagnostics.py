# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Runtime diagnostics of a solution: boundedness of Y and the BMO size of Z."""

from dataclasses import dataclass
import logging
# Create a logger for the bsde component
logger = logging.getLogger(__name__)

from rp_toolbox.filtration import AdaptedProcess, sup_norm
from rp_toolbox.bsde.solver import BsdeSolution, solve_bsde, solve_rbsde


def bmo_process(solution: BsdeSolution) -> AdaptedProcess:
    """E[sum_{j >= k} |Z_j|^2 dt | F_k] at every node, zero on the leaves."""
    space = solution.space
    values = [0.0] * space.node_count
    for level in range(space.depth - 1, -1, -1):
        dt = float(space.step(level))
        for node in space.level_nodes(level):
            remaining = sum(float(p) * values[c] for p, c in zip(space.child_probabilities(node), space.children(node)))
            values[node] = solution.Z[node] ** 2 * dt + remaining
    return AdaptedProcess(space, tuple(values))


def bmo_diagnostic(solution: BsdeSolution) -> float:
    """Largest remaining quadratic variation of int Z dW over all node stopping times."""
    value = max(bmo_process(solution).values)
    logger.debug(f"BMO diagnostic {value}.")
    return value


def boundedness_violation(solution: BsdeSolution) -> float:
    """max(|Y| - sup|X|, 0) over all nodes."""
    bound = float(sup_norm(solution.x))
    return max(0.0, max(abs(y) - bound for y in solution.Y.values))


@dataclass
class ScalingReport:
    scales: tuple[float, ...]
    diagnostics: tuple[float, ...]

    @property
    def non_increasing(self) -> bool:
        # Scales are sorted in decreasing order
        return all(later <= earlier + 1e-12 for earlier, later in zip(self.diagnostics, self.diagnostics[1:]))


def bmo_scaling_check(x: AdaptedProcess, driver, scales=(1.0, 0.5, 0.25, 0.125), space=None, reflected=False) -> ScalingReport:
    """BMO diagnostic of scaled copies c X, for decreasing c."""
    solve = solve_rbsde if reflected else solve_bsde
    ordered = tuple(sorted((float(c) for c in scales), reverse=True))
    diagnostics = tuple(bmo_diagnostic(solve(x.as_float() * c, driver, space)) for c in ordered)
    report = ScalingReport(ordered, diagnostics)
    if not report.non_increasing:
        logger.warning(f"BMO diagnostic grows as X shrinks: {dict(zip(ordered, diagnostics))}.")
    return report
