# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Dynamic risk measures defined by the (reflected) solvers.

rho_t(X) is Y_t(X). In the form used throughout this package the driver sees
Y + X, which makes rho_t cash invariant for F_t-measurable amounts. The
classical form (driver sees Y alone) breaks this once the driver depends on y;
``negative_example_check`` searches for the witness.
"""

import math
from dataclasses import dataclass, field
import logging
# Create a logger for the bsde component
logger = logging.getLogger(__name__)

from rp_toolbox.filtration import AdaptedProcess, LevelSlice, from_level_values, single_payment
from rp_toolbox.riskcore import RiskMeasure
from rp_toolbox.bsde.driver import Driver, DriverFlag, check_driver_flags, linear_driver
from rp_toolbox.bsde.lattice import BrownianLattice
from rp_toolbox.bsde.solver import BsdeSolution, solve_bsde, solve_rbsde
from rp_toolbox.bsde.errors.bsde_errors import DriverFlagError

REQUIRED_FLAGS = frozenset((DriverFlag.CONVEX, DriverFlag.MONOTONE, DriverFlag.NORMALIZED))


class BsdeRiskMeasure(RiskMeasure):
    def __init__(self, driver: Driver, reflected=False, space=None, classical=False):
        self.driver = driver
        self.reflected = reflected
        self.space = space
        self.classical = classical
        form = "classical" if classical else "cash-flow"
        self.name = f"{'rbsde' if reflected else 'bsde'}[{driver.family},{form}]"

    @property
    def cash_additive_levels(self):
        if self.classical or self.space is None:
            return None
        return frozenset(range(self.space.depth + 1))

    def solution(self, x: AdaptedProcess) -> BsdeSolution:
        solve = solve_rbsde if self.reflected else solve_bsde
        return solve(x, self.driver, self.space, classical=self.classical)

    def evaluate(self, x):
        return self.solution(x).value

    def conditional_evaluate(self, x, level):
        space = x.tree if self.space is None else self.space
        Y = self.solution(x).Y
        return LevelSlice(space, level, {node: Y[node] for node in space.level_nodes(level)})


# Raises: DriverFlagError
def risk_measure_from_bsde(driver: Driver, reflected=False, space=None, rng=None, check_flags=True, classical=False):
    """Wrap the solvers into a dynamic risk measure after checking the driver flags.

    The driver must be convex, monotone and normalized, and either Lipschitz or of quadratic growth. With ``rng`` the
    declared flags are also spot checked.
    """
    missing = REQUIRED_FLAGS - driver.flags
    if missing or not driver.flags & {DriverFlag.LIPSCHITZ, DriverFlag.QUADRATIC_GROWTH}:
        logger.error(f"Driver {driver.family} lacks flags {sorted(missing) or ['lipschitz or quadratic-growth']}.")
        raise DriverFlagError(f"driver does not declare the flags a risk measure needs: {sorted(driver.flags)}")
    if check_flags and rng is not None:
        times = tuple(float(t) for t in space.time_grid) if space is not None else (0.0,)
        report = check_driver_flags(driver, rng, times)
        if not report.passed:
            logger.error(f"Driver {driver.family} fails its declared flags: {report.witnesses}.")
            raise DriverFlagError(f"driver flag spot checks failed: {sorted(report.witnesses)}")
    return BsdeRiskMeasure(driver, reflected, space, classical)


def hump_obstacle_process(space, height=1.0) -> AdaptedProcess:
    """Deterministic X_k = -height sin(pi t_k / T); the obstacle -X peaks mid-horizon."""
    horizon = float(space.time_horizon)
    return from_level_values(
        space,
        [-height * math.sin(math.pi * float(space.time(k)) / horizon) for k in range(space.depth + 1)],
    )


@dataclass
class NegativeExampleReport:
    classical_violation: float = 0.0
    cash_flow_violation: float = 0.0
    # level, m, node and magnitude of the largest classical violation
    witness: dict | None = None
    tolerance: float = 1e-9
    probes: int = 0
    cash_flow_witness: dict | None = field(default=None)

    @property
    def inconclusive(self) -> bool:
        return self.classical_violation <= self.tolerance

    @property
    def passed(self) -> bool:
        return not self.inconclusive and self.cash_flow_violation <= self.tolerance


def _largest_violation(rm: BsdeRiskMeasure, x, space, amounts, levels) -> tuple[float, dict | None, int]:
    Y = rm.solution(x).Y
    worst, witness, probes = 0.0, None, 0
    for level in levels:
        for m in amounts:
            shifted = rm.solution(x + single_payment(space, float(m), level)).Y
            probes += 1
            for node in space.level_nodes(level):
                gap = abs(shifted[node] - (Y[node] - float(m)))
                if gap > worst:
                    worst, witness = gap, {"level": level, "m": float(m), "node": node, "violation": gap}
    return worst, witness, probes


def negative_example_check(
    driver: Driver | None = None,
    space=None,
    x: AdaptedProcess | None = None,
    amounts=(-1.0, -0.5, 0.5, 1.0),
    levels=None,
    tolerance=1e-9,
    reflected=True,
) -> NegativeExampleReport:
    """Search for a conditional cash invariance violation of the classical form.

    Compares rho_t(X + m 1_{[t,T]}) with rho_t(X) - m for every level and
    amount, once with the driver fed Y (classical) and once with Y + X. A
    search without a classical witness is inconclusive, not a pass.
    """
    driver = linear_driver(beta=0.5) if driver is None else driver
    space = BrownianLattice(10) if space is None else space
    x = hump_obstacle_process(space) if x is None else x.as_float()
    levels = range(space.depth) if levels is None else levels
    classical = BsdeRiskMeasure(driver, reflected, space, classical=True)
    cash_flow = BsdeRiskMeasure(driver, reflected, space, classical=False)
    classical_violation, witness, probes = _largest_violation(classical, x, space, amounts, levels)
    cash_flow_violation, cash_flow_witness, _ = _largest_violation(cash_flow, x, space, amounts, levels)
    report = NegativeExampleReport(classical_violation, cash_flow_violation, witness, tolerance, probes, cash_flow_witness)
    if report.inconclusive:
        logger.info(f"No cash invariance violation of the classical form found in {probes} probes.")
    else:
        logger.info(f"Classical form violates cash invariance by {classical_violation} at {witness}.")
    if cash_flow_violation > tolerance:
        logger.warning(f"Cash-flow form shows a violation of {cash_flow_violation} at {cash_flow_witness}.")
    return report
