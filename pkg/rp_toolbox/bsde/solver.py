# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Backward solvers for Y_t = -X_T + int_t^T g(s, Y_s + X_s, Z_s) ds - int Z dW (+ K).

Implicit-in-y backward Euler on a binomial space, level by level:

    Z_k  = E[Y_{k+1} dW_{k+1} | F_k] / dt
    y    = E[Y_{k+1} | F_k] + g(t_k, y + X_k, Z_k) dt      (scalar fixed point)
    Y_k  = y                      (unreflected)
    Y_k  = max(y, -X_k)           (reflected, push dK = Y_k - y >= 0)

and Y_N = -X_N. The ``classical`` form feeds g with y instead of y + X_k.
"""

import math
from dataclasses import dataclass
import logging
# Create a logger for the bsde component
logger = logging.getLogger(__name__)

from scipy.optimize import newton

from rp_toolbox.filtration import AdaptedProcess, FiltrationTree, sup_norm
from rp_toolbox.bsde.config import config
from rp_toolbox.bsde.driver import Driver
from rp_toolbox.bsde.errors.bsde_errors import (
    ContractionGuardError,
    FixedPointConvergenceError,
)


@dataclass(frozen=True)
class BsdeSolution:
    space: object
    x: AdaptedProcess
    driver: Driver
    Y: AdaptedProcess
    Z: AdaptedProcess
    # Unreflected candidate y at every node (equals Y without reflection)
    continuation: AdaptedProcess
    # dK pushed at each node, None without reflection
    push: AdaptedProcess | None
    reflected: bool = False
    classical: bool = False
    iterations: int = 0

    @property
    def value(self) -> float:
        return self.Y[self.space.root]

    @property
    def K(self) -> AdaptedProcess | None:
        """K at every node: pushes summed over strict ancestors (K_0 = 0); trees only."""
        if self.push is None or not isinstance(self.space, FiltrationTree):
            return None
        tree = self.space
        values = [0.0] * tree.node_count
        for level in tree.levels[1:]:
            for node in level:
                parent = tree.parent(node)
                values[node] = values[parent] + self.push[parent]
        return AdaptedProcess(tree, tuple(values))

    def driver_argument(self, node) -> float:
        return self.continuation[node] + (0.0 if self.classical else self.x[node])

    def one_step_residual(self) -> float:
        """max over non-terminal nodes of |y - E[Y'] - g(t, y + X, Z) dt|."""
        space = self.space
        worst = 0.0
        for level in range(space.depth):
            dt, t = float(space.step(level)), float(space.time(level))
            for node in space.level_nodes(level):
                expected = _expectation(space, node, self.Y.values)
                driven = float(self.driver(t, self.driver_argument(node), self.Z[node]))
                worst = max(worst, abs(self.continuation[node] - expected - driven * dt))
        return worst

    def check_invariants(self, tolerance=1e-9) -> dict[str, bool]:
        bound = float(sup_norm(self.x))
        checks = {
            "one_step_identity": self.one_step_residual() <= tolerance,
            "bounded": all(abs(y) <= bound + tolerance for y in self.Y.values),
        }
        if self.reflected:
            pushes = self.push.values
            checks["barrier"] = all(y >= -x - tolerance for y, x in zip(self.Y.values, self.x.values))
            checks["non_decreasing_k"] = all(p >= 0 for p in pushes)
            checks["complementarity"] = (
                sum(abs((y + x) * p) for y, x, p in zip(self.Y.values, self.x.values, pushes)) <= tolerance
            )
        return checks


def _expectation(space, node, values) -> float:
    return sum(float(p) * values[c] for p, c in zip(space.child_probabilities(node), space.children(node)))


# Raises: ContractionGuardError
def check_contraction(driver: Driver, space):
    bound = config.contraction_bound
    for level in range(space.depth):
        dt = float(space.step(level))
        if dt * driver.contraction_constant > bound:
            logger.error(f"dt * C_Lip = {dt * driver.contraction_constant} exceeds {bound} at level {level}.")
            raise ContractionGuardError(f"dt * C_Lip must not exceed {bound}; refine the grid")


# Raises: FixedPointConvergenceError
def _fixed_point(driver: Driver, t, dt, expected, shift, z, tolerance, max_iterations) -> tuple[float, int]:
    y = expected
    for iteration in range(1, max_iterations + 1):
        updated = expected + float(driver(t, y + shift, z)) * dt
        if abs(updated - y) <= max(tolerance, 4 * math.ulp(updated)):
            return updated, iteration
        y = updated
    if driver.is_quadratic:
        try:
            root = newton(
                lambda v: v - expected - float(driver(t, v + shift, z)) * dt,
                y,
                tol=tolerance,
                maxiter=max_iterations,
            )
            logger.debug(f"Fixed point at t={t} solved by the secant fallback.")
            return float(root), max_iterations
        except RuntimeError:
            pass
    logger.error(f"Fixed point at t={t} did not converge in {max_iterations} iterations.")
    raise FixedPointConvergenceError(f"no convergence after {max_iterations} iterations")


def _solve(x: AdaptedProcess, driver: Driver, space, reflected, classical, tolerance, max_iterations) -> BsdeSolution:
    space = x.tree if space is None else space
    tolerance = config.fixed_point_tolerance if tolerance is None else tolerance
    max_iterations = config.max_iterations if max_iterations is None else max_iterations
    check_contraction(driver, space)
    x = x.as_float()
    count = space.node_count
    Y = [0.0] * count
    Z = [0.0] * count
    continuation = [0.0] * count
    push = [0.0] * count
    for leaf in space.leaves:
        Y[leaf] = continuation[leaf] = -x[leaf]
    iterations = 0
    for level in range(space.depth - 1, -1, -1):
        dt, t = float(space.step(level)), float(space.time(level))
        for node in space.level_nodes(level):
            children = space.children(node)
            weights = [float(p) for p in space.child_probabilities(node)]
            increments = space.child_increments(node)
            expected = sum(w * Y[c] for w, c in zip(weights, children))
            z = sum(w * Y[c] * dw for w, c, dw in zip(weights, children, increments)) / dt
            shift = 0.0 if classical else x[node]
            y, used = _fixed_point(driver, t, dt, expected, shift, z, tolerance, max_iterations)
            iterations = max(iterations, used)
            Z[node] = z
            continuation[node] = y
            if reflected:
                Y[node] = max(y, -x[node])
                push[node] = Y[node] - y
            else:
                Y[node] = y
    logger.debug(f"Backward sweep over {count} nodes done, at most {iterations} fixed-point iterations.")
    return BsdeSolution(
        space,
        x,
        driver,
        AdaptedProcess(space, tuple(Y)),
        AdaptedProcess(space, tuple(Z)),
        AdaptedProcess(space, tuple(continuation)),
        AdaptedProcess(space, tuple(push)) if reflected else None,
        reflected,
        classical,
        iterations,
    )


# Raises: ContractionGuardError, FixedPointConvergenceError
def solve_bsde(x, driver, space=None, classical=False, tolerance=None, max_iterations=None) -> BsdeSolution:
    return _solve(x, driver, space, False, classical, tolerance, max_iterations)


# Raises: ContractionGuardError, FixedPointConvergenceError
def solve_rbsde(x, driver, space=None, classical=False, tolerance=None, max_iterations=None) -> BsdeSolution:
    """Reflected solver with obstacle -X: Y >= -X and dK > 0 only where Y = -X."""
    return _solve(x, driver, space, True, classical, tolerance, max_iterations)


def snell_envelope(reward: AdaptedProcess, space=None) -> tuple[float, ...]:
    """V_N = reward_N, V_k = max(reward_k, E[V_{k+1} | F_k]) in floats.

    Written independently of the reflected solver; with g = 0 both produce the
    same floats bit for bit.
    """
    space = reward.tree if space is None else space
    values = [float(v) for v in reward.values]
    for level in range(space.depth - 1, -1, -1):
        for node in space.level_nodes(level):
            continuation = 0.0
            for probability, child in zip(space.child_probabilities(node), space.children(node)):
                continuation += float(probability) * values[child]
            values[node] = max(values[node], continuation)
    return tuple(values)
