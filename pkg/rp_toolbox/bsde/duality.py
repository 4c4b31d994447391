# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Dual controls (mu, beta, tau) and the dual evaluators.

A control tilts the one-step probabilities of every node,

    q_c = p_c (1 - mu dW_c),

so that E_Q[dW] = -mu dt, and discounts implicitly with 1 / (1 + beta dt) per
step. The dual value of X is computed backward,

    V_N = -X_N
    V_k = (E_Q[V_{k+1}] - (beta_k X_k + g*(t_k, beta_k, mu_k)) dt) / (1 + beta_k dt),

and V_k = -X_k wherever tau stops. With this discretization weak duality
(V_0 <= Y_0 for every control) and strong duality at the maximizer of the
conjugate hold exactly on the grid.
"""

import math
from dataclasses import dataclass
import logging
# Create a logger for the bsde component
logger = logging.getLogger(__name__)

import numpy as np

from rp_toolbox.filtration import AdaptedProcess, FiltrationTree, first_hitting_time
from rp_toolbox.bsde.config import config
from rp_toolbox.bsde.driver import Driver, DriverFamily
from rp_toolbox.bsde.lattice import StoppingRegion
from rp_toolbox.bsde.solver import BsdeSolution
from rp_toolbox.bsde.errors.bsde_errors import ControlGridError, TiltPositivityError


@dataclass(frozen=True)
class DualControlBSDE:
    space: object
    mu: tuple[float, ...]
    beta: tuple[float, ...]
    # StoppingTime on trees, StoppingRegion on lattices; None when unreflected
    tau: object | None = None
    # Largest |g - (-beta y - mu z - g*)| seen when the control was built
    gap: float = 0.0

    def with_tau(self, tau) -> "DualControlBSDE":
        return DualControlBSDE(self.space, self.mu, self.beta, tau, self.gap)

    def is_admissible(self, beta_bound) -> bool:
        space = self.space
        for level in range(space.depth):
            root_dt = math.sqrt(float(space.step(level)))
            for node in space.level_nodes(level):
                if abs(self.mu[node]) * root_dt >= 1:
                    return False
                if not -1e-12 <= self.beta[node] <= beta_bound + 1e-12:
                    return False
        return True


def constant_control(space, mu=0.0, beta=0.0, tau=None) -> DualControlBSDE:
    return DualControlBSDE(space, (float(mu),) * space.node_count, (float(beta),) * space.node_count, tau)


# Raises: TiltPositivityError
def tilted_probabilities(space, node, mu) -> tuple[float, ...]:
    probabilities = tuple(
        float(p) * (1 - mu * dw) for p, dw in zip(space.child_probabilities(node), space.child_increments(node))
    )
    if any(not 0 < q < 1 for q in probabilities):
        logger.error(f"Tilt with mu = {mu} leaves (0, 1) at node {node}: {probabilities}.")
        raise TiltPositivityError(f"|mu| sqrt(dt) must stay below 1 (node {node}, mu {mu})")
    return probabilities


def _sign(value) -> float:
    return float(np.sign(value))


# Raises: ControlGridError
def optimal_control(solution: BsdeSolution, driver: Driver | None = None, points=None) -> DualControlBSDE:
    """Per node, the maximizer (beta, mu) of -beta y - mu z - g*(t, beta, mu).

    y = Y + X and z = Z are taken from the solution (the continuation value
    before reflection). Closed forms are used for the built-in families and a
    (beta, mu) grid search otherwise.
    """
    driver = solution.driver if driver is None else driver
    space = solution.space
    points = config.control_grid_points if points is None else points
    mu = [0.0] * space.node_count
    beta = [0.0] * space.node_count
    worst_gap = 0.0
    table_cache: dict[float, tuple] = {}
    for level in range(space.depth):
        t = float(space.time(level))
        for node in space.level_nodes(level):
            y, z = solution.driver_argument(node), solution.Z[node]
            if driver.family == DriverFamily.ZERO:
                chosen = (0.0, 0.0)
            elif driver.family == DriverFamily.LINEAR:
                chosen = (driver.parameters["beta"], -driver.parameters["theta"] * _sign(z))
            elif driver.family == DriverFamily.QUADRATIC:
                chosen = (driver.parameters["beta"], -driver.parameters["gamma"] * z)
            else:
                if t not in table_cache:
                    table_cache[t] = _conjugate_table(driver, t, float(space.step(level)), points)
                chosen = _grid_argmax(table_cache[t], y, z)
            beta[node], mu[node] = chosen
            attained = -chosen[0] * y - chosen[1] * z - driver.conjugate(t, chosen[0], chosen[1])
            worst_gap = max(worst_gap, abs(float(driver(t, y, z)) - attained))
    if worst_gap > 1e-9:
        logger.warning(f"Control search leaves a gap of {worst_gap} in the conjugate identity.")
    return DualControlBSDE(space, tuple(mu), tuple(beta), None, worst_gap)


def _conjugate_table(driver: Driver, t, dt, points):
    mu_limit = (1 - 1e-9) / math.sqrt(dt)
    if driver.mu_bound is not None:
        mu_limit = min(mu_limit, driver.mu_bound)
    betas = np.linspace(0.0, driver.beta_bound, points)
    mus = np.linspace(-mu_limit, mu_limit, points)
    table = np.array([[driver.conjugate(t, b, m) for m in mus] for b in betas])
    if not np.isfinite(table).any():
        logger.error(f"Conjugate is +inf on the whole control grid at t={t}.")
        raise ControlGridError("no control with finite conjugate on the grid")
    return betas, mus, table


def _grid_argmax(table, y, z) -> tuple[float, float]:
    betas, mus, values = table
    objective = -betas[:, None] * y - mus[None, :] * z - values
    row, column = np.unravel_index(int(np.argmax(objective)), objective.shape)
    return float(betas[row]), float(mus[column])


def _dual_backward(x: AdaptedProcess, driver: Driver, control: DualControlBSDE, space, stopping=None, best=False):
    space = x.tree if space is None else space
    values = [-float(v) for v in x.values]
    for level in range(space.depth - 1, -1, -1):
        dt, t = float(space.step(level)), float(space.time(level))
        for node in space.level_nodes(level):
            payoff = -float(x[node])
            if stopping is not None and stopping.stops_at(node):
                values[node] = payoff
                continue
            mu, beta = control.mu[node], control.beta[node]
            probabilities = tilted_probabilities(space, node, mu)
            expected = sum(q * values[c] for q, c in zip(probabilities, space.children(node)))
            running = (beta * float(x[node]) + driver.conjugate(t, beta, mu)) * dt
            # Implicit Euler discount, the step of the solver
            continuation = (expected - running) / (1 + beta * dt)
            values[node] = max(payoff, continuation) if best else continuation
    return values


def dual_process_er(x, driver, control: DualControlBSDE, space=None) -> AdaptedProcess:
    """Conditional dual values V_k at every node (unreflected)."""
    space = x.tree if space is None else space
    return AdaptedProcess(space, tuple(_dual_backward(x, driver, control, space)))


# Raises: TiltPositivityError
def dual_evaluate_er(x, driver, control: DualControlBSDE, space=None, level=0):
    """E_Q[D_T (-X_T) - sum_k D_{k+1} (beta_k X_k + g*_k) dt] for one control.

    Returns the root value for ``level`` 0 and a node -> value map otherwise;
    -inf when the control leaves the domain of g*.
    """
    space = x.tree if space is None else space
    values = _dual_backward(x, driver, control, space)
    if level == 0:
        return values[space.root]
    return {node: values[node] for node in space.level_nodes(level)}


# Raises: TiltPositivityError, ValueError
def dual_evaluate_reflected(x, driver, control: DualControlBSDE, space=None) -> float:
    """Dual value of the reflected problem for a control carrying a stopping time."""
    if control.tau is None:
        raise ValueError("reflected dual evaluation needs a stopping time")
    space = x.tree if space is None else space
    return _dual_backward(x, driver, control, space, stopping=control.tau)[space.root]


def dual_value_best_stop(x, driver, control: DualControlBSDE, space=None) -> float:
    """max over all stopping times of the reflected dual value, by dynamic programming."""
    space = x.tree if space is None else space
    return _dual_backward(x, driver, control, space, best=True)[space.root]


def epsilon_optimal_tau(solution: BsdeSolution, epsilon=None):
    """tau^eps: first node where Y <= -X + eps (leaves always stop)."""
    epsilon = config.epsilon if epsilon is None else epsilon
    space = solution.space

    def hits(node) -> bool:
        return solution.Y[node] <= -solution.x[node] + epsilon

    if isinstance(space, FiltrationTree):
        return first_hitting_time(space, hits)
    return StoppingRegion(space, frozenset(n for n in range(space.node_count) if hits(n)))


def dual_path_sum(x, driver, control: DualControlBSDE, tau=None) -> float:
    """The dual value summed path by path over the leaves of a tree.

    Independent of the backward recursion: tilted path probabilities and the
    discount factors are multiplied out along every path.
    """
    tree = x.tree
    total = 0.0
    for leaf in tree.leaves:
        path = tree.path(leaf)
        probability = 1.0
        discount = 1.0
        path_value = 0.0
        for node, child in zip(path, path[1:]):
            index = tree.children(node).index(child)
            probability *= tilted_probabilities(tree, node, control.mu[node])[index]
        for node in path:
            if node == leaf or (tau is not None and tau.stops_at(node)):
                path_value += discount * -float(x[node])
                break
            level = tree.level_of(node)
            dt, t = float(tree.step(level)), float(tree.time(level))
            mu, beta = control.mu[node], control.beta[node]
            discount /= 1 + beta * dt
            path_value -= discount * (beta * float(x[node]) + driver.conjugate(t, beta, mu)) * dt
        total += probability * path_value
    return total
