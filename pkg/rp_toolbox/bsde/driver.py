# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

"""BSDE drivers g(t, y, z), their conjugates and flag checks.

The driver is always evaluated at y = Y + X (capital plus cumulated cash flow)
by the solvers of this package, except in the classical form used to exhibit
the failure of cash invariance. The conjugate is

    g*(t, beta, mu) = sup_{y, z} (-beta y - mu z - g(t, y, z))

and its effective domain encodes the admissible discount rates beta and
measure changes mu.
"""

import math
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Callable
import logging
# Create a logger for the bsde component
logger = logging.getLogger(__name__)

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from rp_toolbox.bsde.config import config
from rp_toolbox.bsde.errors.bsde_errors import DriverFlagError

INFINITY = math.inf


class DriverFamily(StrEnum):
    ZERO = "zero"
    LINEAR = "linear"
    QUADRATIC = "quadratic"
    CUSTOM_GRID = "custom-grid"


class DriverFlag(StrEnum):
    LIPSCHITZ = "lipschitz"
    QUADRATIC_GROWTH = "quadratic-growth"
    CONVEX = "convex"
    MONOTONE = "monotone"
    NORMALIZED = "normalized"


@dataclass
class Driver:
    family: DriverFamily
    # g(t, y, z); must accept numpy arrays for y and z
    function: Callable
    flags: frozenset[DriverFlag]
    # Lipschitz constant, or the growth constant of quadratic drivers
    lipschitz_constant: float | None = None
    growth_constant: float | None = None
    # Discount rates are confined to [0, beta_bound]
    beta_bound: float = 0.0
    # Largest |mu| in the effective domain of the conjugate, if bounded
    mu_bound: float | None = None
    closed_conjugate: Callable[[float, float, float], float] | None = None
    parameters: dict = field(default_factory=dict)
    # Grid conjugates already computed, keyed by (t, beta, mu)
    _grid_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __call__(self, t, y, z):
        return self.function(t, y, z)

    @property
    def is_quadratic(self) -> bool:
        return DriverFlag.QUADRATIC_GROWTH in self.flags

    @property
    def contraction_constant(self) -> float:
        """Lipschitz constant of y -> g(t, y, z) used by the contraction guard."""
        if self.lipschitz_constant is not None:
            return self.lipschitz_constant
        return self.beta_bound

    def conjugate(self, t, beta, mu, use_grid=False) -> float:
        if self.closed_conjugate is not None and not use_grid:
            return self.closed_conjugate(t, beta, mu)
        key = (float(t), float(beta), float(mu))
        if key not in self._grid_cache:
            self._grid_cache[key] = grid_conjugate(self, t, beta, mu)
        return self._grid_cache[key]


def _close(left, right) -> bool:
    return abs(left - right) <= 1e-12 * max(1.0, abs(left), abs(right))


def zero_driver() -> Driver:
    def conjugate(t, beta, mu):
        return 0.0 if _close(beta, 0.0) and _close(mu, 0.0) else INFINITY

    return Driver(
        DriverFamily.ZERO,
        lambda t, y, z: 0.0 * (np.asarray(y, dtype=float) + np.asarray(z, dtype=float)),
        frozenset((DriverFlag.LIPSCHITZ, DriverFlag.CONVEX, DriverFlag.MONOTONE, DriverFlag.NORMALIZED)),
        lipschitz_constant=0.0,
        beta_bound=0.0,
        mu_bound=0.0,
        closed_conjugate=conjugate,
    )


def linear_driver(beta=0.0, theta=0.0) -> Driver:
    """g(t, y, z) = theta |z| - beta y."""
    if beta < 0 or theta < 0:
        raise DriverFlagError("linear driver needs beta >= 0 and theta >= 0")

    def conjugate(t, beta_, mu):
        return 0.0 if _close(beta_, beta) and abs(mu) <= theta + 1e-12 else INFINITY

    return Driver(
        DriverFamily.LINEAR,
        lambda t, y, z: theta * np.abs(z) - beta * np.asarray(y, dtype=float),
        frozenset((DriverFlag.LIPSCHITZ, DriverFlag.CONVEX, DriverFlag.MONOTONE, DriverFlag.NORMALIZED)),
        lipschitz_constant=max(beta, theta),
        beta_bound=beta,
        mu_bound=theta,
        closed_conjugate=conjugate,
        parameters={"beta": beta, "theta": theta},
    )


def quadratic_driver(gamma, beta=0.0) -> Driver:
    """g(t, y, z) = (gamma / 2) |z|^2 - beta y."""
    if gamma <= 0 or beta < 0:
        raise DriverFlagError("quadratic driver needs gamma > 0 and beta >= 0")

    def conjugate(t, beta_, mu):
        return mu * mu / (2 * gamma) if _close(beta_, beta) else INFINITY

    return Driver(
        DriverFamily.QUADRATIC,
        lambda t, y, z: 0.5 * gamma * np.square(z) - beta * np.asarray(y, dtype=float),
        frozenset((DriverFlag.QUADRATIC_GROWTH, DriverFlag.CONVEX, DriverFlag.MONOTONE, DriverFlag.NORMALIZED)),
        growth_constant=max(gamma / 2, beta),
        beta_bound=beta,
        closed_conjugate=conjugate,
        parameters={"gamma": gamma, "beta": beta},
    )


def custom_grid_driver(y_grid, z_grid, values, flags=None, beta_bound=None) -> Driver:
    """Time-homogeneous driver interpolated (bilinearly) from values on a (y, z) grid.

    Outside the grid the interpolant is extended linearly. C_Lip and the
    beta bound are estimated from the grid differences.
    """
    y_grid = np.asarray(y_grid, dtype=float)
    z_grid = np.asarray(z_grid, dtype=float)
    table = np.asarray(values, dtype=float)
    interpolator = RegularGridInterpolator((y_grid, z_grid), table, bounds_error=False, fill_value=None)
    slope_y = float(np.max(np.abs(np.diff(table, axis=0)) / np.diff(y_grid)[:, None])) if y_grid.size > 1 else 0.0
    slope_z = float(np.max(np.abs(np.diff(table, axis=1)) / np.diff(z_grid)[None, :])) if z_grid.size > 1 else 0.0

    def function(t, y, z):
        y, z = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(z, dtype=float))
        result = interpolator(np.stack([y, z], axis=-1))
        return result if result.ndim else float(result)

    return Driver(
        DriverFamily.CUSTOM_GRID,
        function,
        frozenset(flags) if flags is not None else frozenset((DriverFlag.LIPSCHITZ, DriverFlag.CONVEX, DriverFlag.MONOTONE, DriverFlag.NORMALIZED)),
        lipschitz_constant=max(slope_y, slope_z),
        beta_bound=slope_y if beta_bound is None else beta_bound,
        mu_bound=slope_z,
        parameters={"y_grid": y_grid.tolist(), "z_grid": z_grid.tolist()},
    )


def _grid_radius(driver: Driver, beta, mu) -> float:
    scale = driver.lipschitz_constant if driver.lipschitz_constant is not None else driver.growth_constant or 1.0
    radius = 10.0 * max(1.0, scale) * max(1.0, abs(beta), abs(mu))
    if "gamma" in driver.parameters:
        # Keep the maximizer z = -mu / gamma well inside the box
        radius = max(radius, 4.0 * abs(mu) / driver.parameters["gamma"])
    return radius


def _grid_sup(driver: Driver, t, beta, mu, radius, points) -> float:
    axis = np.linspace(-radius, radius, points)
    y, z = np.meshgrid(axis, axis, indexing="ij")
    return float(np.max(-beta * y - mu * z - driver(t, y, z)))


def grid_conjugate(driver: Driver, t, beta, mu, points=None, radius=None, cap=None) -> float:
    """g* by a grid sup over a box; +inf when the sup keeps growing with the box.

    The sup is taken over the box of radius R and over the box of radius 2R;
    any growth beyond the grid tolerance (or a value past ``cap``) means the
    point lies outside the effective domain.
    """
    points = config.conjugate_grid_points if points is None else points
    cap = config.conjugate_cap if cap is None else cap
    radius = _grid_radius(driver, beta, mu) if radius is None else radius
    inner = _grid_sup(driver, t, beta, mu, radius, points)
    outer = _grid_sup(driver, t, beta, mu, 2 * radius, 2 * points - 1)
    if outer > cap or outer - inner > grid_tolerance(radius, points) * max(1.0, abs(inner)):
        return INFINITY
    return outer


def grid_tolerance(radius, points) -> float:
    # Relative slack accepted between the two nested boxes
    return max(1e-9, (2 * radius / (points - 1)) ** 2)


def conjugate(driver: Driver, beta, mu, t=0.0, use_grid=False) -> float:
    """g*(t, beta, mu) in [0, +inf]: closed form when the family provides one."""
    return driver.conjugate(t, beta, mu, use_grid)


@dataclass
class DriverFlagReport:
    checked: dict[str, bool] = field(default_factory=dict)
    witnesses: dict[str, dict] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checked.values())

    def fail(self, flag, witness):
        self.checked[flag] = False
        self.witnesses.setdefault(flag, witness)


def check_driver_flags(driver: Driver, rng, times=(0.0,), samples=None, radius=5.0, tolerance=None) -> DriverFlagReport:
    """Spot checks of the declared flags on random (t, y, z) triples."""
    samples = config.flag_samples if samples is None else samples
    tolerance = config.flag_tolerance if tolerance is None else tolerance
    report = DriverFlagReport()
    for flag in driver.flags:
        report.checked[str(flag)] = True
    for t in times:
        t = float(t)
        if DriverFlag.NORMALIZED in driver.flags and abs(float(driver(t, 0.0, 0.0))) > tolerance:
            report.fail(str(DriverFlag.NORMALIZED), {"t": t})
        y1, y2, z1, z2 = (rng.uniform(-radius, radius, size=samples) for _ in range(4))
        g1, g2 = np.asarray(driver(t, y1, z1)), np.asarray(driver(t, y2, z2))
        if DriverFlag.MONOTONE in driver.flags:
            low, high = np.minimum(y1, y2), np.maximum(y1, y2)
            increase = np.asarray(driver(t, high, z1)) - np.asarray(driver(t, low, z1))
            if np.any(increase > tolerance):
                index = int(np.argmax(increase))
                report.fail(str(DriverFlag.MONOTONE), {"t": t, "y": float(low[index]), "z": float(z1[index])})
        if DriverFlag.CONVEX in driver.flags:
            middle = np.asarray(driver(t, (y1 + y2) / 2, (z1 + z2) / 2))
            excess = middle - (g1 + g2) / 2
            if np.any(excess > tolerance):
                index = int(np.argmax(excess))
                report.fail(str(DriverFlag.CONVEX), {"t": t, "y": float(y1[index]), "z": float(z1[index])})
        if DriverFlag.LIPSCHITZ in driver.flags and driver.lipschitz_constant is not None:
            distance = np.abs(y1 - y2) + np.abs(z1 - z2)
            excess = np.abs(g1 - g2) - driver.lipschitz_constant * distance
            if np.any(excess > tolerance):
                index = int(np.argmax(excess))
                report.fail(str(DriverFlag.LIPSCHITZ), {"t": t, "y": float(y1[index]), "z": float(z1[index])})
        if DriverFlag.QUADRATIC_GROWTH in driver.flags and driver.growth_constant is not None:
            excess = np.abs(g1) - driver.growth_constant * (1 + np.abs(y1) + np.square(z1))
            if np.any(excess > tolerance):
                index = int(np.argmax(excess))
                report.fail(str(DriverFlag.QUADRATIC_GROWTH), {"t": t, "y": float(y1[index]), "z": float(z1[index])})
    if not report.passed:
        logger.warning(f"Driver {driver.family} fails flag checks {report.witnesses}.")
    return report


def fenchel_young_gap(driver: Driver, t, y, z, beta, mu) -> float:
    """g(t, y, z) + g*(t, beta, mu) + beta y + mu z, which is >= 0."""
    return float(driver(t, y, z)) + driver.conjugate(t, beta, mu) + beta * y + mu * z
