# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

import math

import numpy as np
import pytest

from rp_toolbox.filtration import random_process, single_payment, terminal_payoff
from rp_toolbox.riskcore import SampleConfig, time_consistency_check
from rp_toolbox.bsde import (
    BrownianLattice,
    bmo_scaling_check,
    boundedness_violation,
    brownian_values,
    build_brownian_tree,
    check_driver_flags,
    constant_control,
    custom_grid_driver,
    dual_evaluate_er,
    dual_evaluate_reflected,
    dual_path_sum,
    dual_value_best_stop,
    epsilon_optimal_tau,
    fenchel_young_gap,
    grid_conjugate,
    linear_driver,
    negative_example_check,
    optimal_control,
    quadratic_driver,
    risk_measure_from_bsde,
    snell_envelope,
    solve_bsde,
    solve_rbsde,
    tilted_probabilities,
    zero_driver,
)
from rp_toolbox.bsde.errors.bsde_errors import ContractionGuardError, DriverFlagError, TiltPositivityError
from rp_toolbox.cli.acceptance import bsde_boundedness, random_bounded_driver


@pytest.fixture
def rng():
    return np.random.default_rng(31)


def test_lattice_layout():
    lattice = BrownianLattice(3)
    assert lattice.node_count == 10
    assert lattice.levels[2] == (3, 4, 5)
    assert lattice.children(0) == (2, 1)
    assert sum(lattice.node_probability(n) for n in lattice.leaves) == 1
    assert brownian_values(lattice)[9] == pytest.approx(3 * math.sqrt(1 / 3))


def test_brownian_tree_matches_lattice_values():
    tree = build_brownian_tree(3)
    assert tree.node_count == 15
    values = brownian_values(tree)
    assert values[7] == pytest.approx(math.sqrt(3))
    assert values[14] == pytest.approx(-math.sqrt(3))


def test_reflected_solve_without_driver_is_the_snell_envelope(rng):
    for steps in (1, 4, 9):
        lattice = BrownianLattice(steps)
        x = random_process(lattice, rng)
        reflected = solve_rbsde(x, zero_driver(), lattice)
        assert reflected.Y.values == snell_envelope(-x.as_float(), lattice)


def test_linear_driver_discounts_terminal_cash():
    beta = 0.5
    errors = []
    for steps in (16, 32, 64):
        lattice = BrownianLattice(steps)
        value = solve_bsde(single_payment(lattice, -1.0, steps), linear_driver(beta=beta), lattice).value
        assert value == pytest.approx((1 + beta / steps) ** -steps, abs=1e-12)
        errors.append(abs(value - math.exp(-beta)))
    assert errors[0] > errors[1] > errors[2]
    assert errors[1] / errors[2] == pytest.approx(2.0, abs=0.2)


@pytest.mark.parametrize("solve", [solve_bsde, solve_rbsde])
def test_solution_invariants_and_boundedness(solve, rng):
    lattice = BrownianLattice(6)
    x = random_process(lattice, rng, -4, 4)
    solution = solve(x, linear_driver(beta=0.5, theta=1.0), lattice)
    assert all(solution.check_invariants().values())
    assert boundedness_violation(solution) <= 1e-9


def test_dual_discount_is_the_implicit_euler_step():
    beta, steps = 0.5, 8
    lattice = BrownianLattice(steps)
    x = single_payment(lattice, -1.0, steps)
    value = dual_evaluate_er(x, linear_driver(beta=beta), constant_control(lattice, 0.0, beta), lattice)
    assert value == pytest.approx((1 + beta / steps) ** -steps, abs=1e-12)
    assert value != pytest.approx(math.exp(-beta), abs=1e-4)


def _convex_grid_driver(up=1.0, down=0.5, beta=0.25):
    y_grid = np.linspace(-8.0, 8.0, 5)
    z_grid = np.linspace(-16.0, 16.0, 9)
    values = [[up * max(z, 0.0) + down * max(-z, 0.0) - beta * y for z in z_grid] for y in y_grid]
    return custom_grid_driver(y_grid, z_grid, values)


@pytest.mark.parametrize("solve", [solve_bsde, solve_rbsde])
@pytest.mark.parametrize(
    "driver",
    [quadratic_driver(0.5, beta=0.25), _convex_grid_driver()],
    ids=["quadratic", "custom-grid"],
)
def test_boundedness_beyond_linear_drivers(driver, solve, rng):
    lattice = BrownianLattice(6)
    x = random_process(lattice, rng, -4, 4)
    solution = solve(x, driver, lattice)
    assert all(solution.check_invariants().values())
    assert boundedness_violation(solution) <= 1e-9


def test_boundedness_criterion_draws_every_driver_family():
    rng = np.random.default_rng(0)
    families = {random_bounded_driver(rng)[1]["family"] for _ in range(60)}
    assert families == {"linear", "quadratic", "custom-grid"}
    checks = bsde_boundedness(np.random.default_rng(1), 12)
    assert all(check.passed for check in checks)


def test_contraction_guard():
    with pytest.raises(ContractionGuardError):
        solve_bsde(single_payment(BrownianLattice(1), 1.0, 0), linear_driver(beta=1.0), BrownianLattice(1))


def test_tilt_must_keep_probabilities_positive():
    lattice = BrownianLattice(4)
    assert sum(tilted_probabilities(lattice, 0, 1.0)) == pytest.approx(1.0)
    with pytest.raises(TiltPositivityError):
        tilted_probabilities(lattice, 0, 2.5)


def test_driver_parameters_are_checked(rng):
    with pytest.raises(DriverFlagError):
        linear_driver(beta=-1.0)
    assert check_driver_flags(linear_driver(0.4, 0.3), rng).passed
    assert check_driver_flags(quadratic_driver(1.0), rng).passed


def test_grid_conjugate_matches_closed_forms():
    quadratic = quadratic_driver(1.0)
    assert grid_conjugate(quadratic, 0.0, 0.0, 0.5) == pytest.approx(0.125, abs=1e-6)
    linear = linear_driver(0.4, 0.3)
    assert grid_conjugate(linear, 0.0, 0.4, 1.0) == math.inf
    assert grid_conjugate(linear, 0.0, 0.0, 0.1) == math.inf
    tilted = linear_driver(0.5, 0.25)
    assert fenchel_young_gap(tilted, 0.0, 2.0, -4.0, 0.5, 0.25) == 0.0
    assert fenchel_young_gap(tilted, 0.0, 2.0, -4.0, 0.5, -0.25) == 2.0


def test_strong_and_weak_duality_for_linear_driver():
    lattice = BrownianLattice(10)
    values = brownian_values(lattice)
    x = terminal_payoff(lattice, lambda leaf: float(np.sign(values[leaf])))
    driver = linear_driver(beta=0.4, theta=0.3)
    solution = solve_bsde(x, driver, lattice)
    control = optimal_control(solution)
    assert control.is_admissible(driver.beta_bound)
    assert dual_evaluate_er(x, driver, control, lattice) == pytest.approx(solution.value, abs=1e-8)
    for mu in np.linspace(-0.3, 0.3, 7):
        assert dual_evaluate_er(x, driver, constant_control(lattice, mu, 0.4), lattice) <= solution.value + 1e-9


def test_reflected_duality_with_epsilon_optimal_stop(rng):
    lattice = BrownianLattice(8)
    x = random_process(lattice, rng, -4, 4).as_float()
    driver = linear_driver(theta=0.3)
    solution = solve_rbsde(x, driver, lattice)
    control = optimal_control(solution).with_tau(epsilon_optimal_tau(solution, 1e-6))
    assert dual_evaluate_reflected(x, driver, control, lattice) == pytest.approx(solution.value, abs=1e-6)
    for mu in (-0.3, 0.0, 0.3):
        assert dual_value_best_stop(x, driver, constant_control(lattice, mu), lattice) <= solution.value + 1e-9


def test_path_sum_agrees_with_backward_recursion(rng):
    tree = build_brownian_tree(4)
    x = random_process(tree, rng, -4, 4)
    driver = linear_driver(beta=0.4, theta=0.3)
    control = constant_control(tree, 0.2, 0.4)
    assert dual_path_sum(x, driver, control) == pytest.approx(dual_evaluate_er(x, driver, control, tree), abs=1e-12)


def test_bmo_diagnostic_shrinks_with_the_cash_flow(rng):
    lattice = BrownianLattice(6)
    report = bmo_scaling_check(random_process(lattice, rng), linear_driver(0.2, 0.5), space=lattice)
    assert report.non_increasing


def test_classical_form_breaks_cash_invariance():
    report = negative_example_check()
    assert not report.inconclusive
    assert report.classical_violation > 1e-3
    assert report.cash_flow_violation <= 1e-9
    assert report.passed


@pytest.mark.parametrize("reflected", [False, True])
def test_bsde_risk_measure_is_time_consistent(reflected, rng):
    tree = build_brownian_tree(4)
    rm = risk_measure_from_bsde(linear_driver(beta=0.4, theta=0.3), reflected, tree)
    samples = SampleConfig(count=10, low=-4, high=4, tolerance=1e-9)
    assert time_consistency_check(rm, tree, rng, samples).passed
