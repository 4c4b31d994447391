# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

from rp_toolbox.bsde.lattice import BrownianLattice, StoppingRegion, brownian_values, build_brownian_tree
from rp_toolbox.bsde.driver import (
    Driver,
    DriverFamily,
    DriverFlag,
    DriverFlagReport,
    check_driver_flags,
    conjugate,
    custom_grid_driver,
    fenchel_young_gap,
    grid_conjugate,
    linear_driver,
    quadratic_driver,
    zero_driver,
)
from rp_toolbox.bsde.solver import BsdeSolution, check_contraction, snell_envelope, solve_bsde, solve_rbsde
from rp_toolbox.bsde.duality import (
    DualControlBSDE,
    constant_control,
    dual_evaluate_er,
    dual_evaluate_reflected,
    dual_path_sum,
    dual_process_er,
    dual_value_best_stop,
    epsilon_optimal_tau,
    optimal_control,
    tilted_probabilities,
)
from rp_toolbox.bsde.dynamic import (
    BsdeRiskMeasure,
    NegativeExampleReport,
    hump_obstacle_process,
    negative_example_check,
    risk_measure_from_bsde,
)
from rp_toolbox.bsde.diagnostics import (
    ScalingReport,
    bmo_diagnostic,
    bmo_process,
    bmo_scaling_check,
    boundedness_violation,
)
