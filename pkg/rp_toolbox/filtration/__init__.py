# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

from rp_toolbox.filtration.tree import FiltrationTree, Node, random_tree
from rp_toolbox.filtration.process import (
    AdaptedProcess,
    LevelSlice,
    RandomVariable,
    conditional_payment,
    constant,
    from_function,
    from_level_values,
    random_process,
    single_payment,
    terminal_payoff,
)
from rp_toolbox.filtration.projections import (
    conditional_expectation,
    conditional_expectation_process,
    expectation_below,
    is_martingale,
    predictable_projection,
    sup_norm,
)
from rp_toolbox.filtration.stopping import (
    StoppingTime,
    constant_time,
    count_stopping_times,
    enumerate_stopping_times,
    first_hitting_time,
    optimal_stopping_value,
)
