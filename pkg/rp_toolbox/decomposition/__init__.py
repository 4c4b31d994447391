# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

from rp_toolbox.decomposition.measure import (
    OptionalMeasure,
    PairedMeasure,
    linear_form,
    node_mass_measure,
    paired_linear_form,
    paired_linear_form_projected,
    random_optional_measure,
    stopping_time_measure,
    terminal_measure,
)
from rp_toolbox.decomposition.decompose import (
    Decomposition,
    DecompositionMode,
    Potential,
    bracket_process,
    coincide_before_tau,
    decompose_optional,
    decompose_predictable,
    has_vanishing_bracket,
    potential,
    recompose,
)
from rp_toolbox.decomposition.verify import DecompositionReport, product_form, verify_decomposition
from rp_toolbox.decomposition.association import (
    AssociatedMeasure,
    associate_measure,
    weighted_stieltjes_expectation,
)
