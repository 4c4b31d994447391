# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

from rp_toolbox.riskcore.controls import (
    DeflatorControl,
    DeflatorPair,
    DualControl,
    OptionalControl,
    PairedControl,
    RepresentationForm,
    SplitControl,
    discounted_control,
    extreme_point_controls,
    random_mixture_controls,
    stopping_time_controls,
    terminal_controls,
)
from rp_toolbox.riskcore.penalty import INFINITY, PenaltyFunction
from rp_toolbox.riskcore.robust import RobustValue, robust_evaluate
from rp_toolbox.riskcore.risk_measure import (
    DiscountedExpectedLoss,
    ExpectedLoss,
    FunctionalRiskMeasure,
    RiskMeasure,
    RobustRiskMeasure,
    WorstCase,
)
from rp_toolbox.riskcore.axioms import (
    AxiomReport,
    AxiomResult,
    SampleConfig,
    axiom_check,
    cash_subadditivity_check,
    conditional_axiom_check,
    time_consistency_check,
    time_consistency_gap,
)
from rp_toolbox.riskcore.acceptance import AcceptanceSet, acceptance_set_check, capital_requirement
from rp_toolbox.riskcore.minimal_penalty import PenaltyEstimate, PenaltyKind, PenaltySearch, minimal_penalty
from rp_toolbox.riskcore.cash_additivity import (
    AdditivityProfile,
    CashAdditivityResult,
    additivity_profile,
    cash_additivity_characterization,
    probe_cash_additivity,
    structural_cash_additivity,
)
