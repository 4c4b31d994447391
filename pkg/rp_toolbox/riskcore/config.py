# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later


class Config:
    def __init__(self):
        # Absolute tolerance of the capital requirement bisection
        self.bisection_tolerance = 1e-12
        # Comparison slack used only when one side is a float
        self.comparison_tolerance = 1e-9
        # Worker threads for robust_evaluate (1 = sequential)
        self.workers = 1
        # Probe amounts 10**k for the cash additivity probe
        self.probe_exponents = tuple(range(10))
        # Box radius B of the minimal penalty search and number of doublings
        self.penalty_box = 10.0
        self.penalty_doublings = 4
        # Values above the cap are reported as +inf
        self.penalty_cap = 1e6
        self.penalty_samples = 2_000


# Singleton instance to share globally
config = Config()
