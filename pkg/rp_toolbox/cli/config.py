# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later


class Config:
    def __init__(self):
        # Overrides the scenario seed when set
        self.seed = None
        self.workers = 1
        # Slack of float checks in reports
        self.tolerance = 1e-6
        # Overrides the number of Brownian steps when set
        self.steps = None
        self.format = "report"
        # Seconds before the suite stops between criteria (0 = no timeout)
        self.timeout = 0
        # Instances per acceptance criterion, default run and --full run
        self.suite_counts = {
            "decomposition": 30,
            "predictable": 30,
            "association": 20,
            "dual_representation": 10,
            "cash_additivity": 10,
            "boundedness": 40,
            "time_consistency": 20,
            "snell": 20,
        }
        self.full_suite_counts = {
            "decomposition": 300,
            "predictable": 300,
            "association": 100,
            "dual_representation": 100,
            "cash_additivity": 50,
            "boundedness": 200,
            "time_consistency": 100,
            "snell": 100,
        }
        # Largest random tree drawn by the suite
        self.suite_max_nodes = 400


# Singleton instance to share globally
config = Config()
