# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later


class Config:
    def __init__(self):
        # Largest number of stopping times enumerate_stopping_times may produce
        self.stopping_time_limit = 100_000


# Singleton instance to share globally
config = Config()
