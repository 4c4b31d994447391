# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later


class RunnerError(Exception):
    def __init__(self, message=""):
        super().__init__(message)


class ScenarioError(RunnerError):
    pass


class ScenarioSchemaError(RunnerError):
    pass


class CheckFailureError(RunnerError):
    def __init__(self, failed_checks=()):
        self.failed_checks = tuple(failed_checks)
        super().__init__(f"failed checks: {', '.join(self.failed_checks)}")
