# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later


class RiskCoreError(Exception):
    def __init__(self, message=""):
        super().__init__(message)


class EmptyControlSetError(RiskCoreError):
    pass


class ControlValidationError(RiskCoreError):
    pass


class PenaltyNormalizationError(RiskCoreError):
    pass


class NonMonotoneAcceptanceError(RiskCoreError):
    pass
