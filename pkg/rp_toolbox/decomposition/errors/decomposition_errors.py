# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later


class DecompositionError(Exception):
    def __init__(self, message=""):
        super().__init__(message)


class MeasureValidationError(DecompositionError):
    pass


class MeasureNormalizationError(DecompositionError):
    pass


class NotPredictableError(DecompositionError):
    pass


class MeasureAssociationError(DecompositionError):
    pass
