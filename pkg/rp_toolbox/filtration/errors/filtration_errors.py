# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later


class FiltrationError(Exception):
    def __init__(self, message=""):
        super().__init__(message)


class TreeValidationError(FiltrationError):
    pass


class LevelOutOfRangeError(FiltrationError):
    pass


class ProcessTotalityError(FiltrationError):
    pass


class PredictabilityError(FiltrationError):
    pass


class StoppingTimeError(FiltrationError):
    pass


class StoppingTimeExplosionError(FiltrationError):
    pass
