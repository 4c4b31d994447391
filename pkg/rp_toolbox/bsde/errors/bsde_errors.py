# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later


class BsdeError(Exception):
    def __init__(self, message=""):
        super().__init__(message)


class ContractionGuardError(BsdeError):
    pass


class FixedPointConvergenceError(BsdeError):
    pass


class TiltPositivityError(BsdeError):
    pass


class DriverFlagError(BsdeError):
    pass


class UnsupportedDimensionError(BsdeError):
    pass


class ControlGridError(BsdeError):
    pass
