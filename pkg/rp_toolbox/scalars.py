# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Scalar helpers shared by every component.

Values are either exact rationals (``Fraction``) or floats. Exact values
survive every operation of the filtration, decomposition and riskcore
components; floats only appear in the BSDE component or when a caller
supplies them.
"""

import math
import numbers
from fractions import Fraction
from typing import Union

Scalar = Union[Fraction, float]


def is_exact(value) -> bool:
    return isinstance(value, (Fraction, numbers.Integral)) and not isinstance(value, bool)


def to_scalar(value) -> Scalar:
    """Normalize ints, "num/den" strings and Fractions to Fraction; floats stay floats."""
    if isinstance(value, bool):
        raise TypeError(f"Boolean is not a scalar: {value}.")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        return value
    raise TypeError(f"Unsupported scalar value: {value!r}.")


def format_scalar(value) -> str | float | None:
    # Rationals are serialized losslessly as "num/den"
    if is_exact(value):
        value = Fraction(value)
        return f"{value.numerator}/{value.denominator}"
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return None
    return value


def scalars_close(left, right, tolerance: float) -> bool:
    # Exact comparison when both sides are rational
    if is_exact(left) and is_exact(right):
        return left == right
    if math.isinf(left) or math.isinf(right):
        return left == right
    return abs(float(left) - float(right)) <= tolerance


def scalar_le(left, right, tolerance: float) -> bool:
    if is_exact(left) and is_exact(right):
        return left <= right
    return float(left) <= float(right) + tolerance
