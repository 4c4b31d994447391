# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

import math
from fractions import Fraction
from typing import Iterator, Sequence
import logging
# Create a logger for the riskcore component
logger = logging.getLogger(__name__)

from rp_toolbox.scalars import Scalar, to_scalar
from rp_toolbox.riskcore.controls import DualControl
from rp_toolbox.riskcore.errors.riskcore_errors import (
    EmptyControlSetError,
    PenaltyNormalizationError,
)

INFINITY = math.inf


class PenaltyFunction:
    """A penalty gamma on a finite enumerated support of dual controls.

    Controls outside the support (or with an infinite value) have penalty +inf.
    Normalization, inf over the support = 0, is checked on construction.
    """

    # Raises: EmptyControlSetError, PenaltyNormalizationError
    def __init__(self, controls: Sequence[DualControl], values: Sequence[Scalar], description=""):
        if not controls:
            logger.error("Penalty function defined on an empty control set.")
            raise EmptyControlSetError("penalty function needs at least one control")
        if len(controls) != len(values):
            raise PenaltyNormalizationError(f"{len(controls)} controls but {len(values)} penalty values")
        self._controls = tuple(controls)
        self._values = tuple(value if value == INFINITY else to_scalar(value) for value in values)
        self.description = description
        if any(value < 0 for value in self._values):
            logger.error("Penalty function takes negative values.")
            raise PenaltyNormalizationError("penalty values must lie in [0, +inf]")
        finite = [value for value in self._values if value != INFINITY]
        if not finite or min(finite) != 0:
            logger.error(f"Penalty infimum over the support is {min(finite, default=INFINITY)}, not 0.")
            raise PenaltyNormalizationError("inf of the penalty over its support must be 0")
        self._index = {id(control): position for position, control in enumerate(self._controls)}

    @classmethod
    def zero(cls, controls: Sequence[DualControl], description="zero") -> "PenaltyFunction":
        return cls(controls, [Fraction(0)] * len(controls), description)

    @classmethod
    def indicator(cls, controls: Sequence[DualControl], support: Sequence[int], description="indicator"):
        """0 on ``support`` (positions into ``controls``), +inf elsewhere."""
        chosen = set(support)
        return cls(
            controls,
            [Fraction(0) if position in chosen else INFINITY for position in range(len(controls))],
            description,
        )

    @classmethod
    def random(cls, controls: Sequence[DualControl], rng, max_value=4, denominator=4, description="random"):
        """Random rational penalty in [0, max_value]; one control drawn to carry 0."""
        values = [Fraction(int(k), denominator) for k in rng.integers(0, max_value * denominator + 1, size=len(controls))]
        values[int(rng.integers(0, len(controls)))] = Fraction(0)
        return cls(controls, values, description)

    @property
    def controls(self) -> tuple[DualControl, ...]:
        return self._controls

    @property
    def values(self) -> tuple[Scalar, ...]:
        return self._values

    def evaluate(self, control: DualControl) -> Scalar:
        position = self._index.get(id(control))
        return INFINITY if position is None else self._values[position]

    __call__ = evaluate

    def support(self) -> Iterator[tuple[DualControl, Scalar]]:
        """Controls with finite penalty, in declaration order."""
        for control, value in zip(self._controls, self._values):
            if value != INFINITY:
                yield control, value

    def support_description(self) -> dict:
        return {
            "description": self.description,
            "controls": len(self._controls),
            "finite": sum(1 for _ in self.support()),
            "forms": sorted({str(control.form) for control in self._controls}),
        }
