# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence
import logging
# Create a logger for the riskcore component
logger = logging.getLogger(__name__)

from rp_toolbox.scalars import Scalar
from rp_toolbox.filtration import AdaptedProcess
from rp_toolbox.decomposition import linear_form
from rp_toolbox.riskcore.config import config
from rp_toolbox.riskcore.controls import DualControl, OptionalControl, RepresentationForm
from rp_toolbox.riskcore.penalty import INFINITY, PenaltyFunction
from rp_toolbox.riskcore.errors.riskcore_errors import (
    ControlValidationError,
    EmptyControlSetError,
)

# Representations each evaluation form accepts
_ACCEPTED_FORMS = {
    RepresentationForm.Z1: {RepresentationForm.Z1},
    RepresentationForm.Z1D: {RepresentationForm.Z1, RepresentationForm.Z1D},
    RepresentationForm.S1: {RepresentationForm.Z1, RepresentationForm.Z1D, RepresentationForm.S1},
}


@dataclass(frozen=True)
class RobustValue:
    value: Scalar
    index: int
    control: DualControl
    penalty: Scalar


def infer_form(controls: Sequence[DualControl]) -> RepresentationForm:
    forms = {control.form for control in controls}
    if RepresentationForm.S1 in forms:
        return RepresentationForm.S1
    if RepresentationForm.Z1D in forms:
        return RepresentationForm.Z1D
    return RepresentationForm.Z1


def _control_value(control: DualControl, x: AdaptedProcess, form: RepresentationForm) -> Scalar:
    # a(X): the plain optional linear form for Z1, the paired form otherwise
    if form == RepresentationForm.Z1 and isinstance(control, OptionalControl):
        return linear_form(control.measure, x)
    return control.value(x)


# Raises: EmptyControlSetError, ControlValidationError
def robust_evaluate(
    x: AdaptedProcess,
    penalty: PenaltyFunction,
    controls: Sequence[DualControl] | None = None,
    form: RepresentationForm | str | None = None,
    workers: int | None = None,
) -> RobustValue:
    """max over controls a with finite penalty of a(-X) - gamma(a), with its maximizer.

    ``controls`` defaults to the penalty support. Ties go to the first control
    in the given order, so the result does not depend on ``workers``.
    """
    candidates = list(penalty.controls if controls is None else controls)
    form = infer_form(candidates) if form is None else RepresentationForm(form)
    scored = [(position, control, penalty(control)) for position, control in enumerate(candidates)]
    scored = [item for item in scored if item[2] != INFINITY]
    if not scored:
        logger.error("Robust evaluation over an empty control set.")
        raise EmptyControlSetError("no control with finite penalty")
    for position, control, _ in scored:
        if control.form not in _ACCEPTED_FORMS[form]:
            logger.error(f"Control {position} of form {control.form} used in a {form} evaluation.")
            raise ControlValidationError(f"control {position} is not admissible in form {form}")

    def score(item) -> Scalar:
        _, control, value = item
        return -_control_value(control, x, form) - value

    workers = config.workers if workers is None else workers
    if workers > 1 and len(scored) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            values = list(executor.map(score, scored))
    else:
        values = [score(item) for item in scored]

    best = 0
    for candidate in range(1, len(values)):
        if values[candidate] > values[best]:
            best = candidate
    position, control, value = scored[best]
    logger.debug(f"Robust value {values[best]} attained by control {position} ({control.label}).")
    return RobustValue(values[best], position, control, value)
