# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Scenario files (TOML, ``schema_version = 1``) and the objects they describe.

Exact values are written as integers or "num/den" strings; TOML floats stay
floats. Every randomized constructor draws from one generator seeded by the
scenario seed (or the --seed flag), in the order the scenario lists them.
"""

import math
import tomllib
from typing import Literal
import logging
# Create a logger for the cli component
logger = logging.getLogger(__name__)

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from rp_toolbox.scalars import to_scalar
from rp_toolbox.filtration import (
    AdaptedProcess,
    FiltrationTree,
    constant,
    from_level_values,
    random_process,
    random_tree,
    single_payment,
    terminal_payoff,
)
from rp_toolbox.decomposition import OptionalMeasure, random_optional_measure
from rp_toolbox.riskcore import (
    DiscountedExpectedLoss,
    ExpectedLoss,
    PenaltyFunction,
    RobustRiskMeasure,
    WorstCase,
    discounted_control,
    extreme_point_controls,
    random_mixture_controls,
    stopping_time_controls,
    terminal_controls,
)
from rp_toolbox.bsde import (
    BrownianLattice,
    brownian_values,
    build_brownian_tree,
    custom_grid_driver,
    hump_obstacle_process,
    linear_driver,
    quadratic_driver,
    zero_driver,
)
from rp_toolbox.cli.errors.cli_errors import ScenarioError, ScenarioSchemaError

SCHEMA_VERSION = 1

ScalarInput = int | str | float


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TreeSpec(_Spec):
    kind: Literal["branching", "brownian", "random"] = "branching"
    depth: int = Field(default=2, ge=0)
    probabilities: list[ScalarInput] = Field(default_factory=lambda: ["1/2", "1/2"])
    # brownian
    steps: int = Field(default=10, ge=1)
    horizon: ScalarInput = 1
    lattice: bool = False
    # random
    max_branching: int = Field(default=3, ge=1)
    max_nodes: int = Field(default=2_000, ge=1)


class ProcessSpec(_Spec):
    kind: Literal["constant", "single_payment", "terminal_payoff", "node_map", "level_values", "random", "hump"]
    amount: ScalarInput = 0
    level: int = Field(default=0, ge=0)
    values: list[ScalarInput] = Field(default_factory=list)
    # terminal_payoff on Brownian spaces: a function of W_T
    functional: Literal["sign", "identity", "positive_part", "leaf_values"] = "sign"
    low: int = -10
    high: int = 10
    denominator: int = Field(default=4, ge=1)
    height: float = 1.0


class MeasureSpec(_Spec):
    kind: Literal["explicit", "level_values", "random"] = "explicit"
    values: list[ScalarInput] = Field(default_factory=list)
    predictable: bool = False
    mass_override: bool = False


class DriverSpec(_Spec):
    family: Literal["zero", "linear", "quadratic", "custom-grid"] = "zero"
    beta: float = Field(default=0.0, ge=0)
    theta: float = Field(default=0.0, ge=0)
    gamma: float = Field(default=1.0, gt=0)
    y_grid: list[float] = Field(default_factory=list)
    z_grid: list[float] = Field(default_factory=list)
    values: list[list[float]] = Field(default_factory=list)


class RiskSpec(_Spec):
    measure: Literal["expected_loss", "worst_case", "discounted", "robust"] = "worst_case"
    beta: ScalarInput = 0
    controls: Literal["extreme_points", "stopping_times", "terminal", "discounted", "random_mixture"] = "extreme_points"
    penalty: Literal["zero", "random"] = "zero"
    mixture_count: int = Field(default=5, ge=1)
    form: Literal["Z1", "Z1d", "S1"] | None = None
    process: str = "x"


class BsdeSpec(_Spec):
    reflected: bool = False
    classical: bool = False
    process: str = "x"
    epsilon: float = Field(default=1e-6, gt=0)
    # Constant controls mu swept by the weak duality check
    mu_grid_points: int = Field(default=13, ge=1)
    amounts: list[float] = Field(default_factory=lambda: [-1.0, -0.5, 0.5, 1.0])


class ChecksSpec(_Spec):
    samples: int = Field(default=20, ge=1)
    tolerance: float | None = Field(default=None, gt=0)


class Scenario(_Spec):
    schema_version: Literal[1]
    name: str = "scenario"
    seed: int | None = Field(default=None, ge=0)
    tree: TreeSpec = Field(default_factory=TreeSpec)
    processes: dict[str, ProcessSpec] = Field(default_factory=dict)
    measure: MeasureSpec | None = None
    driver: DriverSpec = Field(default_factory=DriverSpec)
    risk: RiskSpec | None = None
    bsde: BsdeSpec | None = None
    checks: ChecksSpec = Field(default_factory=ChecksSpec)

    @model_validator(mode="after")
    def _references_resolve(self):
        for section, spec in (("risk", self.risk), ("bsde", self.bsde)):
            if spec is not None and spec.process not in self.processes:
                raise ValueError(f"[{section}] refers to the undefined process {spec.process!r}")
        if self.is_randomized and self.seed is None:
            raise ValueError("a seed is required by the randomized constructors of this scenario")
        if self.tree.kind == "brownian" and self.tree.lattice and self.measure is not None:
            raise ValueError("measures need a tree; set lattice = false")
        return self

    @property
    def is_randomized(self) -> bool:
        return (
            self.tree.kind == "random"
            or any(p.kind == "random" for p in self.processes.values())
            or (self.measure is not None and self.measure.kind == "random")
            or (self.risk is not None and (self.risk.penalty == "random" or self.risk.controls == "random_mixture"))
        )


# Raises: ScenarioError, ScenarioSchemaError
def load_scenario(file_path, seed=None, steps=None) -> Scenario:
    try:
        f = open(file_path, "rb")
    except FileNotFoundError:
        logger.error(f"Scenario file [ {file_path} ] not found.")
        raise ScenarioError(f"scenario file {file_path} not found")
    except PermissionError:
        logger.error(f"Permissions error opening file [ {file_path} ].")
        raise ScenarioError(f"cannot open {file_path}")
    except IsADirectoryError:
        logger.error(f"[ {file_path} ] is a directory and not a file.")
        raise ScenarioError(f"{file_path} is a directory")
    with f:
        try:
            raw = tomllib.load(f)
        except tomllib.TOMLDecodeError:
            logger.error(f"TOML decoding of file [ {file_path} ] failed.")
            raise ScenarioError(f"{file_path} is not valid TOML")
    return parse_scenario(raw, seed, steps)


# Raises: ScenarioSchemaError
def parse_scenario(raw: dict, seed=None, steps=None) -> Scenario:
    raw = dict(raw)
    if seed is not None:
        raw["seed"] = seed
    if steps is not None:
        raw["tree"] = {**raw.get("tree", {}), "steps": steps}
    try:
        return Scenario.model_validate(raw)
    except ValidationError as e:
        logger.error(f"Scenario does not match schema version {SCHEMA_VERSION}: {e.error_count()} error(s).")
        for error in e.errors():
            logger.error(f"  {'.'.join(str(p) for p in error['loc'])}: {error['msg']}")
        raise ScenarioSchemaError(str(e))


class ScenarioContext:
    """Objects built from a scenario, sharing one seeded generator."""

    def __init__(self, scenario: Scenario, workers=1):
        self.scenario = scenario
        self.workers = workers
        self.rng = np.random.default_rng(scenario.seed if scenario.seed is not None else 0)
        self.space = build_space(scenario.tree, self.rng)
        self.processes = {name: build_process(spec, self.space, self.rng) for name, spec in scenario.processes.items()}

    @property
    def is_brownian(self) -> bool:
        return self.scenario.tree.kind == "brownian"

    def process(self, name) -> AdaptedProcess:
        return self.processes[name]

    def measure(self) -> OptionalMeasure:
        if self.scenario.measure is None:
            raise ScenarioSchemaError("this command needs a [measure] table")
        return build_measure(self.scenario.measure, self.space, self.rng)

    def driver(self):
        return build_driver(self.scenario.driver)

    def risk(self):
        """(risk measure, control family) of the [risk] table."""
        if self.scenario.risk is None:
            raise ScenarioSchemaError("this command needs a [risk] table")
        return build_risk_measure(self.scenario.risk, self.space, self.rng, self.workers)


def build_space(spec: TreeSpec, rng):
    if spec.kind == "brownian":
        if spec.lattice:
            return BrownianLattice(spec.steps, to_scalar(spec.horizon))
        return build_brownian_tree(spec.steps, to_scalar(spec.horizon))
    if spec.kind == "random":
        return random_tree(rng, spec.depth, spec.max_branching, spec.max_nodes)
    return FiltrationTree.from_branching(spec.depth, spec.probabilities)


_FUNCTIONALS = {
    "sign": lambda w: float(np.sign(w)),
    "identity": float,
    "positive_part": lambda w: max(float(w), 0.0),
}


# Raises: ScenarioSchemaError
def build_process(spec: ProcessSpec, space, rng) -> AdaptedProcess:
    match spec.kind:
        case "constant":
            return constant(space, to_scalar(spec.amount))
        case "single_payment":
            return single_payment(space, to_scalar(spec.amount), spec.level)
        case "level_values":
            return from_level_values(space, [to_scalar(v) for v in spec.values])
        case "node_map":
            if len(spec.values) != space.node_count:
                raise ScenarioSchemaError(f"node_map needs {space.node_count} values, got {len(spec.values)}")
            return AdaptedProcess(space, tuple(to_scalar(v) for v in spec.values))
        case "random":
            return random_process(space, rng, spec.low, spec.high, spec.denominator)
        case "hump":
            return hump_obstacle_process(space, spec.height)
        case "terminal_payoff":
            if spec.functional == "leaf_values":
                leaves = {leaf: to_scalar(v) for leaf, v in zip(space.leaves, spec.values)}
                if len(leaves) != len(space.leaves):
                    raise ScenarioSchemaError(f"leaf_values needs {len(space.leaves)} values")
                return terminal_payoff(space, leaves.__getitem__)
            values = brownian_values(space)
            function = _FUNCTIONALS[spec.functional]
            return terminal_payoff(space, lambda leaf: function(values[leaf])).as_float()
    raise ScenarioSchemaError(f"unknown process kind {spec.kind}")


def build_measure(spec: MeasureSpec, tree, rng) -> OptionalMeasure:
    if spec.kind == "random":
        return random_optional_measure(tree, rng, predictable=spec.predictable)
    if spec.kind == "level_values":
        return OptionalMeasure(from_level_values(tree, [to_scalar(v) for v in spec.values]))
    if len(spec.values) != tree.node_count:
        raise ScenarioSchemaError(f"explicit measure needs {tree.node_count} values, got {len(spec.values)}")
    return OptionalMeasure(AdaptedProcess(tree, tuple(to_scalar(v) for v in spec.values)))


def build_driver(spec: DriverSpec):
    match spec.family:
        case "zero":
            return zero_driver()
        case "linear":
            return linear_driver(spec.beta, spec.theta)
        case "quadratic":
            return quadratic_driver(spec.gamma, spec.beta)
    if not spec.y_grid or not spec.z_grid:
        raise ScenarioSchemaError("custom-grid driver needs y_grid, z_grid and values")
    return custom_grid_driver(spec.y_grid, spec.z_grid, spec.values)


def _control_family(spec: RiskSpec, tree, rng):
    match spec.controls:
        case "stopping_times":
            return stopping_time_controls(tree)
        case "terminal":
            return terminal_controls(tree, [constant(tree, 1).terminal()])
        case "discounted":
            return [discounted_control(tree, to_scalar(spec.beta))]
        case "random_mixture":
            return random_mixture_controls(extreme_point_controls(tree), rng, spec.mixture_count)
    return extreme_point_controls(tree)


def build_risk_measure(spec: RiskSpec, tree, rng, workers=1):
    controls = _control_family(spec, tree, rng)
    match spec.measure:
        case "expected_loss":
            return ExpectedLoss(), controls
        case "worst_case":
            return WorstCase(), controls
        case "discounted":
            beta = to_scalar(spec.beta)
            if isinstance(beta, float) and not math.isfinite(beta):
                raise ScenarioSchemaError("discount rate must be finite")
            return DiscountedExpectedLoss(tree, beta), controls
    if spec.penalty == "random":
        penalty = PenaltyFunction.random(controls, rng)
    else:
        penalty = PenaltyFunction.zero(controls)
    return RobustRiskMeasure(penalty, spec.form, workers), controls
