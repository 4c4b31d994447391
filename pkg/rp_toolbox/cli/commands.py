# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

"""One function per subcommand; each builds a Report from a ScenarioContext."""

import math
import logging
# Create a logger for the cli component
logger = logging.getLogger(__name__)

import numpy as np

from rp_toolbox.decomposition import (
    coincide_before_tau,
    decompose_optional,
    decompose_predictable,
    has_vanishing_bracket,
    recompose,
    verify_decomposition,
)
from rp_toolbox.riskcore import (
    AcceptanceSet,
    RobustRiskMeasure,
    SampleConfig,
    acceptance_set_check,
    additivity_profile,
    axiom_check,
    capital_requirement,
    cash_subadditivity_check,
    conditional_axiom_check,
    minimal_penalty,
    robust_evaluate,
    time_consistency_check,
)
from rp_toolbox.bsde import (
    bmo_diagnostic,
    boundedness_violation,
    constant_control,
    dual_evaluate_er,
    dual_evaluate_reflected,
    dual_value_best_stop,
    epsilon_optimal_tau,
    negative_example_check,
    optimal_control,
    solve_bsde,
    solve_rbsde,
)
from rp_toolbox.cli.config import config
from rp_toolbox.cli.report import Check, Report
from rp_toolbox.cli.scenario import BsdeSpec, ScenarioContext


# Slack of the exact-on-the-grid comparisons (weak duality, cash invariance)
GRID_TOLERANCE = 1e-9


def _tolerance(ctx: ScenarioContext) -> float:
    return ctx.scenario.checks.tolerance if ctx.scenario.checks.tolerance is not None else config.tolerance


def _new_report(command, ctx: ScenarioContext) -> Report:
    return Report(
        command,
        ctx.scenario.name,
        ctx.scenario.seed,
        metadata={"nodes": ctx.space.node_count, "depth": ctx.space.depth, "tolerance": _tolerance(ctx)},
    )


def _first_difference(left, right) -> dict | None:
    for node, (a, b) in enumerate(zip(left, right)):
        if a != b:
            return {"node": node, "expected": a, "found": b}
    return None


def _add_decomposition(report: Report, prefix, decomposition, measure):
    recomposed = recompose(decomposition)
    difference = _first_difference(measure.a.values, recomposed.a.values)
    report.add(f"{prefix}.round_trip", difference is None, witness=difference)
    verification = verify_decomposition(decomposition, measure)
    for name, passed in verification.checks().items():
        node = verification.witnesses.get(name)
        report.add(f"{prefix}.{name}", passed, witness=None if node is None else {"node": node})
    report.values[prefix] = {
        "L": decomposition.L,
        "D": decomposition.D,
        "mass": decomposition.mass,
        "tau": decomposition.tau.canonical(),
        "U": decomposition.U,
    }


def run_decompose(ctx: ScenarioContext) -> Report:
    report = _new_report("decompose", ctx)
    measure = ctx.measure()
    override = ctx.scenario.measure.mass_override
    optional = decompose_optional(measure, override)
    _add_decomposition(report, "optional", optional, measure)
    report.values["measure"] = measure.a
    if measure.is_predictable:
        predictable = decompose_predictable(measure, override)
        _add_decomposition(report, "predictable", predictable, measure)
        vanishing = has_vanishing_bracket(measure)
        coincide = coincide_before_tau(optional, predictable)
        report.add(
            "coincidence",
            coincide or not vanishing,
            witness={"bracket_vanishes": vanishing, "coincide": coincide},
        )
        report.values["bracket_vanishes"] = vanishing
        report.values["decompositions_coincide"] = coincide
    return report


def run_risk_eval(ctx: ScenarioContext) -> Report:
    report = _new_report("risk eval", ctx)
    tolerance = _tolerance(ctx)
    rm, _ = ctx.risk()
    x = ctx.process(ctx.scenario.risk.process)
    value = rm.evaluate(x)
    report.values["rho"] = value
    report.values["measure"] = rm.name
    capital = capital_requirement(AcceptanceSet(rm), x)
    report.add(
        "capital_requirement",
        abs(capital - float(value)) <= tolerance,
        capital,
        tolerance,
        {"rho": value, "capital": capital},
    )
    if rm.is_dynamic:
        report.values["conditional"] = {
            level: rm.conditional_evaluate(x, level) for level in range(ctx.space.depth + 1)
        }
    return report


def run_risk_dual(ctx: ScenarioContext) -> Report:
    report = _new_report("risk dual", ctx)
    tolerance = _tolerance(ctx)
    rm, controls = ctx.risk()
    x = ctx.process(ctx.scenario.risk.process)
    primal = rm.evaluate(x)
    report.values["rho"] = primal
    pieces = rm.linear_pieces(ctx.space)
    if pieces:
        direct = max(-sum(c * v for c, v in zip(weights, x.values)) - offset for weights, offset in pieces)
        report.add(
            "linear_pieces_reproduce_rho",
            abs(float(direct) - float(primal)) <= tolerance,
            direct,
            tolerance,
            {"rho": primal, "pieces": direct},
        )
    if isinstance(rm, RobustRiskMeasure):
        best = robust_evaluate(x, rm.penalty, form=rm.form, workers=ctx.workers)
        report.values["maximizer"] = {"index": best.index, "label": best.control.label, "penalty": best.penalty}
        report.values["penalty"] = rm.penalty.support_description()
        return report
    # Dual value over the scenario's control family with minimal penalties
    dual = -math.inf
    maximizer = None
    for control in controls:
        estimate = minimal_penalty(rm, control, ctx.rng)
        if not estimate.is_finite:
            continue
        candidate = float(-control.value(x)) - estimate.value
        if candidate > dual:
            dual, maximizer = candidate, control.label
    report.values["dual"] = dual
    report.values["maximizer"] = maximizer
    report.add("weak_duality", dual <= float(primal) + tolerance, float(primal) - dual if maximizer else None, tolerance)
    return report


def _sample_config(ctx: ScenarioContext) -> SampleConfig:
    return SampleConfig(count=ctx.scenario.checks.samples, tolerance=ctx.scenario.checks.tolerance)


def _add_axiom_report(report: Report, prefix, axiom_report):
    for axiom, result in axiom_report.results.items():
        report.add(
            f"{prefix}.{axiom}",
            result.passed or result.informational,
            result.max_violation,
            witness=result.witness,
        )


def run_risk_axioms(ctx: ScenarioContext) -> Report:
    report = _new_report("risk axioms", ctx)
    rm, _ = ctx.risk()
    samples = _sample_config(ctx)
    tree = ctx.space
    _add_axiom_report(report, "axioms", axiom_check(rm, tree, ctx.rng, samples))
    _add_axiom_report(report, "cash_subadditivity", cash_subadditivity_check(rm, tree, ctx.rng, samples))
    _add_axiom_report(report, "acceptance", acceptance_set_check(AcceptanceSet(rm), tree, ctx.rng, samples))
    if rm.is_dynamic:
        for level in range(1, tree.depth + 1):
            _add_axiom_report(report, f"conditional@{level}", conditional_axiom_check(rm, tree, level, ctx.rng, samples))
        _add_axiom_report(report, "time_consistency", time_consistency_check(rm, tree, ctx.rng, samples))
    report.values["measure"] = rm.name
    return report


def run_risk_penalty(ctx: ScenarioContext) -> Report:
    report = _new_report("risk penalty", ctx)
    tolerance = _tolerance(ctx)
    rm, controls = ctx.risk()
    estimates = {}
    minimal_by_control = {}
    for index, control in enumerate(controls):
        estimate = minimal_penalty(rm, control, ctx.rng)
        name = f"{index}:{control.label}"
        estimates[name] = {"value": estimate.value, "kind": estimate.kind}
        minimal_by_control[id(control)] = (name, estimate.value)
        report.add(f"nonnegative.{name}", estimate.value >= -tolerance, estimate.value, tolerance)
    report.values["penalties"] = estimates
    if isinstance(rm, RobustRiskMeasure):
        for control, declared in rm.penalty.support():
            if id(control) not in minimal_by_control:
                continue
            name, minimal = minimal_by_control[id(control)]
            report.add(
                f"below_declared.{name}",
                minimal <= float(declared) + tolerance,
                minimal,
                tolerance,
                {"declared": declared, "minimal": minimal},
            )
        profile = additivity_profile(rm.penalty, ctx.rng, sample_count=2)
        for level, result in profile.results.items():
            report.add(
                f"cash_additivity@{level}",
                result.agree,
                result.additive,
                witness={"structural": result.structural_witness, "probe": result.behavioral_witness},
            )
        report.add("cash_additivity_profile", profile.consistent, witness={"levels": sorted(profile.results)})
    return report


def _bsde_spec(ctx: ScenarioContext) -> BsdeSpec:
    return ctx.scenario.bsde if ctx.scenario.bsde is not None else BsdeSpec()


def _solve(ctx: ScenarioContext, spec: BsdeSpec):
    solve = solve_rbsde if spec.reflected else solve_bsde
    return solve(ctx.process(spec.process), ctx.driver(), ctx.space, classical=spec.classical)


def run_bsde_solve(ctx: ScenarioContext) -> Report:
    report = _new_report("bsde solve", ctx)
    tolerance = _tolerance(ctx)
    spec = _bsde_spec(ctx)
    solution = _solve(ctx, spec)
    for name, passed in solution.check_invariants(tolerance).items():
        report.add(name, passed, tolerance=tolerance)
    report.values.update(
        {
            "Y0": solution.value,
            "Z0": solution.Z[ctx.space.root],
            "bmo": bmo_diagnostic(solution),
            "boundedness_violation": boundedness_violation(solution),
            "iterations": solution.iterations,
            "reflected": spec.reflected,
        }
    )
    return report


def mu_grid(driver, space, points) -> np.ndarray:
    # Keep every tilt strictly inside (0, 1)
    largest_step = max(float(space.step(level)) for level in range(space.depth))
    limit = 0.9 / math.sqrt(largest_step)
    if driver.mu_bound is not None:
        limit = min(limit, driver.mu_bound)
    return np.linspace(-limit, limit, points) if points > 1 else np.zeros(1)


def duality_checks(x, driver, space, reflected=False, epsilon=1e-6, mu_points=13, tolerance=1e-6):
    """Strong duality at the optimal control and weak duality over constant controls.

    Returns the checks and the values to report. Reflected solves pair the
    optimal control with the epsilon-optimal stopping time and sweep every
    stopping time by dynamic programming.
    """
    x = x.as_float()
    solve = solve_rbsde if reflected else solve_bsde
    solution = solve(x, driver, space)
    primal = solution.value
    control = optimal_control(solution, driver)
    if reflected:
        tau = epsilon_optimal_tau(solution, epsilon)
        dual = dual_evaluate_reflected(x, driver, control.with_tau(tau), space)
    else:
        dual = dual_evaluate_er(x, driver, control, space)
    gap = abs(primal - dual)
    checks = [Check("strong_duality", gap <= tolerance, gap, tolerance, {"primal": primal, "dual": dual})]
    worst, witness = -math.inf, None
    for mu in mu_grid(driver, space, mu_points):
        for beta in sorted({0.0, float(driver.beta_bound)}):
            if not math.isfinite(driver.conjugate(0.0, beta, float(mu))):
                continue
            candidate = constant_control(space, float(mu), beta)
            if reflected:
                value = dual_value_best_stop(x, driver, candidate, space)
            else:
                value = dual_evaluate_er(x, driver, candidate, space)
            if value - primal > worst:
                worst, witness = value - primal, {"mu": float(mu), "beta": beta, "dual": value}
    if witness is not None:
        checks.append(Check("weak_duality", worst <= GRID_TOLERANCE, worst, GRID_TOLERANCE, witness))
    values = {"primal": primal, "dual": dual, "gap": gap, "control_gap": control.gap}
    return checks, values


def run_bsde_dual(ctx: ScenarioContext) -> Report:
    report = _new_report("bsde dual", ctx)
    spec = _bsde_spec(ctx)
    checks, values = duality_checks(
        ctx.process(spec.process),
        ctx.driver(),
        ctx.space,
        spec.reflected,
        spec.epsilon,
        spec.mu_grid_points,
        _tolerance(ctx),
    )
    report.extend(checks)
    report.values.update(values)
    return report


def run_bsde_negative_example(ctx: ScenarioContext) -> Report:
    report = _new_report("bsde negative-example", ctx)
    spec = _bsde_spec(ctx)
    x = ctx.processes.get(spec.process)
    result = negative_example_check(
        ctx.driver(), ctx.space, x, tuple(spec.amounts), tolerance=GRID_TOLERANCE, reflected=spec.reflected
    )
    report.add(
        "classical_witness",
        not result.inconclusive,
        result.classical_violation,
        GRID_TOLERANCE,
        {"inconclusive": True, "probes": result.probes} if result.inconclusive else result.witness,
    )
    report.add(
        "cash_flow_form_invariance",
        result.cash_flow_violation <= GRID_TOLERANCE,
        result.cash_flow_violation,
        GRID_TOLERANCE,
        result.cash_flow_witness,
    )
    report.values.update(
        {
            "classical_violation": result.classical_violation,
            "cash_flow_violation": result.cash_flow_violation,
            "inconclusive": result.inconclusive,
            "probes": result.probes,
        }
    )
    return report


COMMANDS = {
    ("decompose",): run_decompose,
    ("risk", "eval"): run_risk_eval,
    ("risk", "dual"): run_risk_dual,
    ("risk", "axioms"): run_risk_axioms,
    ("risk", "penalty"): run_risk_penalty,
    ("bsde", "solve"): run_bsde_solve,
    ("bsde", "dual"): run_bsde_dual,
    ("bsde", "negative-example"): run_bsde_negative_example,
}
