# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

import itertools
import json
import signal
from pathlib import Path

import pytest

from rp_toolbox.cli.__main__ import main
from rp_toolbox.cli.config import config
from rp_toolbox.cli.errors.cli_errors import ScenarioSchemaError
from rp_toolbox.cli.acceptance import Criterion
from rp_toolbox.cli.report import CSV_COLUMNS, Check
from rp_toolbox.cli.scenario import parse_scenario
from rp_toolbox.cli.suite import RERUN_WORKERS, SuiteRunner, run_suite
from rp_toolbox.riskcore.config import config as riskcore_config

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def _scenario(name) -> str:
    return str(SCENARIOS / f"{name}.toml")


def _run(command, scenario, tmp_path, *extra, output="report.json"):
    target = tmp_path / output
    code = main([*command, "--scenario", scenario, "--output", str(target), "--log-level", "errors", *extra])
    return code, target


def _write(tmp_path, text, name="scenario.toml") -> str:
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_schema_version_is_required():
    with pytest.raises(ScenarioSchemaError):
        parse_scenario({"name": "no-version"})
    with pytest.raises(ScenarioSchemaError):
        parse_scenario({"schema_version": 2})


def test_unknown_keys_are_rejected():
    with pytest.raises(ScenarioSchemaError):
        parse_scenario({"schema_version": 1, "tree": {"kind": "branching", "width": 3}})


def test_randomized_scenario_needs_a_seed():
    raw = {"schema_version": 1, "tree": {"kind": "random", "depth": 3}, "measure": {"kind": "random"}}
    with pytest.raises(ScenarioSchemaError):
        parse_scenario(raw)
    assert parse_scenario(raw, seed=4).seed == 4


def test_process_references_must_resolve():
    with pytest.raises(ScenarioSchemaError):
        parse_scenario({"schema_version": 1, "risk": {"process": "missing"}})


def test_steps_override_reaches_the_tree():
    scenario = parse_scenario({"schema_version": 1, "tree": {"kind": "brownian", "steps": 10}}, steps=4)
    assert scenario.tree.steps == 4


def test_decompose_deterministic_report(tmp_path):
    code, target = _run(["decompose"], _scenario("decompose_deterministic"), tmp_path)
    assert code == 0
    report = json.loads(target.read_text(encoding="utf-8"))
    assert report["schema_version"] == 1
    assert report["command"] == "decompose"
    assert report["passed"] is True
    optional = report["values"]["optional"]
    assert optional["L"] == ["1/1"] * 7
    assert optional["D"] == ["3/4", "1/2", "1/2", "0/1", "0/1", "0/1", "0/1"]
    assert optional["tau"] == [3, 4, 5, 6]
    names = {check["name"] for check in report["checks"]}
    assert {"optional.round_trip", "predictable.round_trip", "coincidence"} <= names
    assert all(check["provenance"] is None for check in report["checks"] if check["value"] is None)


def test_reports_are_byte_identical_across_runs(tmp_path):
    first_code, first = _run(["decompose"], _scenario("decompose_random"), tmp_path, output="first.json")
    second_code, second = _run(["decompose"], _scenario("decompose_random"), tmp_path, output="second.json")
    assert first_code == second_code == 0
    assert first.read_bytes() == second.read_bytes()


def test_risk_dual_report_does_not_depend_on_workers(tmp_path):
    outputs = []
    for run, workers in enumerate(("1", "4", "4")):
        code, target = _run(["risk", "dual"], _scenario("risk_robust"), tmp_path, "--workers", workers, output=f"dual_{run}.json")
        assert code == 0
        outputs.append(target.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]


def test_seed_flag_overrides_the_scenario(tmp_path):
    code, target = _run(["decompose"], _scenario("decompose_random"), tmp_path, "--seed", "99")
    assert code == 0
    assert json.loads(target.read_text(encoding="utf-8"))["seed"] == 99


def test_csv_report_has_one_row_per_check(tmp_path):
    code, target = _run(["risk", "eval"], _scenario("risk_worst_case"), tmp_path, "--format", "csv", output="report.csv")
    assert code == 0
    lines = target.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1].startswith("capital_requirement,true,")


@pytest.mark.parametrize(
    "command, scenario",
    [
        (["decompose"], "decompose_predictable"),
        (["risk", "axioms"], "risk_worst_case"),
        (["risk", "dual"], "risk_robust"),
        (["risk", "eval"], "risk_discounted"),
        (["bsde", "solve"], "bsde_linear_dual"),
        (["bsde", "dual"], "bsde_linear_dual"),
        (["bsde", "negative-example"], "bsde_negative_example"),
    ],
)
def test_shipped_scenarios_pass(command, scenario, tmp_path):
    code, target = _run(command, _scenario(scenario), tmp_path)
    assert code == 0
    assert json.loads(target.read_text(encoding="utf-8"))["passed"] is True


def test_missing_or_misnamed_scenario_file(tmp_path):
    assert _run(["decompose"], str(tmp_path / "absent.toml"), tmp_path)[0] == -1
    wrong_suffix = _write(tmp_path, "schema_version = 1\n", name="scenario.txt")
    assert _run(["decompose"], wrong_suffix, tmp_path)[0] == -1


def test_invalid_toml_is_a_file_error(tmp_path):
    assert _run(["decompose"], _write(tmp_path, "schema_version = = 1\n"), tmp_path)[0] == -1


def test_schema_error_exit_code(tmp_path):
    assert _run(["decompose"], _write(tmp_path, "schema_version = 2\n"), tmp_path)[0] == -2


def test_rejected_scenario_exit_code(tmp_path):
    text = 'schema_version = 1\n[measure]\nkind = "level_values"\nvalues = ["1/2", "1", "2"]\n'
    assert _run(["decompose"], _write(tmp_path, text), tmp_path)[0] == -2


def test_check_failure_still_writes_the_report(tmp_path):
    text = (
        "schema_version = 1\n"
        '[tree]\nkind = "brownian"\nsteps = 4\nlattice = true\n'
        '[processes.x]\nkind = "hump"\n'
        '[driver]\nfamily = "zero"\n'
        '[bsde]\nprocess = "x"\nreflected = true\n'
    )
    code, target = _run(["bsde", "negative-example"], _write(tmp_path, text), tmp_path)
    assert code == -3
    report = json.loads(target.read_text(encoding="utf-8"))
    assert report["passed"] is False
    failed = [check for check in report["checks"] if not check["passed"]]
    assert [check["name"] for check in failed] == ["classical_witness"]
    assert failed[0]["witness"]["inconclusive"] is True


def test_contraction_guard_exit_code(tmp_path):
    text = (
        "schema_version = 1\n"
        '[tree]\nkind = "brownian"\nsteps = 1\nlattice = true\n'
        '[processes.x]\nkind = "terminal_payoff"\n'
        '[driver]\nfamily = "linear"\nbeta = 1.0\n'
    )
    assert _run(["bsde", "solve"], _write(tmp_path, text), tmp_path)[0] == -4


def test_subcommand_is_required():
    with pytest.raises(SystemExit):
        main([])


@pytest.fixture
def small_counts(monkeypatch):
    monkeypatch.setattr(config, "suite_counts", {key: 2 for key in config.suite_counts})


def test_suite_with_small_counts(small_counts):
    report = run_suite(5)
    names = [check.name for check in report.checks]
    assert report.passed, report.failed_checks()
    assert "c01.decomposition.round_trip" in names
    assert "c08.strong_duality.strong_duality" in names
    assert names[-1] == "c12.determinism"
    assert report.metadata["full"] is False


def test_suite_reports_are_byte_identical(small_counts):
    first = run_suite(5)
    second = run_suite(5)
    assert first.to_json() == second.to_json()
    determinism = first.checks[-1]
    assert determinism.name == "c12.determinism"
    assert determinism.passed
    assert determinism.value == 0


def test_determinism_reruns_every_criterion():
    calls = itertools.count()
    workers_seen = []

    def drifting(rng, count):
        workers_seen.append(riskcore_config.workers)
        return [Check("drift", True, next(calls))]

    criteria = (
        Criterion(1, "stable", lambda rng, count: [Check("stable", True, 1)]),
        Criterion(2, "drifting", drifting),
    )
    runner = SuiteRunner(0, {}, {"stop": False, "pause": False}, criteria=criteria)
    runner.run()
    assert runner.completed
    determinism = runner.report.checks[-1]
    assert not determinism.passed
    assert determinism.witness == {"differing_criteria": [2]}
    assert workers_seen == [1, RERUN_WORKERS]
    assert riskcore_config.workers == 1


def test_suite_command_writes_a_report(small_counts, monkeypatch, tmp_path):
    monkeypatch.setattr(signal, "signal", lambda *args: None)
    target = tmp_path / "suite.json"
    assert main(["suite", "--seed", "2", "--output", str(target), "--log-level", "errors"]) == 0
    report = json.loads(target.read_text(encoding="utf-8"))
    assert report["command"] == "suite"
    assert report["seed"] == 2


def test_stopped_suite_is_not_a_pass():
    runner = SuiteRunner(0, config.suite_counts, {"stop": True, "pause": False})
    runner.run()
    assert not runner.completed
    assert runner.report.failed_checks() == ["suite.completed"]


@pytest.mark.slow
def test_full_suite():
    assert run_suite(0, full=True).passed
