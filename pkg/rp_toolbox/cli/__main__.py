# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

import argparse
import signal
import sys
import logging
# Create a logger for the component
logger = None  # Will be initialized in main()

from rp_toolbox.utility import is_readable_file, is_writable_target
from rp_toolbox.logging_configuration import LoggingDestination, LoggingLevel, set_up_logging
from rp_toolbox.filtration.errors.filtration_errors import FiltrationError, StoppingTimeExplosionError
from rp_toolbox.decomposition.errors.decomposition_errors import DecompositionError
from rp_toolbox.riskcore.errors.riskcore_errors import RiskCoreError
from rp_toolbox.bsde.errors.bsde_errors import BsdeError, ContractionGuardError
from rp_toolbox.cli.errors.cli_errors import CheckFailureError, ScenarioError, ScenarioSchemaError
from rp_toolbox.cli.config import config
from rp_toolbox.cli.scenario import ScenarioContext, load_scenario
from rp_toolbox.cli.commands import COMMANDS
from rp_toolbox.cli.suite import run_suite


def _common_arguments() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-s", "--scenario", type=str, help="Path to the TOML scenario file.")
    common.add_argument("--seed", type=int, help="Seed overriding the scenario seed.")
    common.add_argument("-w", "--workers", type=int, default=1, help="Worker threads for the robust evaluators.")
    common.add_argument(
        "-f",
        "--format",
        type=str,
        choices=["report", "csv"],
        default="report",
        help="Report format: JSON report or one CSV row per check.",
    )
    common.add_argument("--tolerance", type=float, help="Slack of the float checks (default 1e-6).")
    common.add_argument("--steps", type=int, help="Number of Brownian steps overriding the scenario.")
    common.add_argument("-o", "--output", type=str, help="Report file (default: standard output).")
    common.add_argument(
        "-ll",
        "--log-level",
        type=str,
        choices=["debug", "info", "warnings", "errors", "critical"],
        default="info",
        help="Log verbosity level.",
    )
    common.add_argument("-lf", "--log-file", type=str, help="Path to log file.")
    return common


def parse_arguments(argv=None):
    # Argument processing
    common = _common_arguments()
    parser = argparse.ArgumentParser(
        prog="rp_toolbox",
        description="Decompositions of optional measures, risk measures for processes and their BSDE representations.",
        epilog="Example: python -m rp_toolbox.cli bsde dual --scenario=scenarios/linear_dual.toml --format=report --log-level=warnings",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("decompose", parents=[common], help="Decompose the scenario measure and verify it.")
    risk = commands.add_parser("risk", help="Risk measure checks.")
    risk_actions = risk.add_subparsers(dest="action", required=True)
    for action, text in (
        ("eval", "Evaluate rho and the capital requirement."),
        ("dual", "Compare rho with its dual representation."),
        ("axioms", "Sample the axioms, cash subadditivity and the acceptance set."),
        ("penalty", "Estimate minimal penalties and the cash additivity profile."),
    ):
        risk_actions.add_parser(action, parents=[common], help=text)
    bsde = commands.add_parser("bsde", help="BSDE and reflected BSDE checks.")
    bsde_actions = bsde.add_subparsers(dest="action", required=True)
    for action, text in (
        ("solve", "Solve and check the solution invariants."),
        ("dual", "Strong and weak duality on the grid."),
        ("negative-example", "Cash invariance of the classical and the cash-flow form."),
    ):
        bsde_actions.add_parser(action, parents=[common], help=text)
    suite = commands.add_parser("suite", parents=[common], help="Run the acceptance suite.")
    suite.add_argument("--full", action="store_true", help="Use the complete instance counts.")
    suite.add_argument(
        "-t",
        "--timeout",
        type=int,
        default=0,
        help="Seconds after which the suite stops before the next criterion (0 = no timeout).",
    )
    # Parse arguments
    return parser.parse_args(argv)


def _write_report(report, output_format, output):
    text = report.render(output_format)
    if output is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(output, "w", encoding="utf-8", newline="") as f:
            f.write(text)


def _run_suite(args):
    # Signal handling flags
    signal_flags = {"stop": False, "pause": False}

    # Signal handling functions
    def sigint_handler(signum, frame):
        signal_flags["stop"] = True

    def sigtstp_handler(signum, frame):
        signal_flags["pause"] = not signal_flags["pause"]  # Toggle pause state

    # Registering signal handlers
    signal.signal(signal.SIGINT, sigint_handler)
    if hasattr(signal, "SIGTSTP"):
        signal.signal(signal.SIGTSTP, sigtstp_handler)
    scenario = "suite"
    seed = args.seed
    if args.scenario is not None:
        loaded = load_scenario(args.scenario, args.seed)
        scenario = loaded.name
        seed = loaded.seed if seed is None else seed
    return run_suite(0 if seed is None else seed, args.full, signal_flags, scenario)


def _run_command(args):
    scenario = load_scenario(args.scenario, args.seed, args.steps)
    if args.tolerance is not None:
        scenario.checks.tolerance = args.tolerance
    key = (args.command,) if args.command == "decompose" else (args.command, args.action)
    logger.info(f"Running {' '.join(key)} on scenario {scenario.name} (seed {scenario.seed}).")
    return COMMANDS[key](ScenarioContext(scenario, config.workers))


def _configure_logging(level_name, log_file):
    level = LoggingLevel.from_flag(level_name)
    # An unusable log file falls back to the console
    to_file = log_file is not None and is_writable_target(log_file, ["log"])
    destination = LoggingDestination.FILE if to_file else LoggingDestination.CONSOLE
    set_up_logging(level, destination, log_file)
    cli_logger = logging.getLogger("rp_toolbox.cli")
    cli_logger.info(f"Log verbosity level: {level.name} - Log destination: {destination.name}.")
    if log_file is not None and not to_file:
        cli_logger.warning(f"Log file [ {log_file} ] is not writable.")
    return cli_logger


# Exit codes:
# -1: Scenario or output file error
# -2: Scenario schema error or scenario rejected by the library
# -3: Check failure
# -4: Resource guard (stopping time enumeration or contraction guard)
# -5: Unexpected error
def main(argv=None):
    global logger
    # Parse arguments
    args = parse_arguments(argv)
    logger = _configure_logging(args.log_level, args.log_file)
    # Validate the scenario and output paths
    if args.scenario is not None and not is_readable_file(args.scenario, ["toml"]):
        logger.critical("Scenario file error.")
        return -1
    if args.scenario is None and args.command != "suite":
        logger.critical("A scenario file is required (--scenario).")
        return -1
    if args.output is not None and not is_writable_target(args.output):
        logger.critical("Output file error.")
        return -1
    # Runtime configuration
    config.seed = args.seed
    config.workers = max(1, args.workers)
    config.format = args.format
    config.steps = args.steps
    if args.tolerance is not None:
        config.tolerance = args.tolerance
    config.timeout = max(0, getattr(args, "timeout", 0))
    logger.info(f"Workers: {config.workers} - Format: {config.format} - Tolerance: {config.tolerance}.")
    try:
        report = _run_suite(args) if args.command == "suite" else _run_command(args)
        _write_report(report, config.format, args.output)
        if not report.passed:
            raise CheckFailureError(report.failed_checks())
    except ScenarioError:
        logger.critical("Scenario file error.")
        return -1
    except ScenarioSchemaError:
        logger.critical("Scenario schema error.")
        return -2
    except CheckFailureError as e:
        logger.critical(f"Check failure: {', '.join(e.failed_checks)}.")
        return -3
    except (StoppingTimeExplosionError, ContractionGuardError) as e:
        logger.critical(f"Resource guard: {e}.")
        return -4
    except (FiltrationError, DecompositionError, RiskCoreError, BsdeError) as e:
        logger.critical(f"Scenario rejected: {e}.")
        return -2
    except OSError as e:
        logger.critical(f"Output file error: {e}.")
        return -1
    except Exception as e:
        logger.critical(f"Unexpected error: {e}.")
        return -5
    return 0


if __name__ == "__main__":
    sys.exit(main())
