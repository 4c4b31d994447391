# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

import json
import threading
import time
import logging
# Create a logger for the cli component
logger = logging.getLogger(__name__)

from rp_toolbox.cli.config import config
from rp_toolbox.cli.report import Report
from rp_toolbox.riskcore.config import config as riskcore_config
from rp_toolbox.cli.acceptance import CRITERIA, run_criterion

# Robust evaluator threads used by the determinism rerun
RERUN_WORKERS = 4


def _serialized(checks) -> str:
    return json.dumps([check.to_dict() for check in checks], sort_keys=True, allow_nan=False)


class SuiteRunner(threading.Thread):
    """Runs the acceptance criteria one after the other in a worker thread.

    SIGINT stops the run and SIGTSTP pauses it between two criteria. Errors
    raised by a criterion are kept in ``error`` for the caller to re-raise.
    """

    def __init__(self, seed, counts, signal_flags, criteria=CRITERIA, scenario="suite"):
        super().__init__()
        self._seed = seed
        self._counts = counts
        self._signal_flags = signal_flags
        self._criteria = criteria
        self.report = Report("suite", scenario, seed, metadata={"counts": dict(counts), "criteria": len(criteria) + 1})
        self.error = None
        self.completed = False

    def run(self):
        start_time_epoch = time.time()
        control = {"signal_stop": False, "timeout_stop": False}
        first_run = {}
        try:
            for criterion in self._criteria:
                SuiteRunner._handle_signals(control, self._signal_flags)
                SuiteRunner._check_timeout(control, start_time_epoch)
                if control["signal_stop"] or control["timeout_stop"]:
                    break
                checks = run_criterion(criterion, self._seed, self._counts)
                first_run[criterion.index] = checks
                self.report.extend(checks)
            else:
                self.completed = True
                self.report.add(*self._determinism(first_run))
        except Exception as e:
            logger.error(f"Suite stopped by an error: {e}.")
            self.error = e
            return
        if self.completed:
            logger.info(f"Criteria run: {len(first_run)} - Time (secs.): {time.time() - start_time_epoch:.3f} - Suite COMPLETED.")
        elif control["signal_stop"]:
            logger.info(f"Criteria run: {len(first_run)} - Time (secs.): {time.time() - start_time_epoch:.3f} - Suite STOPPED, SIGINT received.")
            self.report.add("suite.completed", False, witness={"stopped": "SIGINT", "criteria_run": len(first_run)})
        else:
            logger.info(f"Criteria run: {len(first_run)} - Time (secs.): {time.time() - start_time_epoch:.3f} - Suite STOPPED, timeout reached.")
            self.report.add("suite.completed", False, witness={"stopped": "timeout", "criteria_run": len(first_run)})

    def _determinism(self, first_run):
        """Rerun every criterion with the same seed and compare the serialized checks.

        The rerun evaluates robust measures on RERUN_WORKERS threads, so the
        comparison also covers the sequential against the threaded path.
        """
        differing = []
        workers = riskcore_config.workers
        riskcore_config.workers = RERUN_WORKERS
        try:
            for criterion in self._criteria:
                rerun = run_criterion(criterion, self._seed, self._counts)
                if _serialized(rerun) != _serialized(first_run[criterion.index]):
                    differing.append(criterion.index)
        finally:
            riskcore_config.workers = workers
        logger.debug(f"Determinism rerun of {len(self._criteria)} criteria, differing: {differing}.")
        witness = {"differing_criteria": differing} if differing else None
        return "c12.determinism", not differing, len(differing), None, witness

    # Functions used to check termination of the suite by signals or timeout.
    # They update the control dictionary with the flags deciding whether the
    # suite should stop before the next criterion.
    @staticmethod
    def _handle_signals(control, signal_flags):
        # Handle SIGINT
        if signal_flags["stop"]:
            logger.info("SIGINT received. Stopping the acceptance suite.")
            control["signal_stop"] = True
            return
        # Handle SIGTSTP
        if signal_flags["pause"]:
            logger.info("SIGTSTP received. Pausing the acceptance suite.")
            while signal_flags["pause"] and not signal_flags["stop"]:
                time.sleep(1)
            if signal_flags["stop"]:
                logger.info("SIGINT received. Stopping the acceptance suite.")
                control["signal_stop"] = True
            else:
                logger.info("SIGTSTP received. Resuming the acceptance suite.")

    @staticmethod
    def _check_timeout(control, start_time):
        if 0 < config.timeout < (time.time() - start_time):
            control["timeout_stop"] = True


def run_suite(seed, full=False, signal_flags=None, scenario="suite") -> Report:
    """Run every criterion with the reduced (or, with ``full``, the complete) instance counts."""
    signal_flags = {"stop": False, "pause": False} if signal_flags is None else signal_flags
    counts = config.full_suite_counts if full else config.suite_counts
    runner = SuiteRunner(seed, counts, signal_flags, scenario=scenario)
    runner.report.metadata["full"] = full
    runner.start()
    runner.join()
    if runner.error is not None:
        raise runner.error
    return runner.report
