# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Machine-readable reports.

JSON reports are written with sorted keys and CSV reports with one row per
check, so identical runs give identical bytes. Rationals are serialized as
"num/den" strings and floats as JSON numbers; no wall-clock data is stored.
"""

import csv
import io
import json
import numbers
from dataclasses import dataclass, field
from enum import Enum
import logging
# Create a logger for the cli component
logger = logging.getLogger(__name__)

import numpy as np

from rp_toolbox.scalars import format_scalar, is_exact
from rp_toolbox.filtration import AdaptedProcess, LevelSlice
from rp_toolbox.cli.scenario import SCHEMA_VERSION

CSV_COLUMNS = ("check", "passed", "value", "provenance", "tolerance", "witness")


def serialize(value):
    """JSON-ready copy of ``value``; dict keys become strings."""
    if isinstance(value, np.generic):
        value = value.item()
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, numbers.Integral):
        return int(value)
    if isinstance(value, numbers.Real):
        return format_scalar(value)
    if isinstance(value, AdaptedProcess):
        return [serialize(v) for v in value.values]
    if isinstance(value, LevelSlice):
        return {str(node): serialize(v) for node, v in value.values.items()}
    if isinstance(value, dict):
        return {str(key): serialize(v) for key, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = [serialize(v) for v in value]
        return sorted(items, key=json.dumps) if isinstance(value, (set, frozenset)) else items
    return str(value)


def provenance(value) -> str | None:
    if value is None or isinstance(value, bool):
        return None
    if isinstance(value, numbers.Real):
        return "exact" if is_exact(value) else "float"
    return None


@dataclass
class Check:
    name: str
    passed: bool
    value: object = None
    # Slack used by the comparison, None when exact
    tolerance: float | None = None
    witness: dict | None = None

    def __post_init__(self):
        self.passed = bool(self.passed)
        if not self.passed and self.witness is None:
            self.witness = {"value": self.value}

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": serialize(self.value),
            "provenance": provenance(self.value),
            "tolerance": self.tolerance,
            "witness": serialize(self.witness),
        }


@dataclass
class Report:
    command: str
    scenario: str
    seed: int | None
    checks: list[Check] = field(default_factory=list)
    values: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def add(self, name, passed, value=None, tolerance=None, witness=None) -> Check:
        check = Check(name, passed, value, tolerance, witness)
        self.checks.append(check)
        if not check.passed:
            logger.warning(f"Check {name} failed: {serialize(check.witness)}.")
        return check

    def extend(self, checks):
        for check in checks:
            self.checks.append(check)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failed_checks(self) -> list[str]:
        return [check.name for check in self.checks if not check.passed]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "scenario": self.scenario,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [check.to_dict() for check in self.checks],
            "values": serialize(self.values),
            "metadata": serialize(self.metadata),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for check in self.checks:
            row = check.to_dict()
            writer.writerow(
                (
                    row["name"],
                    "true" if row["passed"] else "false",
                    json.dumps(row["value"], sort_keys=True),
                    row["provenance"] or "",
                    "" if row["tolerance"] is None else repr(row["tolerance"]),
                    "" if row["witness"] is None else json.dumps(row["witness"], sort_keys=True),
                )
            )
        return buffer.getvalue()

    def render(self, output_format="report") -> str:
        return self.to_csv() if output_format == "csv" else self.to_json()
