"""Versioned JSON reports and CSV extracts."""

import csv
import json
from dataclasses import asdict, dataclass, field, is_dataclass
from pathlib import Path

import numpy as np

SCHEMA_VERSION = "1.0"


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and dataclasses to JSON types."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


@dataclass
class Check:
    name: str
    passed: bool
    values: dict
    tolerance: dict
    note: str = ""


@dataclass
class ExperimentReport:
    command: str
    config: dict
    checks: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    constants: dict | None = None
    wall_time: float = 0.0
    schema_version: str = SCHEMA_VERSION
    tables: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, name, passed, values=None, tolerance=None, note=""):
        self.checks.append(Check(name, bool(passed), values or {}, tolerance or {},
                                 note))
        return self.checks[-1]

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self):
        return to_jsonable({
            "schema_version": self.schema_version,
            "command": self.command,
            "passed": self.passed,
            "config": self.config,
            "constants": self.constants,
            "checks": [asdict(c) for c in self.checks],
            "results": self.results,
            "wall_time": self.wall_time,
        })

    def to_json(self):
        return json.dumps(self.as_dict(), indent=2, sort_keys=False)

    def write(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json() + "\n")
        return path

    def write_csv(self, directory):
        """One CSV per table; a table is a dict of equal-length columns."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for name, cols in self.tables.items():
            cols = {k: np.asarray(v) for k, v in cols.items()}
            heads = []
            for k, v in cols.items():
                heads += [k] if v.ndim == 1 else [f"{k}_{i}" for i in range(v.shape[1])]
            rows = np.column_stack([v if v.ndim > 1 else v[:, None]
                                    for v in cols.values()])
            p = directory / f"{self.command}_{name}.csv"
            with p.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(heads)
                w.writerows(rows.tolist())
            written.append(p)
        return written


def deterministic_view(report_dict):
    """The report without fields that legitimately vary between runs."""
    d = dict(report_dict)
    d.pop("wall_time", None)
    return d
