"""Experiment reports: a reproducible body plus an environment fingerprint.

The body (resolved config, checks, table index) depends only on the config
and the build, so re-running a config rewrites it byte for byte.  Machine
details live in a separate ``environment`` block.
"""

from __future__ import annotations

import csv
import json
import math
import platform
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .. import __version__
from ..algorithms import GENERATOR_ID


@dataclass
class Table:
    """Long-format table: one row per measurement."""

    columns: tuple
    rows: list = field(default_factory=list)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, table has {len(self.columns)} columns")
        self.rows.append(values)


# CSV schema of the plot table emitted for each kind
PLOT_SCHEMAS = {
    "nfl_sum_sweep": ("algorithm", "m", "phi_measure", "sum"),
    "inner_product": ("algorithm", "prior", "phi", "direct", "inner_product", "deviation"),
    "prior_mc": ("algorithm", "sample_index", "e_pi_phi"),
    "supervised_nfl": ("learner", "d", "e_phi_given_d"),
    "cv_vs_anticv": ("learner", "d", "e_phi_given_d"),
    "conditioning_contrast": ("learner", "f_rank", "e_phi_prime_given_f", "e_phi_given_f"),
    "meta_induction": ("universe", "learner", "ots_accuracy", "consistent"),
    "mco_benchmark": ("scheme", "seed", "step", "best_so_far"),
}


@dataclass
class ExperimentReport:
    kind: str
    config: dict
    checks: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    arithmetic: str = "rational"

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def add_check(self, name: str, passed: bool, **details) -> dict:
        entry = {"name": name, "pass": bool(passed), **details}
        self.checks.append(entry)
        return entry

    def body(self) -> dict:
        return {
            "experiment": self.kind,
            "config": self.config,
            "pass": self.passed,
            "checks": self.checks,
            "summary": self.summary,
            "tables": {name: list(t.columns) for name, t in sorted(self.tables.items())},
        }

    def environment(self) -> dict:
        return {
            "generator": GENERATOR_ID,
            "arithmetic": self.arithmetic,
            "nfl_lab": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        }


def to_jsonable(value):
    """Recursively convert Fractions, numpy scalars and tuples for JSON."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else value.numerator
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else str(v)
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    return value


def dumps(data) -> str:
    return json.dumps(to_jsonable(data), sort_keys=True, indent=2) + "\n"


def _cell(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(to_jsonable(v), sort_keys=True, separators=(",", ":"))
    return str(v)


def write_csv(table: Table, path: Path) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_cell(v) for v in row])
    return path


def emit_plot_data(report: ExperimentReport, kind: str, path) -> Path:
    """Write the long-format plot table of ``report`` to ``path``."""
    table = report.tables.get("plot")
    if table is None:
        raise ValueError(f"report has no plot table for {kind}")
    if tuple(table.columns) != PLOT_SCHEMAS[kind]:
        raise ValueError(f"plot table columns {table.columns} do not match the {kind} schema")
    return write_csv(table, Path(path))


def write_report(report: ExperimentReport, out_dir, name: str) -> dict:
    """Write ``<name>.json`` and one ``<name>.<table>.csv`` per table; return the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for tname, table in sorted(report.tables.items()):
        if tname == "plot":
            paths[tname] = emit_plot_data(report, report.kind, out / f"{name}.plot.csv")
        else:
            paths[tname] = write_csv(table, out / f"{name}.{tname}.csv")
    doc = {"body": report.body(), "environment": report.environment()}
    paths["report"] = out / f"{name}.json"
    paths["report"].write_text(dumps(doc))
    return paths
