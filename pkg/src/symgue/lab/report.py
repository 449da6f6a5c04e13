"""Experiment reports and their JSON/CSV serialisation.

JSON layout (keys in this order)::

    experiment, status, config, rng, theory, tables, comparisons, criteria, timing

Everything except ``timing`` is a pure function of the configuration, so two
runs with the same config agree byte for byte once ``timing`` is dropped.
Floats are written with 17 significant digits; complex numbers become
``{"re": .., "im": ..}``; non-finite floats become the strings ``"nan"``,
``"inf"`` and ``"-inf"``.

Each table is also written as ``<experiment>_<table>.csv`` with the header
given by its column list.
"""
from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

PROVENANCE = ("paper-printed", "derived-closed-form", "derived-oracle")


def fmt_float(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, table has {len(self.columns)} columns")
        self.rows.append(list(values))


@dataclass
class Criterion:
    """Outcome of one named check.

    ``passed`` is None when the check could not be decided (inconclusive).
    Rows with ``asserted=False`` are comparisons and never affect the status.
    """

    name: str
    passed: object
    asserted: bool = True
    detail: dict = field(default_factory=dict)


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    rng: dict = field(default_factory=dict)
    theory: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    comparisons: list = field(default_factory=list)
    criteria: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    def add_theory(self, name, value, provenance, **context):
        if provenance not in PROVENANCE:
            raise ValueError(f"unknown provenance {provenance!r}")
        self.theory.append(dict(name=name, value=value, provenance=provenance, **context))

    def compare(self, name, estimate, stderr, theory, provenance, **context):
        """Record ``|delta|``, ``delta/stderr`` and relative delta of an estimate."""
        delta = complex(estimate) - complex(theory)
        se = float(abs(stderr)) if stderr is not None else float("nan")
        row = dict(name=name, estimate=estimate, stderr=stderr, theory=theory,
                   provenance=provenance, abs_delta=abs(delta),
                   z_score=abs(delta) / se if se > 0 else float("nan"),
                   rel_delta=abs(delta) / abs(theory) if theory != 0 else float("nan"))
        row.update(context)
        self.comparisons.append(row)
        return row

    def check(self, name, passed, asserted=True, **detail) -> Criterion:
        c = Criterion(name, None if passed is None else bool(passed), asserted, detail)
        self.criteria.append(c)
        return c

    def table(self, name, columns) -> Table:
        t = self.tables.get(name)
        if t is None:
            t = self.tables[name] = Table(list(columns))
        return t

    @property
    def status(self) -> str:
        asserted = [c for c in self.criteria if c.asserted]
        if any(c.passed is False for c in asserted):
            return "fail"
        if any(c.passed is None for c in asserted):
            return "inconclusive"
        return "pass"

    @property
    def exit_code(self) -> int:
        return {"pass": 0, "inconclusive": 2, "fail": 1}[self.status]

    def failures(self):
        return [c.name for c in self.criteria if c.asserted and c.passed is False]

    def to_dict(self, include_timing=True) -> dict:
        out = {
            "experiment": self.experiment,
            "status": self.status,
            "config": self.config,
            "rng": self.rng,
            "theory": self.theory,
            "tables": {k: {"columns": t.columns, "rows": t.rows} for k, t in self.tables.items()},
            "comparisons": self.comparisons,
            "criteria": [{"name": c.name, "asserted": c.asserted, "passed": c.passed,
                          "detail": c.detail} for c in self.criteria],
        }
        if include_timing:
            out["timing"] = self.timing
        return out

    def to_json(self, include_timing=True) -> str:
        return dumps(self.to_dict(include_timing)) + "\n"


def _encode(obj, indent, level, out):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        out.append("null" if obj is None else ("true" if obj else "false"))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        s = fmt_float(obj)
        out.append(s if math.isfinite(float(obj)) else f'"{s}"')
    elif isinstance(obj, (complex, np.complexfloating)):
        _encode({"re": obj.real, "im": obj.imag}, indent, level, out)
    elif isinstance(obj, str):
        out.append(_json_str(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.append(f"{pad}{_json_str(str(k))}: ")
            _encode(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            parts = []
            for v in seq:
                buf = []
                _encode(v, indent, level + 1, buf)
                parts.append("".join(buf).replace("\n", " "))
            out.append("[" + ", ".join(parts) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(seq):
            out.append(pad)
            _encode(v, indent, level + 1, out)
            out.append(",\n" if i < len(seq) - 1 else "\n")
        out.append(end + "]")
    elif hasattr(obj, "value") and isinstance(obj.value, str):  # enums
        out.append(_json_str(obj.value))
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def _json_str(s):
    import json
    return json.dumps(s, ensure_ascii=False)


def dumps(obj, indent=2) -> str:
    out = []
    _encode(obj, indent, 0, out)
    return "".join(out)


def _csv_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if isinstance(v, (complex, np.complexfloating)):
        from .config import format_complex
        return format_complex(v)
    if v is None:
        return ""
    if hasattr(v, "value") and isinstance(v.value, str):
        return v.value
    return str(v)


def table_csv(table: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def emit(report: ExperimentReport, output_dir, formats=("json", "csv")) -> list:
    """Write the report; returns the paths written."""
    unknown = set(formats) - {"json", "csv"}
    if unknown:
        raise ValueError(f"unknown formats {sorted(unknown)}")
    os.makedirs(output_dir, exist_ok=True)
    written = []
    if "json" in formats:
        path = os.path.join(output_dir, f"{report.experiment}.json")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report.to_json())
        written.append(path)
    if "csv" in formats:
        for name, t in report.tables.items():
            path = os.path.join(output_dir, f"{report.experiment}_{name}.csv")
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(table_csv(t))
            written.append(path)
    return written
