"""Verification records and their JSON / CSV / text renderings.

Output is deterministic: floats are written with 17 significant digits,
keys keep insertion order and no timestamps are recorded.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import pauli_decompose

SCHEMA_VERSION = "1.0"


@dataclass
class CheckRecord:
    check_id: str
    label: str
    residual: float
    tolerance: float
    passed: bool | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.residual = float(self.residual)
        self.tolerance = float(self.tolerance)
        if self.passed is None:
            self.passed = bool(self.residual <= self.tolerance)


@dataclass
class CoefficientRow:
    alpha: int
    beta: int
    component: str
    sector: str
    block: np.ndarray           # 2x2 mode block
    error_estimate: float
    oracle_relative: float | None = None


@dataclass
class VerificationReport:
    command: str
    records: list[CheckRecord] = field(default_factory=list)
    coefficients: list[CoefficientRow] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def add(self, check_id: str, label: str, residual: float, tolerance: float, **extra) -> CheckRecord:
        rec = CheckRecord(check_id, label, residual, tolerance, extra=extra)
        self.records.append(rec)
        return rec


# --- JSON ----------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with floats as ``%.17g``."""
    obj = _plain(obj)
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def pauli_dict(block) -> dict:
    c = pauli_decompose(block)
    return {name: complex(v) for name, v in zip(("1", "sigma1", "sigma2", "sigma3"), c)}


def report_dict(report: VerificationReport) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": report.command,
        "status": report.status,
        "records": [
            {"check_id": r.check_id, "label": r.label, "residual": r.residual,
             "tolerance": r.tolerance, "passed": r.passed, **({"extra": r.extra} if r.extra else {})}
            for r in report.records
        ],
        "coefficients": [
            {"alpha": c.alpha, "beta": c.beta, "component": c.component, "sector": c.sector,
             "pauli": pauli_dict(c.block), "error_estimate": c.error_estimate,
             **({"oracle_relative": c.oracle_relative} if c.oracle_relative is not None else {})}
            for c in report.coefficients
        ],
        "notes": list(report.notes),
        "provenance": report.provenance,
    }


def to_json(report: VerificationReport) -> str:
    return dumps(report_dict(report)) + "\n"


# --- CSV -------------------------------------------------------------------------

def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt_float(v).strip('"') if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def checks_csv(report: VerificationReport) -> str:
    rows = [(r.check_id, r.label, r.residual, r.tolerance, "pass" if r.passed else "fail")
            for r in report.records]
    return _csv_text(["check_id", "label", "residual", "tolerance", "status"], rows)


def coefficients_csv(report: VerificationReport) -> str:
    header = ["alpha", "beta", "component", "sector"]
    for n in ("1", "sigma1", "sigma2", "sigma3"):
        header += [f"{n}_re", f"{n}_im"]
    header += ["error_estimate", "oracle_relative"]
    rows = []
    for c in report.coefficients:
        row = [c.alpha, c.beta, c.component, c.sector]
        for v in pauli_decompose(c.block):
            row += [float(v.real), float(v.imag)]
        row += [float(c.error_estimate), "" if c.oracle_relative is None else float(c.oracle_relative)]
        rows.append(row)
    return _csv_text(header, rows)


# --- text --------------------------------------------------------------------------

def _cfmt(z: complex) -> str:
    z = complex(z)
    return f"{z.real:+.10e}{z.imag:+.10e}i"


def to_text(report: VerificationReport) -> str:
    lines = [f"command: {report.command}", f"status:  {report.status.upper()}", ""]
    width = max((len(r.check_id) + len(r.label) for r in report.records), default=10) + 3
    for r in report.records:
        tag = "PASS" if r.passed else "FAIL"
        name = f"{r.check_id} [{r.label}]"
        lines.append(f"{tag}  {name:<{width}} residual={r.residual:.3e}  tol={r.tolerance:.1e}")
    if report.coefficients:
        lines += ["", "coefficients (mode block = sum c_i sigma_i):"]
        for c in report.coefficients:
            p = pauli_decompose(c.block)
            head = f"  ({c.alpha},{c.beta}) {c.component:<5} {c.sector:<4}"
            tail = f"  err={c.error_estimate:.1e}"
            if c.oracle_relative is not None:
                tail += f"  oracle_rel={c.oracle_relative:.1e}"
            lines.append(head + tail)
            for name, v in zip(("1 ", "s1", "s2", "s3"), p):
                lines.append(f"      {name}: {_cfmt(v)}")
    if report.notes:
        lines += ["", "notes:"] + [f"  - {n}" for n in report.notes]
    return "\n".join(lines) + "\n"


# --- writing -----------------------------------------------------------------------

def emit(report: VerificationReport, fmt: str, path: str | Path | None = None) -> str:
    """Render and optionally write the report; returns the main rendering.

    For ``csv`` with a path the coefficient table goes to
    ``<stem>_coefficients.csv`` next to the checks table.
    """
    if fmt == "json":
        text = to_json(report)
    elif fmt == "csv":
        text = checks_csv(report)
    elif fmt == "text":
        text = to_text(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        path = Path(path)
        path.write_text(text)
        if fmt == "csv":
            path.with_name(f"{path.stem}_coefficients.csv").write_text(coefficients_csv(report))
    return text
