"""CSV ingestion and report serialisation.

Two input layouts are understood, both comma separated UTF-8 with a header
row. Lines starting with ``#`` are comments.

* summary: ``label,n,mean,sd`` where ``sd`` is the standard error of the
  group mean (sample sd divided by sqrt(n)), not the raw sd;
* raw: ``label,value`` with one observation per row; group means and
  standard errors are computed here.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .errors import ParseError
from .winner import Observations

__all__ = [
    "SCHEMA_VERSION",
    "GroupSummaryRow",
    "AnalysisReport",
    "ingest_summary",
    "ingest_raw",
    "ingest",
    "read_rows",
    "write_summary",
    "fingerprint",
    "to_plain",
    "format_text",
    "format_csv",
]

SCHEMA_VERSION = 1
SUMMARY_COLUMNS = ("label", "n", "mean", "sd")
RAW_COLUMNS = ("label", "value")


@dataclass(frozen=True)
class GroupSummaryRow:
    label: str
    n: int
    mean: float
    sd: float


def _records(text):
    """(line number, fields) for each non-comment, non-blank line."""
    lines = text.splitlines()
    for lineno, fields in zip(range(1, len(lines) + 1), csv.reader(lines)):
        if not fields or not "".join(fields).strip():
            continue
        if fields[0].lstrip().startswith("#"):
            continue
        yield lineno, [f.strip() for f in fields]


def _read(path):
    data = Path(path).read_bytes()
    try:
        return data, data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not valid UTF-8") from exc


def _header(records, required, path):
    try:
        lineno, header = next(records)
    except StopIteration:
        raise ParseError(f"{path}: empty file, no data rows") from None
    header = [h.lower() for h in header]
    missing = [c for c in required if c not in header]
    if missing:
        raise ParseError(f"missing column(s) {', '.join(missing)}", lineno)
    return {c: header.index(c) for c in required}


def _number(value, column, lineno):
    try:
        x = float(value)
    except ValueError:
        raise ParseError(f"column {column!r}: not a number: {value!r}", lineno) from None
    if not math.isfinite(x):
        raise ParseError(f"column {column!r}: not finite: {value!r}", lineno)
    return x


def _field(fields, cols, name, lineno):
    i = cols[name]
    if i >= len(fields):
        raise ParseError(f"missing value for column {name!r}", lineno)
    return fields[i]


def read_rows(path) -> list:
    """Parse a summary CSV into :class:`GroupSummaryRow` records."""
    _, text = _read(path)
    records = _records(text)
    cols = _header(records, SUMMARY_COLUMNS, path)
    rows, seen = [], set()
    for lineno, fields in records:
        label = _field(fields, cols, "label", lineno)
        if not label:
            raise ParseError("empty label", lineno)
        if label in seen:
            raise ParseError(f"duplicate label {label!r}", lineno)
        seen.add(label)
        n_raw = _field(fields, cols, "n", lineno)
        try:
            n = int(n_raw)
        except ValueError:
            raise ParseError(f"column 'n': not an integer: {n_raw!r}", lineno) from None
        if n < 1:
            raise ParseError(f"column 'n' must be positive, got {n}", lineno)
        mean = _number(_field(fields, cols, "mean", lineno), "mean", lineno)
        sd = _number(_field(fields, cols, "sd", lineno), "sd", lineno)
        if sd <= 0:
            raise ParseError(f"column 'sd' must be positive, got {sd}", lineno)
        rows.append(GroupSummaryRow(label, n, mean, sd))
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return rows


def _observations(rows):
    return Observations(
        [r.mean for r in rows], [r.sd for r in rows],
        tuple(r.label for r in rows), tuple(r.n for r in rows),
    )


def ingest_summary(path) -> Observations:
    """Observations from a ``label,n,mean,sd`` file (sd = standard error)."""
    return _observations(read_rows(path))


def ingest_raw(path) -> Observations:
    """Per-label means and standard errors from a ``label,value`` file.

    Groups are ordered by label, and sums are exactly rounded, so the result
    does not depend on row order.

    Raises:
        ParseError: on malformed rows.
        ValueError: for a group with fewer than 2 values or zero spread.
    """
    _, text = _read(path)
    records = _records(text)
    cols = _header(records, RAW_COLUMNS, path)
    groups: dict = {}
    for lineno, fields in records:
        label = _field(fields, cols, "label", lineno)
        if not label:
            raise ParseError("empty label", lineno)
        groups.setdefault(label, []).append(
            _number(_field(fields, cols, "value", lineno), "value", lineno))
    if not groups:
        raise ParseError(f"{path}: no data rows")
    rows = []
    for label in sorted(groups):
        vals = groups[label]
        n = len(vals)
        if n < 2:
            raise ValueError(f"group {label!r} has {n} value(s); at least 2 are needed")
        mean = math.fsum(vals) / n
        var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1)
        if var <= 0:
            raise ValueError(f"group {label!r} has zero standard deviation")
        rows.append(GroupSummaryRow(label, n, mean, math.sqrt(var / n)))
    return _observations(rows)


def ingest(path) -> Observations:
    """Dispatch on the header: raw layout if it has a ``value`` column."""
    _, text = _read(path)
    try:
        _, header = next(_records(text))
    except StopIteration:
        raise ParseError(f"{path}: empty file, no data rows") from None
    if "value" in [h.lower() for h in header]:
        return ingest_raw(path)
    return ingest_summary(path)


def summary_rows(obs: Observations) -> list:
    ns = obs.ns or (None,) * obs.d
    return [GroupSummaryRow(lab, n, float(m), float(s))
            for lab, n, m, s in zip(obs.labels, ns, obs.values, obs.sds)]


def write_summary(obs: Observations, path=None) -> str:
    """Render observations in the summary layout; also write to ``path`` if given."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for r in summary_rows(obs):
        w.writerow([r.label, "" if r.n is None else r.n, repr(r.mean), repr(r.sd)])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def fingerprint(path) -> dict:
    data, text = _read(path)
    return {
        "path": str(path),
        "sha256": hashlib.sha256(data).hexdigest(),
        "rows": sum(1 for _ in _records(text)) - 1,
    }


def to_plain(obj):
    """Recursively convert dataclasses, tuples and numpy scalars to JSON types."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


@dataclass
class AnalysisReport:
    """Versioned record of one analysis, sufficient to recompute every number."""

    operation: str
    results: Any
    alpha: Optional[float] = None
    seed: Optional[int] = None
    input: Optional[dict] = None
    parameters: dict = field(default_factory=dict)
    tool_version: str = ""
    schema: int = SCHEMA_VERSION

    def __post_init__(self):
        if not self.tool_version:
            from . import __version__
            self.tool_version = __version__
        self.results = to_plain(self.results)
        self.parameters = to_plain(self.parameters)
        self.input = to_plain(self.input)

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "tool_version": self.tool_version,
            "operation": self.operation,
            "alpha": self.alpha,
            "seed": self.seed,
            "input": self.input,
            "parameters": self.parameters,
            "results": self.results,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        data = json.loads(text)
        if data.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {data.get('schema')!r}")
        return cls(
            operation=data["operation"],
            results=data["results"],
            alpha=data.get("alpha"),
            seed=data.get("seed"),
            input=data.get("input"),
            parameters=data.get("parameters") or {},
            tool_version=data["tool_version"],
            schema=data["schema"],
        )


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".12g")
    if value is None:
        return ""
    return str(value)


def _flatten(prefix, obj, out):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, out)
    elif isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, out)
    elif isinstance(obj, list):
        out.append((prefix, ", ".join(_fmt(v) for v in obj)))
    else:
        out.append((prefix, _fmt(obj)))


def format_text(report: AnalysisReport) -> str:
    """``key: value`` lines, floats at 12 significant digits."""
    pairs = []
    _flatten("", report.to_dict(), pairs)
    return "".join(f"{k}: {v}\n" for k, v in pairs)


def format_csv(header, rows) -> str:
    """Long-form CSV; floats use ``repr`` so output is bit-exact."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()
