"""Evaluation counters, per-iteration run traces and their CSV form.

Trace CSV layout::

    # key=value            (one comment line per fingerprint/meta entry)
    iter,objective,gap,alpha,f_evals,grad_evals,crit_evals,prox_evals,elapsed_s
    0,...

Floats are written with 17 significant digits so that reading a file back
reproduces the trace exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

TRACE_COLUMNS = ("iter", "objective", "gap", "alpha", "f_evals", "grad_evals",
                 "crit_evals", "prox_evals", "elapsed_s")

__all__ = ["EvalCounters", "TraceRow", "RunTrace", "TRACE_COLUMNS",
           "format_float", "write_trace_csv", "read_trace_csv", "trace_to_csv"]


@dataclass
class EvalCounters:
    objective_evals: int = 0
    gradient_evals: int = 0
    criterion_evals: int = 0
    prox_evals: int = 0

    def snapshot(self):
        return EvalCounters(**asdict(self))


@dataclass(frozen=True)
class TraceRow:
    iter: int
    objective: float
    gap: float
    alpha: float
    f_evals: int
    grad_evals: int
    crit_evals: int
    prox_evals: int
    elapsed_s: float


@dataclass
class RunTrace:
    """Rows of one run plus the configuration that produced them.

    ``fingerprint`` identifies the variant (method, criterion, mode, rho, c,
    epsilon, alpha0, policy, seed); ``meta`` holds anything else worth
    keeping next to the rows (problem name, reference optimum, ...).
    """

    fingerprint: dict
    rows: list = field(default_factory=list)
    termination: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def iterations(self):
        return max(len(self.rows) - 1, 0)

    @property
    def final(self):
        return self.rows[-1] if self.rows else None

    def first_reaching(self, target):
        """First row whose gap is at most ``target``, or None."""
        for row in self.rows:
            if row.gap <= target:
                return row
        return None


def format_float(x):
    if isinstance(x, bool):
        return str(x)
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _dump_value(v):
    return json.dumps(v, sort_keys=True)


def trace_to_csv(trace: RunTrace) -> str:
    buf = io.StringIO()
    write_trace_csv(trace, buf)
    return buf.getvalue()


def write_trace_csv(trace: RunTrace, sink):
    """Write ``trace`` to the text stream ``sink``."""
    for key in sorted(trace.fingerprint):
        sink.write(f"# fingerprint.{key}={_dump_value(trace.fingerprint[key])}\n")
    for key in sorted(trace.meta):
        sink.write(f"# meta.{key}={_dump_value(trace.meta[key])}\n")
    sink.write(f"# termination={_dump_value(trace.termination)}\n")
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for row in trace.rows:
        writer.writerow([format_float(getattr(row, name)) for name in TRACE_COLUMNS])


_INT_COLUMNS = {f.name for f in fields(TraceRow) if f.type in ("int", int)}


def read_trace_csv(source) -> RunTrace:
    """Inverse of :func:`write_trace_csv`; ``source`` is a text stream."""
    fingerprint, meta, termination = {}, {}, ""
    lines = []
    for line in source:
        if line.startswith("#"):
            key, _, raw = line[1:].strip().partition("=")
            value = json.loads(raw)
            if key.startswith("fingerprint."):
                fingerprint[key[len("fingerprint."):]] = value
            elif key.startswith("meta."):
                meta[key[len("meta."):]] = value
            elif key == "termination":
                termination = value
        else:
            lines.append(line)
    reader = csv.reader(lines)
    header = next(reader, None)
    rows = []
    if header is not None:
        if tuple(header) != TRACE_COLUMNS:
            raise ValueError(f"unexpected trace header {header}")
        for rec in reader:
            if not rec:
                continue
            kw = {name: (int(raw) if name in _INT_COLUMNS else float(raw))
                  for name, raw in zip(TRACE_COLUMNS, rec)}
            rows.append(TraceRow(**kw))
    return RunTrace(fingerprint, rows, termination, meta)
