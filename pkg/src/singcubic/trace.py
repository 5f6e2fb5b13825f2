"""Per-iteration traces, work accounting and the CSV trace format."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field

CSV_COLUMNS = (
    "iter",
    "effective_epochs",
    "objective",
    "grad_norm",
    "sigma",
    "rho",
    "accepted",
    "wall_time_s",
)


class DivergenceError(RuntimeError):
    """Raised when an optimizer produces a non-finite objective or iterate.

    The partial trace up to the failure is kept on ``.trace``.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


@dataclass
class IterationRecord:
    iter: int
    grad_epochs: float
    hess_epochs: float
    objective: float
    grad_norm: float
    sigma: float | None
    rho: float | None
    accepted: bool
    wall_time: float

    @property
    def effective_epochs(self):
        return self.grad_epochs + self.hess_epochs


@dataclass
class IterationTrace:
    algorithm: str = ""
    records: list = field(default_factory=list)

    def append(self, record):
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def column(self, name):
        return [getattr(r, name) for r in self.records]


class WorkCounter:
    """Counts component gradient and Hessian evaluations.

    One component gradient (or Hessian) evaluation costs 1/n of an
    effective epoch; the two kinds are tracked separately.
    """

    def __init__(self, n):
        self.n = n
        self.grads = 0
        self.hessians = 0
        self._t0 = time.perf_counter()

    def charge(self, grads=0, hessians=0):
        self.grads += int(grads)
        self.hessians += int(hessians)

    @property
    def grad_epochs(self):
        return self.grads / self.n

    @property
    def hess_epochs(self):
        return self.hessians / self.n

    @property
    def epochs(self):
        return (self.grads + self.hessians) / self.n

    def elapsed(self):
        return time.perf_counter() - self._t0

    def record(self, k, objective, grad_norm, sigma, rho, accepted):
        return IterationRecord(
            iter=k,
            grad_epochs=self.grad_epochs,
            hess_epochs=self.hess_epochs,
            objective=float(objective),
            grad_norm=float(grad_norm),
            sigma=None if sigma is None else float(sigma),
            rho=None if rho is None else float(rho),
            accepted=bool(accepted),
            wall_time=self.elapsed(),
        )


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return format(float(x), ".17g")


def emit_csv(trace, include_time=False):
    """Render a trace as CSV text (LF line endings, 17 significant digits).

    Fields that do not apply (``rho`` for first-order methods, ``sigma`` for
    methods without an adaptive parameter) are left empty. Wall-clock times
    differ between runs, so they are written only when ``include_time`` is
    set; otherwise the column is empty and the output is reproducible.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in trace:
        writer.writerow(
            (
                r.iter,
                _fmt(r.effective_epochs),
                _fmt(r.objective),
                _fmt(r.grad_norm),
                _fmt(r.sigma),
                _fmt(r.rho),
                1 if r.accepted else 0,
                _fmt(r.wall_time) if include_time else "",
            )
        )
    return buf.getvalue()


def write_csv(trace, path, include_time=False):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(emit_csv(trace, include_time=include_time))


class TraceSchemaError(ValueError):
    pass


def read_csv(path):
    """Read a trace CSV into a dict of column lists (floats, None if empty)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceSchemaError(f"{path}: empty file") from None
        if tuple(header) != CSV_COLUMNS:
            missing = [c for c in CSV_COLUMNS if c not in header]
            detail = f"missing columns {missing}" if missing else f"unexpected header {header}"
            raise TraceSchemaError(f"{path}: {detail}")
        cols = {c: [] for c in CSV_COLUMNS}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(CSV_COLUMNS):
                raise TraceSchemaError(f"{path}:{lineno}: expected {len(CSV_COLUMNS)} fields, got {len(row)}")
            for c, v in zip(CSV_COLUMNS, row):
                cols[c].append(float(v) if v != "" else None)
    return cols
