# numerics\report.py
"""
Per-sample diagnostics records collected during a run.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .errors import PreconditionError

logger = logging.getLogger(__name__)


@dataclass
class SampleRecord:
    """Metrics measured at one sampled time."""
    time: float
    step_index: int
    metrics: Dict[str, float] = field(default_factory=dict)


@dataclass
class Flag:
    """An invariant violation noticed while sampling."""
    name: str
    time: float
    detail: str = ""


class DiagnosticsReport:
    """
    Ordered collection of sample records plus invariant flags.

    Sample times are strictly increasing. Observers write metrics into the record
    of the current sample through ``put``.
    """

    def __init__(self):
        self.records: List[SampleRecord] = []
        self.flags: List[Flag] = []
        self.summary: Dict[str, Any] = {}

    def __len__(self):
        return len(self.records)

    def is_empty(self) -> bool:
        return not self.records and not self.flags

    def open_record(self, time: float, step_index: int) -> SampleRecord:
        """Start the record for a new sample time."""
        if self.records and not time > self.records[-1].time:
            raise PreconditionError(
                f"sample times must increase: {time} after {self.records[-1].time}")
        record = SampleRecord(float(time), int(step_index))
        self.records.append(record)
        return record

    @property
    def current(self) -> SampleRecord:
        if not self.records:
            raise PreconditionError("no sample record is open")
        return self.records[-1]

    def put(self, name: str, value: float):
        self.current.metrics[name] = float(value)

    def flag(self, name: str, time: float, detail: str = ""):
        logger.warning(f"Invariant flag '{name}' at t={time:.6g}: {detail}")
        self.flags.append(Flag(name, float(time), detail))

    def has_flag(self, name: Optional[str] = None) -> bool:
        return any(name is None or f.name == name for f in self.flags)

    def times(self) -> np.ndarray:
        return np.array([r.time for r in self.records])

    def metric_names(self) -> List[str]:
        names: List[str] = []
        for record in self.records:
            for name in record.metrics:
                if name not in names:
                    names.append(name)
        return names

    def column(self, name: str) -> Tuple[np.ndarray, np.ndarray]:
        """(times, values) of the samples that carry the metric."""
        rows = [(r.time, r.metrics[name]) for r in self.records if name in r.metrics]
        if not rows:
            return np.array([]), np.array([])
        times, values = zip(*rows)
        return np.array(times), np.array(values)

    def last(self, name: str, default: float = math.nan) -> float:
        for record in reversed(self.records):
            if name in record.metrics:
                return record.metrics[name]
        return default

    def value_at(self, name: str, time: float, default: float = math.nan) -> float:
        for record in self.records:
            if math.isclose(record.time, time, rel_tol=1e-12, abs_tol=1e-15) and name in record.metrics:
                return record.metrics[name]
        return default

    def to_rows(self, names: Optional[List[str]] = None) -> List[Dict[str, float]]:
        """Rows ``{'t': ..., <metric>: ...}``, missing metrics as NaN."""
        names = names or self.metric_names()
        return [{'t': r.time, **{n: r.metrics.get(n, math.nan) for n in names}} for r in self.records]


@dataclass
class ErrorRow:
    """Errors against an exact solution at one resolution."""
    h: float
    L1: float
    Linf: float
    species_L1: Tuple[float, ...] = ()
    order_estimate: float = math.nan

    def to_row(self) -> Dict[str, float]:
        return {'h': self.h, 'L1': self.L1, 'Linf': self.Linf, 'order_estimate': self.order_estimate}


@dataclass
class ErrorTable:
    """Refinement ladder of errors, coarsest first."""
    rows: List[ErrorRow] = field(default_factory=list)

    def add(self, row: ErrorRow) -> ErrorRow:
        if self.rows:
            prev = self.rows[-1]
            if row.L1 > 0.0 and prev.L1 > 0.0:
                row.order_estimate = math.log2(prev.L1 / row.L1) / math.log2(prev.h / row.h)
        self.rows.append(row)
        return row

    def orders(self) -> List[float]:
        return [r.order_estimate for r in self.rows[1:]]

    def min_order(self) -> float:
        orders = self.orders()
        return min(orders) if orders else math.nan

    def is_monotone(self) -> bool:
        """Errors strictly decrease under refinement."""
        return all(b.L1 < a.L1 for a, b in zip(self.rows, self.rows[1:]))

    def to_rows(self) -> List[Dict[str, float]]:
        return [r.to_row() for r in self.rows]


def json_safe(value: Any) -> Any:
    """Plain JSON types; non-finite floats become the strings 'nan', 'inf', '-inf'."""
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return [json_safe(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return value
    return value
