"""Count tables: photon counts per (x, projector), plus CSV I/O."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .qubit import BLOCH_AXES, Projector

logger = logging.getLogger(__name__)

N_PROJECTORS = len(Projector)
LABELS = tuple(p.name for p in Projector)


@dataclass(frozen=True, eq=False)
class CountTable:
    """Counts on a sorted grid of distinct x values.

    ``counts`` has shape ``(len(xs), 6)`` with columns in :class:`Projector`
    order. Counts are stored as floats so the infinite-statistics simulator
    can emit non-integer proportions.
    """

    xs: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        counts = np.asarray(self.counts, dtype=float)
        if xs.ndim != 1 or counts.shape != (xs.size, N_PROJECTORS):
            raise DataError(f"counts shape {counts.shape} does not match {xs.size} x values")
        if np.any(np.diff(xs) <= 0):
            raise DataError("xs must be strictly increasing; use CountTable.from_records")
        if np.any(counts < 0) or not np.all(np.isfinite(counts)):
            raise DataError("counts must be finite and nonnegative")
        xs.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_records(cls, records) -> "CountTable":
        """Build from ``(x, projector, count)`` triples, summing duplicates."""
        acc: dict[float, np.ndarray] = {}
        for x, p, n in records:
            row = acc.setdefault(float(x), np.zeros(N_PROJECTORS))
            row[Projector.parse(p) if isinstance(p, str) else Projector(p)] += n
        xs = np.array(sorted(acc))
        counts = np.array([acc[x] for x in xs]).reshape(xs.size, N_PROJECTORS)
        return cls(xs, counts)

    def records(self):
        for x, row in zip(self.xs, self.counts):
            for p in Projector:
                yield float(x), p, row[p]

    def __eq__(self, other):
        if not isinstance(other, CountTable):
            return NotImplemented
        return np.array_equal(self.xs, other.xs) and np.array_equal(self.counts, other.counts)

    def __len__(self):
        return self.xs.size

    @property
    def totals(self) -> np.ndarray:
        """``N(x)``, the total count at each x."""
        return self.counts.sum(axis=1)

    @property
    def occupied(self) -> np.ndarray:
        return self.totals > 0

    def occupied_table(self) -> "CountTable":
        mask = self.occupied
        return CountTable(self.xs[mask], self.counts[mask])

    def fractions(self) -> np.ndarray:
        """``n_p(x) / N(x)`` for occupied rows only."""
        mask = self.occupied
        if not mask.any():
            raise DataError("table has no x with nonzero counts")
        counts = self.counts[mask]
        return counts / counts.sum(axis=1, keepdims=True)

    def row_index(self, x: float) -> int:
        i = int(np.searchsorted(self.xs, x))
        for j in (i - 1, i):
            if 0 <= j < self.xs.size and np.isclose(self.xs[j], x, rtol=1e-12, atol=1e-12):
                return j
        raise KeyError(f"x={x!r} not in table")

    def mean_outcome_vectors(self) -> np.ndarray:
        """Count-weighted average of projector Bloch axes per occupied x."""
        return self.fractions() @ BLOCH_AXES

    @property
    def is_integral(self) -> bool:
        return bool(np.all(self.counts == np.round(self.counts)))


def _format_count(value: float, integral: bool) -> str:
    return str(int(value)) if integral else repr(float(value))


def table_to_csv(table: CountTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "projector", "count"])
    integral = table.is_integral
    for x, p, n in table.records():
        writer.writerow([repr(x), p.name, _format_count(n, integral)])
    return buf.getvalue()


def write_table(table: CountTable, path) -> None:
    Path(path).write_text(table_to_csv(table))


def _parse_float(text, what, row_no):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise DataError(f"row {row_no}: non-numeric {what} {text!r}") from None
    if not np.isfinite(value):
        raise DataError(f"row {row_no}: non-finite {what} {text!r}")
    return value


def _parse_count(text, row_no):
    value = _parse_float(text, "count", row_no)
    if value < 0:
        raise DataError(f"row {row_no}: negative count {text!r}")
    return value


def read_table(path, column_map: dict | None = None) -> CountTable:
    """Read a count table in long or wide CSV form.

    Long form has columns for x, projector label and count; ``column_map``
    renames them (keys ``x``, ``projector``, ``count``). Wide form has an x
    column plus one column per projector label and is detected from the
    header. Labels are case-insensitive; duplicate (x, projector) rows are
    summed. Row numbers in error messages count the header as row 1.
    """
    column_map = {"x": "x", "projector": "projector", "count": "count", **(column_map or {})}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        lowered = [h.lower() for h in header]
        x_name = column_map["x"].lower()
        if x_name not in lowered:
            raise DataError(f"{path}: missing x column {column_map['x']!r}")
        x_col = lowered.index(x_name)
        wide_cols = {label: lowered.index(label.lower()) for label in LABELS if label.lower() in lowered}
        records = []
        if len(wide_cols) == N_PROJECTORS:
            for row_no, row in enumerate(reader, start=2):
                if not any(cell.strip() for cell in row):
                    continue
                x = _parse_float(row[x_col], "x", row_no)
                for label, col in wide_cols.items():
                    records.append((x, label, _parse_count(row[col], row_no)))
        else:
            try:
                p_col = lowered.index(column_map["projector"].lower())
                n_col = lowered.index(column_map["count"].lower())
            except ValueError:
                raise DataError(
                    f"{path}: need columns {column_map['projector']!r} and {column_map['count']!r}"
                    " or one column per projector"
                ) from None
            for row_no, row in enumerate(reader, start=2):
                if not any(cell.strip() for cell in row):
                    continue
                x = _parse_float(row[x_col], "x", row_no)
                try:
                    p = Projector.parse(row[p_col])
                except ValueError:
                    raise DataError(f"row {row_no}: unknown projector label {row[p_col]!r}") from None
                records.append((x, p, _parse_count(row[n_col], row_no)))
    if not records:
        raise DataError(f"{path}: no data rows")
    return CountTable.from_records(records)


def ingest_experiment_csv(path, column_map: dict | None = None) -> CountTable:
    """Read an experimental count file and warn about empty x rows."""
    table = read_table(path, column_map)
    empty = int((~table.occupied).sum())
    if empty:
        logger.warning("%d x value(s) have zero total counts and will be ignored by fits", empty)
    return table
