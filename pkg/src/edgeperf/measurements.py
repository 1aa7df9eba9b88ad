"""Measurement records, per-configuration aggregation and the CSV schema.

A :class:`MeasurementGrid` holds one cell per ``(nn_size, encoding_rate)``
pair with the arithmetic mean of every measured quantity. Means are
accumulated with :func:`math.fsum`, so the grid does not depend on record
order.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

from .errors import DomainViolation, EmptyGrid, MixedProfiles, SchemaError

N_MIN, N_MAX, N_STEP = 128, 608, 32
Q_MIN, Q_MAX = 10, 100

CSV_COLUMNS = (
    "profile",
    "n",
    "q",
    "t_enc_ms",
    "t_dec_ms",
    "t_tx_ms",
    "t_dl_ms",
    "precision",
    "image_bytes",
)
#: Quantities averaged per cell; also the valid ``target`` selectors.
TARGETS = ("t_enc_ms", "t_dec_ms", "t_tx_ms", "t_dl_ms", "precision", "image_bytes")


def check_nn_size(n, *, index: int | None = None, field: str = "n") -> None:
    if isinstance(n, bool) or not isinstance(n, int):
        raise DomainViolation(f"NN size must be an integer, got {n!r}", index=index, field=field)
    if not (N_MIN <= n <= N_MAX) or n % N_STEP:
        raise DomainViolation(
            f"NN size {n} not a multiple of {N_STEP} in [{N_MIN}, {N_MAX}]", index=index, field=field
        )


def check_encoding_rate(q, *, index: int | None = None, field: str = "q") -> None:
    if isinstance(q, bool) or not isinstance(q, int):
        raise DomainViolation(f"encoding rate must be an integer, got {q!r}", index=index, field=field)
    if not Q_MIN <= q <= Q_MAX:
        raise DomainViolation(f"encoding rate {q} outside [{Q_MIN}, {Q_MAX}]", index=index, field=field)


@dataclass(frozen=True)
class MeasurementRecord:
    nn_size: int
    encoding_rate: int
    t_enc_ms: float
    t_dec_ms: float
    t_tx_ms: float
    t_dl_ms: float
    precision: float
    image_bytes: int
    profile_name: str

    def validate(self, index: int | None = None) -> None:
        check_nn_size(self.nn_size, index=index, field="n")
        check_encoding_rate(self.encoding_rate, index=index, field="q")
        for name in ("t_enc_ms", "t_dec_ms", "t_tx_ms", "t_dl_ms"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise DomainViolation(f"delay must be finite and >= 0, got {value!r}", index=index, field=name)
        if not (math.isfinite(self.precision) and 0.0 <= self.precision <= 1.0):
            raise DomainViolation(
                f"precision must lie in [0, 1], got {self.precision!r}", index=index, field="precision"
            )
        if self.image_bytes < 0:
            raise DomainViolation(
                f"image size must be >= 0, got {self.image_bytes!r}", index=index, field="image_bytes"
            )


@dataclass(frozen=True)
class CellStats:
    """Per-cell sample count and field means."""

    count: int
    t_enc_ms: float
    t_dec_ms: float
    t_tx_ms: float
    t_dl_ms: float
    precision: float
    image_bytes: float


@dataclass(frozen=True)
class MeasurementGrid:
    cells: Mapping[tuple[int, int], CellStats]
    profile_name: str = ""

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def n_values(self) -> list[int]:
        return sorted({n for n, _ in self.cells})

    @property
    def q_values(self) -> list[int]:
        return sorted({q for _, q in self.cells})

    def keys(self) -> list[tuple[int, int]]:
        """Cell keys in ascending ``(n, q)`` order."""
        return sorted(self.cells)


def ingest(records: Iterable[MeasurementRecord]) -> MeasurementGrid:
    """Aggregate records into a grid of per-``(n, q)`` arithmetic means."""
    records = list(records)
    if not records:
        return MeasurementGrid(cells={}, profile_name="")
    profile = records[0].profile_name
    buckets: dict[tuple[int, int], list[MeasurementRecord]] = {}
    for i, rec in enumerate(records):
        if rec.profile_name != profile:
            raise MixedProfiles(
                f"record {i} has profile {rec.profile_name!r}, expected {profile!r}"
            )
        rec.validate(index=i)
        buckets.setdefault((rec.nn_size, rec.encoding_rate), []).append(rec)

    cells = {}
    for key, group in buckets.items():
        k = len(group)
        means = {name: math.fsum(getattr(r, name) for r in group) / k for name in TARGETS}
        cells[key] = CellStats(count=k, **means)
    return MeasurementGrid(cells=dict(sorted(cells.items())), profile_name=profile)


def to_design_matrix(grid: MeasurementGrid, target: str) -> tuple[list[tuple[int, int]], list[float]]:
    """One ``((n, q), mean)`` row per cell, ordered by ascending n then q."""
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}; expected one of {TARGETS}")
    if not grid.cells:
        raise EmptyGrid("grid has no cells")
    keys = grid.keys()
    return keys, [getattr(grid.cells[k], target) for k in keys]


# -- CSV ---------------------------------------------------------------------

def _fmt(x: float) -> str:
    # shortest round-trip repr: lossless and platform independent
    return repr(float(x))


def record_row(rec: MeasurementRecord) -> list[str]:
    return [
        rec.profile_name,
        str(rec.nn_size),
        str(rec.encoding_rate),
        _fmt(rec.t_enc_ms),
        _fmt(rec.t_dec_ms),
        _fmt(rec.t_tx_ms),
        _fmt(rec.t_dl_ms),
        _fmt(rec.precision),
        str(rec.image_bytes),
    ]


def dumps_records(records: Iterable[MeasurementRecord], header: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow(record_row(rec))
    return buf.getvalue()


def write_records(path: str | Path, records: Iterable[MeasurementRecord], header: Sequence[str] = ()) -> None:
    Path(path).write_text(dumps_records(records, header), encoding="utf-8")


def _parse_int(text: str, lineno: int, column: str) -> int:
    try:
        return int(text)
    except ValueError:
        try:
            value = float(text)
        except ValueError:
            value = math.nan
        if value.is_integer():
            return int(value)
        raise DomainViolation(f"line {lineno}: expected an integer, got {text!r}", field=column) from None


def _parse_float(text: str, lineno: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise DomainViolation(f"line {lineno}: expected a number, got {text!r}", field=column) from None


def loads_records(text: str) -> list[MeasurementRecord]:
    """Parse the measurement CSV schema. ``#`` comment lines are skipped."""
    lines = [(i, line) for i, line in enumerate(text.splitlines(), start=1)
             if line.strip() and not line.lstrip().startswith("#")]
    if not lines:
        raise SchemaError("missing CSV header")
    reader = csv.reader([line for _, line in lines])
    header = [h.strip() for h in next(reader)]
    unknown = [h for h in header if h not in CSV_COLUMNS]
    if unknown:
        raise SchemaError(f"unknown column {unknown[0]!r}", column=unknown[0])
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise SchemaError(f"missing column {missing[0]!r}", column=missing[0])
    if len(set(header)) != len(header):
        dup = next(h for h in header if header.count(h) > 1)
        raise SchemaError(f"duplicate column {dup!r}", column=dup)

    out = []
    for (lineno, _), row in zip(lines[1:], reader):
        if len(row) != len(header):
            raise SchemaError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        v = dict(zip(header, (cell.strip() for cell in row)))
        out.append(
            MeasurementRecord(
                nn_size=_parse_int(v["n"], lineno, "n"),
                encoding_rate=_parse_int(v["q"], lineno, "q"),
                t_enc_ms=_parse_float(v["t_enc_ms"], lineno, "t_enc_ms"),
                t_dec_ms=_parse_float(v["t_dec_ms"], lineno, "t_dec_ms"),
                t_tx_ms=_parse_float(v["t_tx_ms"], lineno, "t_tx_ms"),
                t_dl_ms=_parse_float(v["t_dl_ms"], lineno, "t_dl_ms"),
                precision=_parse_float(v["precision"], lineno, "precision"),
                image_bytes=_parse_int(v["image_bytes"], lineno, "image_bytes"),
                profile_name=v["profile"],
            )
        )
    return out


def read_records(path: str | Path) -> list[MeasurementRecord]:
    return loads_records(Path(path).read_text(encoding="utf-8"))


def grid_records(grid: MeasurementGrid) -> list[MeasurementRecord]:
    """Export cell means as records (one per cell) in the CSV schema."""
    out = []
    for (n, q) in grid.keys():
        c = grid.cells[(n, q)]
        out.append(MeasurementRecord(
            nn_size=n, encoding_rate=q, t_enc_ms=c.t_enc_ms, t_dec_ms=c.t_dec_ms,
            t_tx_ms=c.t_tx_ms, t_dl_ms=c.t_dl_ms, precision=c.precision,
            image_bytes=round(c.image_bytes), profile_name=grid.profile_name,
        ))
    return out


__all__ = [
    "CSV_COLUMNS",
    "TARGETS",
    "CellStats",
    "MeasurementGrid",
    "MeasurementRecord",
    "check_encoding_rate",
    "check_nn_size",
    "dumps_records",
    "grid_records",
    "ingest",
    "loads_records",
    "read_records",
    "to_design_matrix",
    "write_records",
]
