"""Journal bibliometric records: validation, CSV ingestion and summaries."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable

logger = logging.getLogger(__name__)

COLUMNS = ("id", "h", "P", "C")


class DataError(ValueError):
    """Base class for ingestion problems."""


class ParseError(DataError):
    pass


class ValidationError(DataError):
    pass


class Provenance(str, Enum):
    OBSERVED = "observed"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class JournalRecord:
    id: str
    h: int
    P: int
    C: int

    def violations(self) -> list[str]:
        """Names of the bibliometric consistency rules this record breaks."""
        out = []
        if self.h < 0:
            out.append("h >= 0 violated")
        if self.P < 1:
            out.append("P >= 1 violated")
        if self.C < 0:
            out.append("C >= 0 violated")
        if self.h > self.P:
            out.append("h ≤ P violated")
        if self.h * self.h > self.C:
            out.append("h² ≤ C violated")
        return out


# synthetic data may break consistency, but never these
_HARD_RULES = ("h >= 0 violated", "P >= 1 violated", "C >= 0 violated")


@dataclass(frozen=True)
class Dataset:
    name: str
    records: tuple[JournalRecord, ...]
    provenance: Provenance = Provenance.OBSERVED

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "provenance", Provenance(self.provenance))
        seen = set()
        relaxed = 0
        for row, rec in enumerate(self.records, start=1):
            if rec.id in seen:
                raise ValidationError(f"record {row}: duplicate id {rec.id!r}")
            seen.add(rec.id)
            rules = rec.violations()
            for rule in rules:
                if self.provenance is Provenance.OBSERVED or rule in _HARD_RULES:
                    raise ValidationError(f"record {row} ({rec.id}): {rule}")
            relaxed += bool(rules)
        if relaxed:
            logger.warning(
                "%s: %d synthetic record(s) break h ≤ P or h² ≤ C", self.name, relaxed
            )

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def columns(self):
        """Return (h, P, C) as float64 arrays."""
        import numpy as np

        h = np.array([r.h for r in self.records], dtype=float)
        P = np.array([r.P for r in self.records], dtype=float)
        C = np.array([r.C for r in self.records], dtype=float)
        return h, P, C


def _parse_int(text: str, column: str, row: int) -> int:
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"row {row}: column {column} is not an integer: {text!r}") from None
    if not math.isfinite(value) or value != int(value):
        raise ParseError(f"row {row}: column {column} is not an integer: {text!r}")
    return int(value)


def parse_dataset(
    source: IO[str] | str | Iterable[str],
    name: str,
    provenance: Provenance | str = Provenance.OBSERVED,
) -> Dataset:
    """Read a ``id,h,P,C`` delimited table into a validated :class:`Dataset`.

    Row numbers in error messages count the header as row 1. Blank lines are
    skipped. Ids containing commas cannot be represented and make the row
    malformed.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source, quoting=csv.QUOTE_NONE)
    prov = Provenance(provenance)
    header = None
    records = []
    seen: set[str] = set()
    for row_no, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if header is None:
            header = [cell.strip() for cell in row]
            missing = [c for c in COLUMNS if c not in header]
            if missing:
                raise ParseError(f"row {row_no}: header lacks column(s) {', '.join(missing)}")
            if len(set(header)) != len(header):
                raise ParseError(f"row {row_no}: duplicate header columns")
            index = {c: header.index(c) for c in COLUMNS}
            continue
        if len(row) != len(header):
            raise ParseError(
                f"row {row_no}: expected {len(header)} fields, found {len(row)}"
            )
        ident = row[index["id"]].strip()
        if not ident:
            raise ParseError(f"row {row_no}: empty id")
        rec = JournalRecord(
            id=ident,
            h=_parse_int(row[index["h"]], "h", row_no),
            P=_parse_int(row[index["P"]], "P", row_no),
            C=_parse_int(row[index["C"]], "C", row_no),
        )
        if ident in seen:
            raise ValidationError(f"row {row_no}: duplicate id {ident!r}")
        seen.add(ident)
        for rule in rec.violations():
            if prov is Provenance.OBSERVED or rule in _HARD_RULES:
                raise ValidationError(f"row {row_no} ({ident}): {rule}")
        records.append(rec)
    if header is None:
        raise ParseError("row 1: missing header")
    return Dataset(name=name, records=tuple(records), provenance=prov)


def read_dataset(path, name: str | None = None, provenance=Provenance.OBSERVED) -> Dataset:
    from pathlib import Path

    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_dataset(fh, name or path.stem, provenance)


def serialize_dataset(d: Dataset) -> str:
    lines = [",".join(COLUMNS)]
    for r in d.records:
        if "," in r.id or "\n" in r.id:
            raise DataError(f"id {r.id!r} cannot be written without quoting")
        lines.append(f"{r.id},{r.h},{r.P},{r.C}")
    return "\n".join(lines) + "\n"


def write_dataset(d: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(serialize_dataset(d))


def dataset_summary(d: Dataset) -> dict:
    """Count plus min/max/mean of each of h, P, C.

    Means are exact (computed with integer sums, then divided once).
    """
    if len(d) == 0:
        raise DataError("cannot summarise an empty dataset")
    n = len(d)
    out: dict = {"n": n}
    for col in ("h", "P", "C"):
        values = [getattr(r, col) for r in d.records]
        out[col] = {"min": min(values), "max": max(values), "mean": sum(values) / n}
    return out
