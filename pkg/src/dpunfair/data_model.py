"""Bag-semantics tabular data: schema, encoded rows, CSV ingestion, preprocessing."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

#: Reserved code for a missing/empty cell, shared by every attribute.
MISSING = int(np.iinfo(np.int64).min)

CATEGORICAL = "categorical"
INTEGER = "integer"


class DataError(ValueError):
    """Malformed input data, unknown attribute, or a domain violation."""


@dataclass(frozen=True)
class Attribute:
    name: str
    kind: str = CATEGORICAL
    # code -> raw string, categorical only
    labels: tuple[str, ...] = ()

    def decode(self, code: int) -> str:
        if code == MISSING:
            return ""
        if self.kind == CATEGORICAL:
            return self.labels[code]
        return str(code)


@dataclass(frozen=True)
class Schema:
    attributes: tuple[Attribute, ...]

    def __post_init__(self):
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise DataError(f"duplicate attribute names in {names}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DataError(f"unknown attribute {name!r}; schema has {list(self.names)}") from None

    def __getitem__(self, name: str) -> Attribute:
        return self.attributes[self.index(name)]


class Database:
    """Immutable bag of encoded tuples with stable identifiers.

    ``rows`` is an ``(n, m)`` int64 array; ``ids`` holds one identifier per row
    in stored order. Duplicate value-rows are allowed and keep distinct ids.
    """

    def __init__(self, schema: Schema, rows: Any, ids: Any = None):
        rows = np.array(rows, dtype=np.int64, copy=True)
        if rows.ndim == 1 and rows.size == 0:
            rows = rows.reshape(0, len(schema.attributes))
        if rows.ndim != 2 or rows.shape[1] != len(schema.attributes):
            raise DataError(
                f"rows must have shape (n, {len(schema.attributes)}), got {rows.shape}"
            )
        if ids is None:
            ids = np.arange(rows.shape[0], dtype=np.int64)
        else:
            ids = np.array(ids, dtype=np.int64, copy=True)
        if ids.shape != (rows.shape[0],):
            raise DataError("ids must have one entry per row")
        if len(np.unique(ids)) != len(ids):
            raise DataError("tuple ids must be unique")
        for j, attr in enumerate(schema.attributes):
            if attr.kind == CATEGORICAL:
                col = rows[:, j]
                bad = (col != MISSING) & ((col < 0) | (col >= len(attr.labels)))
                if bad.any():
                    raise DataError(
                        f"value {int(col[bad][0])} outside the domain of {attr.name!r}"
                    )
        rows.setflags(write=False)
        ids.setflags(write=False)
        self.schema = schema
        self.rows = rows
        self.ids = ids

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Database):
            return NotImplemented
        return (
            self.schema == other.schema
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.ids, other.ids)
        )

    def __repr__(self) -> str:
        return f"Database(n={self.n}, attributes={list(self.schema.names)})"

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.schema.index(name)]

    def domain(self, name: str) -> set[int]:
        attr = self.schema[name]
        if attr.kind == CATEGORICAL:
            return set(range(len(attr.labels))) | {MISSING}
        return {int(v) for v in np.unique(self.column(name))}

    def encode(self, name: str, raw: str) -> int:
        """Code of a raw value for ``name`` (categorical label or integer text)."""
        attr = self.schema[name]
        if raw == "":
            return MISSING
        if attr.kind == INTEGER:
            return int(raw)
        try:
            return attr.labels.index(raw)
        except ValueError:
            raise DataError(f"{raw!r} is not in the domain of {name!r}") from None

    def slice(self, start: int, stop: int) -> Database:
        """Consecutive rows ``[start, stop)`` in stored order, ids kept."""
        return Database(self.schema, self.rows[start:stop], self.ids[start:stop])

    def take(self, positions: Sequence[int] | np.ndarray) -> Database:
        positions = np.asarray(positions, dtype=np.int64)
        return Database(self.schema, self.rows[positions], self.ids[positions])

    def decoded_rows(self) -> list[list[str]]:
        attrs = self.schema.attributes
        return [[a.decode(int(v)) for a, v in zip(attrs, row)] for row in self.rows]


@dataclass(frozen=True)
class FairnessCriterion:
    """Independence statement ``protected ⫫ outcome | admissible``."""

    protected: str
    outcome: str
    admissible: str | None = None

    def __post_init__(self):
        if self.protected == self.outcome:
            raise DataError("protected and outcome attributes must differ")
        if self.admissible is not None and self.admissible in (self.protected, self.outcome):
            raise DataError("admissible attribute must differ from protected and outcome")

    @property
    def conditional(self) -> bool:
        return self.admissible is not None

    @property
    def attributes(self) -> tuple[str, ...]:
        if self.admissible is None:
            return (self.protected, self.outcome)
        return (self.protected, self.outcome, self.admissible)

    def check(self, schema: Schema) -> None:
        for name in self.attributes:
            schema.index(name)

    def to_dict(self) -> dict[str, str | None]:
        return {"protected": self.protected, "outcome": self.outcome, "admissible": self.admissible}

    def __str__(self) -> str:
        s = f"{self.protected} ⫫ {self.outcome}"
        return s if self.admissible is None else f"{s} | {self.admissible}"


def load_criteria(path: str | Path) -> list[FairnessCriterion]:
    """Read a JSON array of ``{"protected", "outcome", "admissible"}`` objects."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return parse_criteria(raw)


def parse_criteria(raw: Any) -> list[FairnessCriterion]:
    if not isinstance(raw, list):
        raise DataError("criteria must be a JSON array")
    out = []
    for item in raw:
        if not isinstance(item, Mapping) or "protected" not in item or "outcome" not in item:
            raise DataError(f"malformed criterion {item!r}")
        out.append(
            FairnessCriterion(item["protected"], item["outcome"], item.get("admissible"))
        )
    return out


def load_csv(
    path: str | Path,
    *,
    delimiter: str = ",",
    kinds: Mapping[str, str] | None = None,
    encoding: str = "utf-8",
) -> Database:
    """Load a headered CSV file.

    Categorical columns are encoded as dense integers in first-occurrence
    order; empty cells map to :data:`MISSING`. Columns listed as ``"integer"``
    in ``kinds`` keep their numeric value. Strings are taken verbatim, so any
    case/whitespace normalisation is up to the caller.
    """
    kinds = dict(kinds or {})
    try:
        with open(path, newline="", encoding=encoding) as fh:
            reader = csv.reader(fh, delimiter=delimiter)
            try:
                header = next(reader)
            except StopIteration:
                raise DataError(f"{path}: empty file") from None
            records = []
            for lineno, rec in enumerate(reader, start=2):
                if not rec:
                    continue
                if len(rec) != len(header):
                    raise DataError(
                        f"{path}:{lineno}: expected {len(header)} fields, got {len(rec)}"
                    )
                records.append(rec)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    unknown = set(kinds) - set(header)
    if unknown:
        raise DataError(f"kinds given for unknown columns {sorted(unknown)}")
    return from_records(header, records, kinds=kinds)


def from_records(
    header: Sequence[str],
    records: Iterable[Sequence[Any]],
    *,
    kinds: Mapping[str, str] | None = None,
) -> Database:
    """Encode raw records (strings or ints) into a :class:`Database`."""
    kinds = dict(kinds or {})
    records = [list(r) for r in records]
    m = len(header)
    codes = np.empty((len(records), m), dtype=np.int64)
    attrs = []
    for j, name in enumerate(header):
        kind = kinds.get(name, CATEGORICAL)
        if kind == INTEGER:
            for i, rec in enumerate(records):
                raw = str(rec[j]).strip()
                if raw == "":
                    codes[i, j] = MISSING
                    continue
                try:
                    codes[i, j] = int(raw)
                except ValueError:
                    raise DataError(
                        f"row {i}: non-integer value {raw!r} in integer column {name!r}"
                    ) from None
            attrs.append(Attribute(name, INTEGER))
        elif kind == CATEGORICAL:
            seen: dict[str, int] = {}
            for i, rec in enumerate(records):
                raw = str(rec[j])
                if raw == "":
                    codes[i, j] = MISSING
                else:
                    codes[i, j] = seen.setdefault(raw, len(seen))
            attrs.append(Attribute(name, CATEGORICAL, tuple(seen)))
        else:
            raise DataError(f"unknown attribute kind {kind!r} for {name!r}")
    return Database(Schema(tuple(attrs)), codes.reshape(len(records), m))


def write_csv(db: Database, path: str | Path, *, delimiter: str = ",") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        writer.writerow(db.schema.names)
        writer.writerows(db.decoded_rows())


def kinds_of(db: Database) -> dict[str, str]:
    return {a.name: a.kind for a in db.schema.attributes}


# ---------------------------------------------------------------------------
# preprocessing


@dataclass(frozen=True)
class ClampNegatives:
    """Replace negative values of integer attributes by 0 (all integer attributes if none given)."""

    attrs: tuple[str, ...] | None = None


@dataclass(frozen=True)
class Discretize:
    attr: str
    bin_width: int


@dataclass(frozen=True)
class Filter:
    """Keep only tuples with ``attr < upper_bound`` (missing values kept)."""

    attr: str
    upper_bound: int


Rule = ClampNegatives | Discretize | Filter


def parse_rule(spec: str) -> Rule:
    """Parse ``clamp-negatives[:A,B]``, ``discretize:ATTR:WIDTH`` or ``filter:ATTR:BOUND``."""
    parts = spec.split(":")
    head = parts[0]
    if head == "clamp-negatives":
        attrs = tuple(parts[1].split(",")) if len(parts) > 1 and parts[1] else None
        return ClampNegatives(attrs)
    if head == "discretize" and len(parts) == 3:
        return Discretize(parts[1], int(parts[2]))
    if head == "filter" and len(parts) == 3:
        return Filter(parts[1], int(parts[2]))
    raise DataError(f"cannot parse preprocessing rule {spec!r}")


def preprocess(db: Database, rules: Sequence[Rule]) -> Database:
    """Apply rules in order; ids are reassigned ``0..n'-1`` keeping relative order."""
    if not rules:
        return db
    schema = db.schema
    rows = np.array(db.rows)
    for rule in rules:
        if isinstance(rule, ClampNegatives):
            names = rule.attrs
            if names is None:
                names = tuple(a.name for a in schema.attributes if a.kind == INTEGER)
            for name in names:
                j = schema.index(name)
                if schema.attributes[j].kind != INTEGER:
                    raise DataError(f"clamp-negatives needs an integer attribute, {name!r} is not")
                col = rows[:, j]
                col[(col < 0) & (col != MISSING)] = 0
        elif isinstance(rule, Discretize):
            j = schema.index(rule.attr)
            if schema.attributes[j].kind != INTEGER:
                raise DataError(f"discretize needs an integer attribute, {rule.attr!r} is not")
            if rule.bin_width < 1:
                raise DataError("bin width must be >= 1")
            col = rows[:, j]
            keep = col != MISSING
            col[keep] = np.floor_divide(col[keep], rule.bin_width)
        elif isinstance(rule, Filter):
            j = schema.index(rule.attr)
            if schema.attributes[j].kind != INTEGER:
                raise DataError(f"filter needs an integer attribute, {rule.attr!r} is not")
            col = rows[:, j]
            rows = rows[(col < rule.upper_bound) | (col == MISSING)]
        else:
            raise DataError(f"unknown rule {rule!r}")
    return Database(schema, rows)


# ---------------------------------------------------------------------------
# neighbours and projections


def replace_tuple(db: Database, tuple_id: int, values: Sequence[int]) -> Database:
    """Bounded-DP neighbour: the row with ``tuple_id`` replaced in place by ``values``."""
    pos = np.flatnonzero(db.ids == tuple_id)
    if pos.size == 0:
        raise DataError(f"unknown tuple id {tuple_id}")
    values = np.asarray(values, dtype=np.int64)
    if values.shape != (len(db.schema.attributes),):
        raise DataError(f"replacement must have {len(db.schema.attributes)} values")
    rows = np.array(db.rows)
    rows[pos[0]] = values
    return Database(db.schema, rows, db.ids)


def project(db: Database, attrs: Sequence[str]) -> Database:
    """Restrict to ``attrs`` keeping ids and duplicates."""
    idx = [db.schema.index(a) for a in attrs]
    schema = Schema(tuple(db.schema.attributes[j] for j in idx))
    return Database(schema, db.rows[:, idx], db.ids)
