"""Categorical datasets and contingency counts."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    ConfigSpaceOverflow,
    DimensionError,
    FormatError,
    MissingDataError,
    SchemaViolation,
)

logger = logging.getLogger(__name__)

#: Default cap on the number of parent configurations of a contingency table.
MAX_CONFIGS = 2**20


@dataclass(frozen=True)
class VariableSchema:
    name: str
    levels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if len(set(self.levels)) != len(self.levels):
            raise SchemaViolation(f"duplicate levels for variable {self.name!r}")
        if not self.levels:
            raise SchemaViolation(f"variable {self.name!r} has no levels")
        if len(self.levels) == 1:
            logger.warning("variable %r has a single level", self.name)

    @property
    def cardinality(self) -> int:
        return len(self.levels)

    def index(self, level: str) -> int:
        try:
            return self.levels.index(level)
        except ValueError:
            raise SchemaViolation(
                f"level {level!r} not declared for variable {self.name!r}"
            ) from None


class Dataset:
    """Complete categorical data stored as level indices.

    ``rows`` has shape ``(n, N)``; column ``i`` holds indices into
    ``schema[i].levels``. The array is copied and made read-only.
    """

    def __init__(self, schema: Sequence[VariableSchema], rows=None):
        self.schema = tuple(schema)
        ncol = len(self.schema)
        if rows is None:
            rows = np.zeros((0, ncol), dtype=np.int64)
        rows = np.array(rows, dtype=np.int64, copy=True)
        if rows.ndim == 1 and rows.size == 0:
            rows = rows.reshape(0, ncol)
        if rows.ndim != 2 or rows.shape[1] != ncol:
            raise DimensionError(
                f"rows must have shape (n, {ncol}), got {rows.shape}"
            )
        card = np.array([v.cardinality for v in self.schema], dtype=np.int64)
        if rows.size and ((rows < 0).any() or (rows >= card).any()):
            raise SchemaViolation("level index out of range")
        rows.setflags(write=False)
        self.rows = rows
        self.cardinalities = tuple(int(c) for c in card)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def n_vars(self) -> int:
        return len(self.schema)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.schema)

    def column(self, i: int) -> np.ndarray:
        return self.rows[:, i]

    def permute_rows(self, order) -> "Dataset":
        return Dataset(self.schema, self.rows[np.asarray(order)])

    def select(self, columns: Sequence[int]) -> "Dataset":
        columns = list(columns)
        return Dataset([self.schema[c] for c in columns], self.rows[:, columns])

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.schema == other.schema and np.array_equal(self.rows, other.rows)

    def __repr__(self):
        return f"Dataset(n={self.n}, vars={list(self.names)})"


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """Counts ``n_ijk`` of one child given one ordered parent list.

    Row ``j`` is the mixed-radix index of the parent configuration, with
    the first parent as the most significant digit.
    """

    child: int
    parents: tuple[int, ...]
    counts: np.ndarray = field(repr=False)

    @property
    def q(self) -> int:
        return self.counts.shape[0]

    @property
    def r(self) -> int:
        return self.counts.shape[1]

    @property
    def margins(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def q_obs(self) -> int:
        return int(np.count_nonzero(self.margins))

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def observed(self) -> np.ndarray:
        """Rows of ``counts`` with a positive margin."""
        return self.counts[self.margins > 0]


def config_index(data: Dataset, parents: Sequence[int]) -> np.ndarray:
    """Mixed-radix parent-configuration index of every row."""
    idx = np.zeros(data.n, dtype=np.int64)
    for p in parents:
        idx = idx * data.cardinalities[p] + data.rows[:, p]
    return idx


def count_contingency(
    data: Dataset,
    child: int,
    parents: Sequence[int] = (),
    max_configs: int = MAX_CONFIGS,
) -> ContingencyTable:
    parents = tuple(int(p) for p in parents)
    nv = data.n_vars
    if not 0 <= child < nv or any(not 0 <= p < nv for p in parents):
        raise DimensionError(f"variable index out of range for {nv} variables")
    if child in parents:
        raise ValueError(f"child {child} listed among its own parents")
    if len(set(parents)) != len(parents):
        raise ValueError("duplicate parents")
    q = 1
    for p in parents:
        q *= data.cardinalities[p]
        if q > max_configs:
            raise ConfigSpaceOverflow(
                f"parent set {parents} has more than {max_configs} configurations"
            )
    r = data.cardinalities[child]
    cell = config_index(data, parents) * r + data.rows[:, child]
    counts = np.bincount(cell, minlength=q * r).reshape(q, r)
    counts.setflags(write=False)
    return ContingencyTable(child, parents, counts)


def _read_schema(path) -> list[VariableSchema]:
    schema = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            name, sep, levels = line.partition(":")
            if not sep:
                raise FormatError(f"{path}:{lineno}: expected 'name: level1,level2,...'")
            levels = [lv.strip() for lv in levels.split(",")]
            if any(not lv for lv in levels):
                raise FormatError(f"{path}:{lineno}: empty level label")
            schema.append(VariableSchema(name.strip(), tuple(levels)))
    return schema


def write_schema(schema: Sequence[VariableSchema], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for v in schema:
            fh.write(f"{v.name}: {','.join(v.levels)}\n")


def load_csv(path, schema_path=None, schema: Sequence[VariableSchema] | None = None) -> Dataset:
    """Read a complete categorical CSV file.

    Without a schema the levels of each column are its observed values in
    lexicographic order. With one (a schema file or a list of
    :class:`VariableSchema`), the declared levels and their order are used
    and undeclared values raise :class:`SchemaViolation`.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise FormatError(f"{path}: duplicate column names")
        records = []
        for lineno, rec in enumerate(reader, 2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise FormatError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(rec)}"
                )
            rec = [c.strip() for c in rec]
            if any(c == "" for c in rec):
                raise MissingDataError(f"{path}:{lineno}: missing value")
            records.append(rec)

    if schema_path is not None or schema is not None:
        declared = {v.name: v for v in (schema if schema is not None else _read_schema(schema_path))}
        missing = [h for h in header if h not in declared]
        if missing:
            raise SchemaViolation(f"columns not declared in schema: {missing}")
        schema = [declared[h] for h in header]
    else:
        if not records:
            raise FormatError(f"{path}: no rows to infer levels from; pass a schema")
        schema = [
            VariableSchema(h, tuple(sorted({rec[i] for rec in records})))
            for i, h in enumerate(header)
        ]

    lookup = [{lv: k for k, lv in enumerate(v.levels)} for v in schema]
    rows = np.empty((len(records), len(header)), dtype=np.int64)
    for r, rec in enumerate(records):
        for c, value in enumerate(rec):
            try:
                rows[r, c] = lookup[c][value]
            except KeyError:
                raise SchemaViolation(
                    f"value {value!r} not declared for column {header[c]!r}"
                ) from None
    return Dataset(schema, rows)


def write_csv(data: Dataset, path) -> None:
    """Write level labels as CSV to a path or an open text stream."""
    if hasattr(path, "write"):
        _write_rows(data, path)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _write_rows(data, fh)


def _write_rows(data: Dataset, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(data.names)
    levels = [v.levels for v in data.schema]
    for row in data.rows:
        writer.writerow([levels[c][k] for c, k in enumerate(row)])
