"""Reference relational store: typed tables loaded from a manifest plus CSVs.

Supported column datatypes are ``text``, ``number`` and ``date``.  Numbers
follow numeric affinity (integral values are stored as ints), dates are ISO
``YYYY-MM-DD``, and an empty CSV field is NULL regardless of type.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)

DATATYPES = ("text", "number", "date")

Value = str | int | float | dt.date | None


class StoreError(Exception):
    pass


@dataclass(frozen=True)
class TableDef:
    name: str
    columns: tuple[tuple[str, str], ...]  # (column name, datatype)
    primary_key: tuple[str, ...]

    def __post_init__(self):
        names = [c for c, _ in self.columns]
        if len(set(names)) != len(names):
            raise StoreError(f"table {self.name!r}: duplicate column names")
        for col, dtype in self.columns:
            if dtype not in DATATYPES:
                raise StoreError(f"table {self.name!r}: bad datatype {dtype!r} for {col!r}")
        missing = [c for c in self.primary_key if c not in names]
        if missing:
            raise StoreError(f"table {self.name!r}: pk columns {missing} do not exist")

    def column_names(self) -> list[str]:
        return [c for c, _ in self.columns]

    def column_index(self, column: str) -> int:
        for i, (c, _) in enumerate(self.columns):
            if c == column:
                return i
        raise StoreError(f"no column {column!r} in table {self.name!r}")

    def datatype(self, column: str) -> str:
        return self.columns[self.column_index(column)][1]


def coerce(value: str | None, dtype: str) -> Value:
    """Coerce one CSV field to its column type; '' means NULL."""
    if value is None or value == "":
        return None
    if dtype == "text":
        return value
    if dtype == "number":
        try:
            number = float(value)
        except ValueError:
            raise ValueError(f"not a number: {value!r}") from None
        if number.is_integer():
            return int(number)
        return number
    try:
        return dt.date.fromisoformat(value)
    except ValueError:
        raise ValueError(f"not a YYYY-MM-DD date: {value!r}") from None


class RelationalStore:
    """In-memory table storage: table name -> TableDef + rows by row id."""

    def __init__(self):
        self._defs: dict[str, TableDef] = {}
        self._rows: dict[str, dict[int, tuple[Value, ...]]] = {}
        self._next_id: dict[str, int] = {}

    def create_table(self, table_def: TableDef) -> None:
        if table_def.name in self._defs:
            raise StoreError(f"table {table_def.name!r} already exists")
        self._defs[table_def.name] = table_def
        self._rows[table_def.name] = {}
        self._next_id[table_def.name] = 1

    def has_table(self, name: str) -> bool:
        return name in self._defs

    def table(self, name: str) -> TableDef:
        try:
            return self._defs[name]
        except KeyError:
            raise StoreError(f"unknown table {name!r}") from None

    def tables(self) -> list[str]:
        return sorted(self._defs)

    def insert(self, name: str, values: tuple[Value, ...]) -> int:
        table_def = self.table(name)
        if len(values) != len(table_def.columns):
            raise StoreError(
                f"table {name!r}: expected {len(table_def.columns)} values, got {len(values)}")
        row_id = self._next_id[name]
        self._next_id[name] = row_id + 1
        self._rows[name][row_id] = values
        return row_id

    def rows(self, name: str) -> dict[int, tuple[Value, ...]]:
        self.table(name)
        return self._rows[name]

    def row_count(self, name: str) -> int:
        return len(self.rows(name))

    def cell(self, name: str, column: str, row_id: int) -> Value:
        table_def = self.table(name)
        return self._rows[name][row_id][table_def.column_index(column)]


# ---------------------------------------------------------------------------
# Manifest + CSV ingest
# ---------------------------------------------------------------------------

def parse_manifest(text: str) -> list[TableDef]:
    """Manifest format: blocks of `table <name>` / `column <name> <type>` /
    `pk <col> [<col>...]`, separated by blank lines or the next `table` line."""
    defs: list[TableDef] = []
    name: str | None = None
    columns: list[tuple[str, str]] = []
    pk: tuple[str, ...] = ()

    def close():
        nonlocal name, columns, pk
        if name is None:
            return
        if not columns:
            raise StoreError(f"table {name!r}: no columns declared")
        if not pk:
            raise StoreError(f"table {name!r}: no pk line")
        defs.append(TableDef(name, tuple(columns), pk))
        name, columns, pk = None, [], ()

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "table":
            close()
            if len(parts) != 2:
                raise StoreError(f"manifest line {line_no}: expected 'table <name>'")
            name = parts[1]
        elif parts[0] == "column":
            if name is None:
                raise StoreError(f"manifest line {line_no}: column before any table")
            if len(parts) != 3:
                raise StoreError(f"manifest line {line_no}: expected 'column <name> <type>'")
            columns.append((parts[1], parts[2]))
        elif parts[0] == "pk":
            if name is None or len(parts) < 2:
                raise StoreError(f"manifest line {line_no}: expected 'pk <col> ...'")
            pk = tuple(parts[1:])
        else:
            raise StoreError(f"manifest line {line_no}: unknown directive {parts[0]!r}")
    close()
    if not defs:
        raise StoreError("manifest declares no tables")
    return defs


def load_manifest(path: str | Path) -> list[TableDef]:
    return parse_manifest(Path(path).read_text(encoding="utf-8"))


def ingest_csv(store: RelationalStore, table_defs: list[TableDef],
               csv_dir: str | Path) -> dict[str, int]:
    """Create the declared tables and load `<csv_dir>/<table>.csv` for each.

    Returns the number of rows loaded per table.  CSV headers must match the
    declared column names in order.
    """
    csv_dir = Path(csv_dir)
    counts: dict[str, int] = {}
    for table_def in table_defs:
        store.create_table(table_def)
        path = csv_dir / f"{table_def.name}.csv"
        if not path.exists():
            raise StoreError(f"missing CSV file for table {table_def.name!r}: {path}")
        counts[table_def.name] = _load_csv(store, table_def, path)
        logger.info("loaded %s: %d rows", table_def.name, counts[table_def.name])
    return counts


def _load_csv(store: RelationalStore, table_def: TableDef, path: Path) -> int:
    expected = table_def.column_names()
    count = 0
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise StoreError(f"{path.name}: missing header row") from None
        if header != expected:
            raise StoreError(
                f"{path.name}: header {header} does not match declared columns {expected}")
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(expected):
                raise StoreError(
                    f"{path.name} line {line_no}: expected {len(expected)} fields, "
                    f"got {len(row)}")
            values = []
            for (column, dtype), raw in zip(table_def.columns, row):
                try:
                    values.append(coerce(raw, dtype))
                except ValueError as exc:
                    raise StoreError(
                        f"{path.name} line {line_no}: column {column!r}: {exc}") from None
            store.insert(table_def.name, tuple(values))
            count += 1
    return count
