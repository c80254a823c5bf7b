"""SQL subset: statement AST, canonical renderer, parser and executors.

The supported subset is what candidate generation emits: comma joins with a
conjunctive WHERE of equality joins and filter predicates (a disjunction is
allowed within one column), SUM/COUNT aggregates with GROUP BY, ORDER BY on
one expression, and LIMIT.  ``render`` produces a canonical text form
(keywords uppercase, one clause per line, joins before filters, conditions
sorted) that the built-in parser reads back to an identical AST.

Two executors are provided: the reference in-memory executor, which is the
acceptance target, and a sqlite-backed engine used as an independent
cross-check through the same interface.
"""

from __future__ import annotations

import datetime as dt
import re
import sqlite3
from dataclasses import dataclass, replace
from typing import Optional, Union

from .querylang import ComparisonOp
from .store import RelationalStore, Value


class SqlError(Exception):
    pass


class SqlParseError(SqlError):
    pass


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

Literal = Union[str, int, float, dt.date]


@dataclass(frozen=True)
class ColRef:
    table: Optional[str]
    column: str

    def render(self) -> str:
        return f"{self.table}.{self.column}" if self.table else self.column


@dataclass(frozen=True)
class Star:
    def render(self) -> str:
        return "*"


@dataclass(frozen=True)
class ColumnItem:
    ref: ColRef

    def render(self) -> str:
        return self.ref.render()


@dataclass(frozen=True)
class AggregateItem:
    function: str  # "SUM" | "COUNT"
    arg: Optional[ColRef]  # None means COUNT(*)

    def render(self) -> str:
        inner = self.arg.render() if self.arg else "*"
        return f"{self.function.lower()}({inner})"


SelectItem = Union[Star, ColumnItem, AggregateItem]


@dataclass(frozen=True)
class JoinEq:
    left: ColRef
    right: ColRef

    def render(self) -> str:
        return f"{self.left.render()} = {self.right.render()}"


@dataclass(frozen=True)
class Comparison:
    ref: ColRef
    op: ComparisonOp
    value: Literal

    def render(self) -> str:
        return f"{self.ref.render()} {self.op.value} {render_literal(self.value)}"


@dataclass(frozen=True)
class Disjunction:
    """OR of comparisons over one resolved column."""

    alternatives: tuple[Comparison, ...]

    def render(self) -> str:
        return "(" + " OR ".join(c.render() for c in self.alternatives) + ")"


Filter = Union[Comparison, Disjunction]


@dataclass(frozen=True)
class SqlStatement:
    select: tuple[SelectItem, ...]
    tables: tuple[str, ...]
    joins: tuple[JoinEq, ...] = ()
    filters: tuple[Filter, ...] = ()
    group_by: tuple[ColRef, ...] = ()
    order_by: Optional[tuple[Union[ColRef, AggregateItem], str]] = None  # (expr, ASC|DESC)
    limit: Optional[int] = None

    def is_aggregate(self) -> bool:
        return any(isinstance(item, AggregateItem) for item in self.select)


def render_literal(value: Literal) -> str:
    if isinstance(value, dt.date):
        return f"DATE '{value.isoformat()}'"
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


@dataclass(frozen=True)
class ResolvedAggregation:
    """An aggregation whose attribute and group-by terms became columns."""

    function: str  # "SUM" | "COUNT"
    column: Optional[ColRef]  # None means COUNT(*)
    group_by: tuple[ColRef, ...] = ()
    limit: Optional[int] = None


def generate_sql(candidate) -> SqlStatement:
    """Build a statement from a candidate (tables, joins, filters,
    aggregation).  Raises :class:`SqlError` when the table set is not
    connected by the join conditions, naming the components."""
    tables = tuple(candidate.tables)
    joins = tuple(JoinEq(ColRef(*j.left), ColRef(*j.right)) for j in candidate.joins)
    filters: list[Filter] = []
    for f in candidate.filters:
        if f.alternatives:
            filters.append(Disjunction(tuple(
                Comparison(ColRef(f.table, f.column), op, value)
                for op, value in f.alternatives)))
        else:
            filters.append(Comparison(ColRef(f.table, f.column), f.op, f.value))

    agg: Optional[ResolvedAggregation] = candidate.aggregation
    if agg is not None:
        select: tuple[SelectItem, ...] = (AggregateItem(agg.function, agg.column),)
        select += tuple(ColumnItem(c) for c in agg.group_by)
        order_by = None
        if agg.group_by or agg.limit is not None:
            # ranked aggregates: order by the aggregate, largest first
            order_by = (AggregateItem(agg.function, agg.column), "DESC")
        stmt = SqlStatement(select, tables, joins, tuple(filters),
                            group_by=agg.group_by, order_by=order_by,
                            limit=agg.limit)
    else:
        stmt = SqlStatement((Star(),), tables, joins, tuple(filters))

    if len(tables) > 1 and not _connected_tables(stmt):
        raise SqlError("table set is not connected by joins: "
                       + ", ".join(sorted(_components(stmt))))
    return normalize_statement(stmt)


# ---------------------------------------------------------------------------
# Canonical rendering
# ---------------------------------------------------------------------------

def _ordered_join(join: JoinEq, table_pos: dict[str, int]) -> JoinEq:
    lp = table_pos.get(join.left.table, len(table_pos))
    rp = table_pos.get(join.right.table, len(table_pos))
    if (rp, join.right.render()) < (lp, join.left.render()):
        return JoinEq(join.right, join.left)
    return join


def normalize_statement(stmt: SqlStatement) -> SqlStatement:
    """Sort conditions into canonical order: joins then filters, each by
    rendered text; join sides follow FROM-clause position."""
    table_pos = {t: i for i, t in enumerate(stmt.tables)}
    joins = tuple(sorted((_ordered_join(j, table_pos) for j in stmt.joins),
                         key=lambda j: j.render()))
    filters: list[Filter] = []
    for f in stmt.filters:
        if isinstance(f, Disjunction):
            f = Disjunction(tuple(sorted(f.alternatives, key=lambda c: c.render())))
        filters.append(f)
    filters.sort(key=lambda f: f.render())
    return replace(stmt, joins=joins, filters=tuple(filters))


def render(stmt: SqlStatement) -> str:
    """Canonical text: keywords uppercase, one clause per line."""
    stmt = normalize_statement(stmt)
    select = ", ".join(item.render() for item in stmt.select)
    lines = [f"SELECT {select}", "FROM " + ", ".join(stmt.tables)]
    conditions = [j.render() for j in stmt.joins] + [f.render() for f in stmt.filters]
    for i, cond in enumerate(conditions):
        lines.append(("WHERE " if i == 0 else "AND ") + cond)
    if stmt.group_by:
        lines.append("GROUP BY " + ", ".join(c.render() for c in stmt.group_by))
    if stmt.order_by:
        expr, direction = stmt.order_by
        lines.append(f"ORDER BY {expr.render()} {direction}")
    if stmt.limit is not None:
        lines.append(f"LIMIT {stmt.limit}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Parser for the subset (round-trip checks, gold standards, adapters)
# ---------------------------------------------------------------------------

_SQL_TOKEN_RE = re.compile(r"""
    \s*(?:
        (?P<string>'(?:[^']|'')*')
      | (?P<number>-?\d+(?:\.\d+)?)
      | (?P<name>[A-Za-z_][A-Za-z_0-9]*(?:\.[A-Za-z_][A-Za-z_0-9]*)?)
      | (?P<symbol><=|>=|<>|!=|[(),*=<>])
    )""", re.VERBOSE)

_KEYWORDS = {"select", "from", "where", "and", "or", "group", "by", "order",
             "limit", "asc", "desc", "like", "date", "sum", "count"}


def _sql_tokens(text: str) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _SQL_TOKEN_RE.match(text, pos)
        if not m:
            raise SqlParseError(f"bad SQL at offset {pos}: {text[pos:pos + 20]!r}")
        pos = m.end()
        if m.lastgroup == "string":
            tokens.append(("string", m.group("string")[1:-1].replace("''", "'")))
        elif m.lastgroup == "number":
            tokens.append(("number", m.group("number")))
        elif m.lastgroup == "name":
            name = m.group("name")
            if name.lower() in _KEYWORDS and "." not in name:
                tokens.append(("kw", name.lower()))
            else:
                tokens.append(("name", name))
        else:
            tokens.append(("sym", m.group("symbol")))
    return tokens


class _SqlParser:
    def __init__(self, text: str):
        self.tokens = _sql_tokens(text)
        self.pos = 0

    def peek(self) -> tuple[str, str]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else ("eof", "")

    def next(self) -> tuple[str, str]:
        tok = self.peek()
        self.pos += 1
        return tok

    def expect_kw(self, word: str) -> None:
        kind, value = self.next()
        if kind != "kw" or value != word:
            raise SqlParseError(f"expected {word.upper()}, got {value!r}")

    def accept_kw(self, word: str) -> bool:
        kind, value = self.peek()
        if kind == "kw" and value == word:
            self.pos += 1
            return True
        return False

    def accept_sym(self, symbol: str) -> bool:
        kind, value = self.peek()
        if kind == "sym" and value == symbol:
            self.pos += 1
            return True
        return False

    def parse(self) -> SqlStatement:
        self.expect_kw("select")
        select = self.parse_select_list()
        self.expect_kw("from")
        tables = self.parse_table_list()
        joins: list[JoinEq] = []
        filters: list[Filter] = []
        if self.accept_kw("where"):
            self.parse_condition(joins, filters)
            while self.accept_kw("and"):
                self.parse_condition(joins, filters)
        group_by: tuple[ColRef, ...] = ()
        if self.accept_kw("group"):
            self.expect_kw("by")
            group_by = tuple(self.parse_colref_list())
        order_by = None
        if self.accept_kw("order"):
            self.expect_kw("by")
            expr = self.parse_order_expr()
            direction = "ASC"
            if self.accept_kw("desc"):
                direction = "DESC"
            elif self.accept_kw("asc"):
                direction = "ASC"
            order_by = (expr, direction)
        limit = None
        if self.accept_kw("limit"):
            kind, value = self.next()
            if kind != "number" or "." in value:
                raise SqlParseError("LIMIT expects an integer")
            limit = int(value)
        if self.peek()[0] != "eof":
            raise SqlParseError(f"trailing tokens at {self.peek()[1]!r}")
        return SqlStatement(tuple(select), tuple(tables), tuple(joins),
                            tuple(filters), group_by, order_by, limit)

    def parse_select_list(self) -> list[SelectItem]:
        items: list[SelectItem] = [self.parse_select_item()]
        while self.accept_sym(","):
            items.append(self.parse_select_item())
        return items

    def parse_select_item(self) -> SelectItem:
        if self.accept_sym("*"):
            return Star()
        kind, value = self.peek()
        if kind == "kw" and value in ("sum", "count"):
            return self.parse_aggregate()
        return ColumnItem(self.parse_colref())

    def parse_aggregate(self) -> AggregateItem:
        _, func = self.next()
        if not self.accept_sym("("):
            raise SqlParseError(f"{func}( expected")
        arg: Optional[ColRef] = None
        if not self.accept_sym("*"):
            arg = self.parse_colref()
        if not self.accept_sym(")"):
            raise SqlParseError("missing ) after aggregate")
        return AggregateItem(func.upper(), arg)

    def parse_colref(self) -> ColRef:
        kind, value = self.next()
        if kind != "name":
            raise SqlParseError(f"expected a column reference, got {value!r}")
        if "." in value:
            table, column = value.split(".", 1)
            return ColRef(table, column)
        return ColRef(None, value)

    def parse_colref_list(self) -> list[ColRef]:
        refs = [self.parse_colref()]
        while self.accept_sym(","):
            refs.append(self.parse_colref())
        return refs

    def parse_table_list(self) -> list[str]:
        tables = []
        while True:
            kind, value = self.next()
            if kind != "name" or "." in value:
                raise SqlParseError(f"expected a table name, got {value!r}")
            tables.append(value)
            if not self.accept_sym(","):
                return tables

    def parse_order_expr(self):
        kind, value = self.peek()
        if kind == "kw" and value in ("sum", "count"):
            return self.parse_aggregate()
        return self.parse_colref()

    def parse_condition(self, joins: list[JoinEq], filters: list[Filter]) -> None:
        if self.accept_sym("("):
            alternatives = [self.parse_comparison()]
            while self.accept_kw("or"):
                alternatives.append(self.parse_comparison())
            if not self.accept_sym(")"):
                raise SqlParseError("missing ) after OR group")
            if len(alternatives) == 1:
                filters.append(alternatives[0])
            else:
                filters.append(Disjunction(tuple(alternatives)))
            return
        left = self.parse_colref()
        op = self.parse_op()
        kind, value = self.peek()
        if op is ComparisonOp.EQ and kind == "name":
            joins.append(JoinEq(left, self.parse_colref()))
            return
        filters.append(Comparison(left, op, self.parse_literal()))

    def parse_comparison(self) -> Comparison:
        ref = self.parse_colref()
        op = self.parse_op()
        return Comparison(ref, op, self.parse_literal())

    def parse_op(self) -> ComparisonOp:
        kind, value = self.next()
        if kind == "kw" and value == "like":
            return ComparisonOp.LIKE
        if kind == "sym":
            for op in ComparisonOp:
                if op.value == value:
                    return op
        raise SqlParseError(f"expected a comparison operator, got {value!r}")

    def parse_literal(self) -> Literal:
        kind, value = self.next()
        if kind == "string":
            return value
        if kind == "number":
            return float(value) if "." in value else int(value)
        if kind == "kw" and value == "date":
            kind2, value2 = self.next()
            if kind2 != "string":
                raise SqlParseError("DATE expects a quoted YYYY-MM-DD string")
            try:
                return dt.date.fromisoformat(value2)
            except ValueError as exc:
                raise SqlParseError(str(exc)) from None
        raise SqlParseError(f"expected a literal, got {value!r}")


def parse_sql(text: str) -> SqlStatement:
    return _SqlParser(text).parse()


# ---------------------------------------------------------------------------
# Resolution and validation against a store
# ---------------------------------------------------------------------------

def resolve_statement(stmt: SqlStatement, store: RelationalStore) -> SqlStatement:
    """Qualify every column with its table and type-check the statement."""
    for table in stmt.tables:
        if not store.has_table(table):
            raise SqlError(f"unknown table {table!r}")
    if len(set(stmt.tables)) != len(stmt.tables):
        raise SqlError("duplicate table in FROM (aliases are not supported)")

    def fix(ref: ColRef) -> ColRef:
        if ref.table is not None:
            if ref.table not in stmt.tables:
                raise SqlError(f"table {ref.table!r} is not in FROM")
            if ref.column not in store.table(ref.table).column_names():
                raise SqlError(f"unknown column {ref.render()!r}")
            return ref
        owners = [t for t in stmt.tables
                  if ref.column in store.table(t).column_names()]
        if not owners:
            raise SqlError(f"unknown column {ref.column!r}")
        if len(owners) > 1:
            raise SqlError(f"ambiguous column {ref.column!r} (in {owners})")
        return ColRef(owners[0], ref.column)

    def fix_filter(f: Filter) -> Filter:
        if isinstance(f, Disjunction):
            fixed = tuple(fix_filter(c) for c in f.alternatives)
            refs = {c.ref for c in fixed}
            if len(refs) != 1:
                raise SqlError("a disjunction must stay on one column")
            return Disjunction(fixed)
        ref = fix(f.ref)
        _check_literal(store, ref, f.op, f.value)
        return Comparison(ref, f.op, f.value)

    select: list[SelectItem] = []
    for item in stmt.select:
        if isinstance(item, Star):
            select.append(item)
        elif isinstance(item, ColumnItem):
            select.append(ColumnItem(fix(item.ref)))
        else:
            select.append(AggregateItem(item.function,
                                        fix(item.arg) if item.arg else None))

    joins = []
    for join in stmt.joins:
        left, right = fix(join.left), fix(join.right)
        lt = store.table(left.table).datatype(left.column)
        rt = store.table(right.table).datatype(right.column)
        if lt != rt:
            raise SqlError(f"join {join.render()} mixes {lt} and {rt} columns")
        joins.append(JoinEq(left, right))

    filters = tuple(fix_filter(f) for f in stmt.filters)
    group_by = tuple(fix(c) for c in stmt.group_by)
    order_by = stmt.order_by
    if order_by:
        expr, direction = order_by
        if isinstance(expr, AggregateItem):
            expr = AggregateItem(expr.function, fix(expr.arg) if expr.arg else None)
        else:
            expr = fix(expr)
        order_by = (expr, direction)

    resolved = SqlStatement(tuple(select), stmt.tables, tuple(joins), filters,
                            group_by, order_by, stmt.limit)
    _validate_shape(resolved, store)
    return resolved


def _check_literal(store: RelationalStore, ref: ColRef, op: ComparisonOp,
                   value: Literal) -> None:
    dtype = store.table(ref.table).datatype(ref.column)
    if op is ComparisonOp.LIKE:
        if dtype != "text" or not isinstance(value, str):
            raise SqlError(f"LIKE needs a text column and pattern ({ref.render()})")
        return
    ok = (dtype == "text" and isinstance(value, str)) \
        or (dtype == "number" and isinstance(value, (int, float))
            and not isinstance(value, bool)) \
        or (dtype == "date" and isinstance(value, dt.date))
    if not ok:
        raise SqlError(
            f"type mismatch: {ref.render()} is {dtype}, literal is {value!r}")


def _validate_shape(stmt: SqlStatement, store: RelationalStore) -> None:
    aggregates = [i for i in stmt.select if isinstance(i, AggregateItem)]
    plain = [i for i in stmt.select if isinstance(i, ColumnItem)]
    if aggregates and any(isinstance(i, Star) for i in stmt.select):
        raise SqlError("SELECT * cannot be mixed with aggregates")
    if aggregates and plain and not stmt.group_by:
        raise SqlError("non-aggregate select items require GROUP BY")
    if stmt.group_by and not aggregates:
        raise SqlError("GROUP BY without an aggregate")
    for item in plain:
        if stmt.group_by and item.ref not in stmt.group_by:
            raise SqlError(f"{item.ref.render()} is not in GROUP BY")
    if not _connected_tables(stmt):
        raise SqlError("FROM tables are not connected by the join conditions: "
                       + ", ".join(sorted(_components(stmt))))


def _components(stmt: SqlStatement) -> list[str]:
    parent: dict[str, str] = {t: t for t in stmt.tables}

    def find(t: str) -> str:
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    for join in stmt.joins:
        if join.left.table in parent and join.right.table in parent:
            parent[find(join.left.table)] = find(join.right.table)
    groups: dict[str, list[str]] = {}
    for t in stmt.tables:
        groups.setdefault(find(t), []).append(t)
    return ["|".join(sorted(g)) for g in groups.values()]


def _connected_tables(stmt: SqlStatement) -> bool:
    return len(_components(stmt)) <= 1


# ---------------------------------------------------------------------------
# Reference executor
# ---------------------------------------------------------------------------

@dataclass
class ResultSet:
    columns: list[str]
    rows: list[tuple]

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise SqlError("ragged result set")

    def as_sets(self) -> set[tuple]:
        return set(self.rows)


def _like_matcher(pattern: str):
    regex = ""
    for ch in pattern:
        if ch == "%":
            regex += ".*"
        elif ch == "_":
            regex += "."
        else:
            regex += re.escape(ch)
    compiled = re.compile(f"^{regex}$", re.DOTALL)
    return lambda text: compiled.match(text) is not None


def _compare(op: ComparisonOp, cell: Value, literal: Literal) -> bool:
    if cell is None:
        return False  # three-valued logic: unknown never satisfies
    if op is ComparisonOp.LIKE:
        return _like_matcher(str(literal))(str(cell))
    if op is ComparisonOp.EQ:
        return cell == literal
    if op is ComparisonOp.GT:
        return cell > literal
    if op is ComparisonOp.GE:
        return cell >= literal
    if op is ComparisonOp.LE:
        return cell <= literal
    return cell < literal


def _filter_ok(f: Filter, get) -> bool:
    if isinstance(f, Disjunction):
        return any(_filter_ok(c, get) for c in f.alternatives)
    return _compare(f.op, get(f.ref), f.value)


def execute(stmt: SqlStatement, store: RelationalStore,
            snippet_cap: Optional[int] = None) -> ResultSet:
    """Evaluate a statement on the store.

    Joins are hash joins over the equality conditions; filters use
    three-valued comparison semantics (NULL never matches); NULL group keys
    form their own group; ORDER BY sorts NULL first ascending, last
    descending.  ``snippet_cap`` truncates after ordering.
    """
    stmt = resolve_statement(stmt, store)

    table_columns = {t: store.table(t).column_names() for t in stmt.tables}
    filters_by_table: dict[str, list[Filter]] = {t: [] for t in stmt.tables}
    for f in stmt.filters:
        ref = f.alternatives[0].ref if isinstance(f, Disjunction) else f.ref
        filters_by_table[ref.table].append(f)

    def scan(table: str) -> list[dict[str, tuple[Value, ...]]]:
        out = []
        columns = table_columns[table]
        for row_id in sorted(store.rows(table)):
            row = store.rows(table)[row_id]

            def get(ref: ColRef, row=row, columns=columns):
                return row[columns.index(ref.column)]

            if all(_filter_ok(f, get) for f in filters_by_table[table]):
                out.append({table: row})
        return out

    def cell_of(env: dict[str, tuple[Value, ...]], ref: ColRef) -> Value:
        return env[ref.table][table_columns[ref.table].index(ref.column)]

    # join order: FROM order, preferring tables joinable to the current set
    joined = scan(stmt.tables[0])
    done = {stmt.tables[0]}
    remaining = [t for t in stmt.tables[1:]]
    pending_joins = list(stmt.joins)
    while remaining:
        pick = None
        for t in remaining:
            if any((j.left.table in done) != (j.right.table in done)
                   and t in (j.left.table, j.right.table)
                   for j in pending_joins):
                pick = t
                break
        if pick is None:
            pick = remaining[0]
        remaining.remove(pick)
        usable = [j for j in pending_joins
                  if {j.left.table, j.right.table} <= done | {pick}
                  and pick in (j.left.table, j.right.table)]
        for j in usable:
            pending_joins.remove(j)
        keys_done = [j.left if j.left.table != pick else j.right for j in usable]
        keys_new = [j.right if j.left.table != pick else j.left for j in usable]
        hash_index: dict[tuple, list[dict]] = {}
        for env in (scan(pick)):
            key = tuple(cell_of(env, k) for k in keys_new)
            if any(v is None for v in key):
                continue
            hash_index.setdefault(key, []).append(env)
        merged = []
        for env in joined:
            key = tuple(cell_of(env, k) for k in keys_done)
            if any(v is None for v in key):
                continue
            for other in hash_index.get(key, []):
                merged.append({**env, **other})
        joined = merged
        done.add(pick)
    for j in pending_joins:  # joins inside an already-joined set (cycles)
        joined = [env for env in joined
                  if cell_of(env, j.left) is not None
                  and cell_of(env, j.left) == cell_of(env, j.right)]

    # projection / aggregation
    columns: list[str] = []
    rows: list[tuple] = []
    if stmt.is_aggregate():
        for item in stmt.select:
            columns.append(item.function.lower() if isinstance(item, AggregateItem)
                           else item.ref.render())
        groups: dict[tuple, list[dict]] = {}
        for env in joined:
            key = tuple(cell_of(env, ref) for ref in stmt.group_by)
            groups.setdefault(key, []).append(env)
        if not stmt.group_by and not groups:
            groups[()] = []
        order_keys = {}
        for key in groups:
            row = []
            for item in stmt.select:
                if isinstance(item, AggregateItem):
                    row.append(_aggregate(item, groups[key], cell_of))
                else:
                    row.append(key[stmt.group_by.index(item.ref)])
            rows.append(tuple(row))
            order_keys[tuple(row)] = key
        if stmt.order_by:
            expr, direction = stmt.order_by
            def sort_value(row):
                if isinstance(expr, AggregateItem):
                    key = order_keys[row]
                    return _aggregate(expr, groups[key], cell_of)
                return order_keys[row][stmt.group_by.index(expr)]
            rows.sort(key=lambda r: _null_key(sort_value(r), direction),
                      reverse=(direction == "DESC"))
        else:
            rows.sort(key=lambda r: tuple(_null_key(v, "ASC") for v in r))
    else:
        refs: list[ColRef] = []
        for item in stmt.select:
            if isinstance(item, Star):
                for table in stmt.tables:
                    for col in table_columns[table]:
                        refs.append(ColRef(table, col))
            else:
                refs.append(item.ref)
        columns = [r.render() for r in refs]
        for env in joined:
            rows.append(tuple(cell_of(env, r) for r in refs))
        if stmt.order_by:
            expr, direction = stmt.order_by
            rows_env = list(zip(rows, joined))
            rows_env.sort(key=lambda pair: _null_key(cell_of(pair[1], expr), direction),
                          reverse=(direction == "DESC"))
            rows = [r for r, _ in rows_env]

    cap = stmt.limit
    if snippet_cap is not None:
        cap = snippet_cap if cap is None else min(cap, snippet_cap)
    if cap is not None:
        rows = rows[:cap]
    return ResultSet(columns, rows)


def _aggregate(item: AggregateItem, envs: list[dict], cell_of) -> Value:
    if item.function == "COUNT":
        if item.arg is None:
            return len(envs)
        return sum(1 for env in envs if cell_of(env, item.arg) is not None)
    values = [cell_of(env, item.arg) for env in envs]
    values = [v for v in values if v is not None]
    if not values:
        return None
    total = sum(values)
    if isinstance(total, float) and total.is_integer():
        return int(total)
    return total


def _null_key(value: Value, direction: str):
    # ascending sorts NULL first; the DESC reverse flips it to last
    return (value is not None, value if value is not None else 0)


# ---------------------------------------------------------------------------
# External engine adapter (sqlite cross-check)
# ---------------------------------------------------------------------------

class SqliteEngine:
    """Runs subset statements on an in-memory sqlite database seeded from a
    store.  Dates are stored as ISO text; LIKE is made case sensitive to
    match standard semantics."""

    _AFFINITY = {"text": "TEXT", "number": "NUMERIC", "date": "TEXT"}

    def __init__(self, store: RelationalStore):
        self.connection = sqlite3.connect(":memory:")
        self.connection.execute("PRAGMA case_sensitive_like = ON")
        for table in store.tables():
            table_def = store.table(table)
            cols = ", ".join(f'"{name}" {self._AFFINITY[dtype]}'
                             for name, dtype in table_def.columns)
            self.connection.execute(f'CREATE TABLE "{table}" ({cols})')
            placeholders = ", ".join("?" for _ in table_def.columns)
            for row_id in sorted(store.rows(table)):
                row = [v.isoformat() if isinstance(v, dt.date) else v
                       for v in store.rows(table)[row_id]]
                self.connection.execute(
                    f'INSERT INTO "{table}" VALUES ({placeholders})', row)

    def execute(self, stmt: SqlStatement) -> ResultSet:
        text = render(stmt)
        # sqlite has no DATE literal; ISO strings compare identically
        text = re.sub(r"\bDATE\s+('(?:[^']|'')*')", r"\1", text)
        cursor = self.connection.execute(text)
        columns = [d[0] for d in cursor.description]
        return ResultSet(columns, [tuple(r) for r in cursor.fetchall()])


def comparable_rows(result: ResultSet) -> list[tuple]:
    """Rows with dates flattened to ISO text, for engine-independent bags."""
    out = []
    for row in result.rows:
        out.append(tuple(v.isoformat() if isinstance(v, dt.date) else v for v in row))
    return out
