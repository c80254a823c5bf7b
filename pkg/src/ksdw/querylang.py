"""Input query language: keyword groups, AND/OR, comparisons, aggregation.

The accepted grammar (case-insensitive keywords)::

    <search keywords> [ [AND|OR] <search keywords>
                      | <comparison operator> <operand> ]...
    <comparison operator> ::= > | >= | = | <= | < | like
    <operand>             ::= date(YYYY-MM-DD) | number | <search keywords>

    [top N] <sum|count> ( <attribute> ) [<search keywords>]
            [group by ( <attr1> [, <attrN>]... )]

``select count()`` is accepted as an alias of ``count (*)``.  AND/OR binds
left to right; words that are neither operators nor connectives stay inside
keyword groups and are classified later by the lookup step.
"""

from __future__ import annotations

import datetime as dt
import re
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union


class QueryParseError(Exception):
    """The input query does not follow the grammar."""


class ComparisonOp(Enum):
    GT = ">"
    GE = ">="
    EQ = "="
    LE = "<="
    LT = "<"
    LIKE = "LIKE"


@dataclass(frozen=True)
class DateLiteral:
    year: int
    month: int
    day: int

    def __post_init__(self):
        try:
            dt.date(self.year, self.month, self.day)
        except ValueError as exc:
            raise QueryParseError(
                f"invalid date {self.year:04d}-{self.month:02d}-{self.day:02d}: {exc}"
            ) from exc

    def to_date(self) -> dt.date:
        return dt.date(self.year, self.month, self.day)

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}-{self.day:02d}"


KeywordGroup = tuple[str, ...]

Operand = Union[DateLiteral, int, float, KeywordGroup]


@dataclass(frozen=True)
class Predicate:
    left: KeywordGroup
    op: ComparisonOp
    right: Operand


@dataclass(frozen=True)
class AggregationSpec:
    function: str  # "SUM" | "COUNT"
    attribute: KeywordGroup  # ("*",) means count rows
    group_by: tuple[KeywordGroup, ...] = ()
    # "top N" prefix: limit with descending order on the aggregate
    limit: Optional[int] = None


@dataclass(frozen=True)
class QueryAst:
    groups: tuple[KeywordGroup, ...] = ()
    connectives: tuple[str, ...] = ()  # between adjacent groups: "AND" | "OR"
    predicates: tuple[Predicate, ...] = ()
    aggregation: Optional[AggregationSpec] = None

    def is_empty(self) -> bool:
        return not (self.groups or self.predicates or self.aggregation)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # word | op | and | or | like | date | agg | groupby | top
    value: object = None


_COMPARISON = {">": ComparisonOp.GT, ">=": ComparisonOp.GE, "=": ComparisonOp.EQ,
               "<=": ComparisonOp.LE, "<": ComparisonOp.LT}
_DATE_RE = re.compile(r"^(\d{4})-(\d{2})-(\d{2})$")
_NUMBER_RE = re.compile(r"^-?\d+(\.\d+)?$")


def _split_symbols(raw: str) -> list[str]:
    """Whitespace split, keeping comparison symbols and parens standalone."""
    spaced = re.sub(r"(>=|<=|>|<|=|\(|\)|,)", r" \1 ", raw)
    return spaced.split()


def _parse_date_arg(arg: str) -> DateLiteral:
    m = _DATE_RE.match(arg.strip())
    if not m:
        raise QueryParseError(f"date() expects YYYY-MM-DD, got {arg.strip()!r}")
    return DateLiteral(int(m.group(1)), int(m.group(2)), int(m.group(3)))


def _collect_paren_args(parts: list[str], i: int, context: str) -> tuple[list[list[str]], int]:
    """Consume '( w w , w ... )' starting at parts[i]; returns comma-split args."""
    if i >= len(parts) or parts[i] != "(":
        raise QueryParseError(f"{context}: expected '('")
    args: list[list[str]] = [[]]
    i += 1
    while i < len(parts):
        part = parts[i]
        if part == ")":
            if args == [[]]:
                args = []
            return args, i + 1
        if part == "(":
            raise QueryParseError(f"{context}: nested parentheses")
        if part == ",":
            args.append([])
        else:
            args[-1].append(part)
        i += 1
    raise QueryParseError(f"{context}: unbalanced parentheses")


def tokenize(raw: str) -> list[Token]:
    """Split a query string into tokens, folding operator argument lists."""
    if not raw or not raw.strip():
        raise QueryParseError("empty query")
    parts = _split_symbols(raw)
    tokens: list[Token] = []
    i = 0
    while i < len(parts):
        part = parts[i]
        low = part.lower()
        if low in ("select",) and i + 1 < len(parts) and parts[i + 1].lower() == "count":
            # `select count()` alias: treated below by the count branch
            i += 1
            continue
        if part in _COMPARISON:
            tokens.append(Token("op", _COMPARISON[part]))
            i += 1
        elif low == "like":
            tokens.append(Token("op", ComparisonOp.LIKE))
            i += 1
        elif low == "and":
            tokens.append(Token("and"))
            i += 1
        elif low == "or":
            tokens.append(Token("or"))
            i += 1
        elif low == "top" and i + 1 < len(parts) and parts[i + 1].isdigit():
            tokens.append(Token("top", int(parts[i + 1])))
            i += 2
        elif low == "date" and i + 1 < len(parts) and parts[i + 1] == "(":
            args, i = _collect_paren_args(parts, i + 1, "date")
            if len(args) != 1 or len(args[0]) != 1:
                raise QueryParseError("date() expects exactly one YYYY-MM-DD value")
            tokens.append(Token("date", _parse_date_arg(args[0][0])))
        elif low in ("sum", "count") and i + 1 < len(parts) and parts[i + 1] == "(":
            args, i = _collect_paren_args(parts, i + 1, low)
            if low == "count" and not args:
                attribute: KeywordGroup = ("*",)
            elif len(args) == 1 and args[0] == ["*"]:
                attribute = ("*",)
            elif len(args) == 1 and args[0]:
                attribute = tuple(args[0])
            else:
                raise QueryParseError(f"{low}() expects one attribute")
            tokens.append(Token("agg", (low.upper(), attribute)))
        elif low == "group" and i + 1 < len(parts) and parts[i + 1].lower() == "by":
            args, i = _collect_paren_args(parts, i + 2, "group by")
            if not args or any(not a for a in args):
                raise QueryParseError("group by () expects at least one attribute")
            tokens.append(Token("groupby", tuple(tuple(a) for a in args)))
        elif part in ("(", ")", ","):
            raise QueryParseError(f"unexpected {part!r} outside an operator")
        else:
            tokens.append(Token("word", part))
            i += 1
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def parse_query(tokens: list[Token]) -> QueryAst:
    if not tokens:
        raise QueryParseError("empty query")

    groups: list[KeywordGroup] = []
    connectives: list[str] = []
    predicates: list[Predicate] = []
    agg_function: Optional[str] = None
    agg_attribute: Optional[KeywordGroup] = None
    group_by: tuple[KeywordGroup, ...] = ()
    limit: Optional[int] = None

    current: list[str] = []
    pending_connective: Optional[str] = None

    def close_group():
        nonlocal current, pending_connective
        if current:
            if groups and pending_connective is None:
                # adjacent groups with no explicit connective default to AND
                connectives.append("AND")
            elif groups:
                connectives.append(pending_connective)
            groups.append(tuple(current))
            current = []
        pending_connective = None

    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.kind == "word":
            current.append(str(tok.value) if tok.value is not None else "")
            i += 1
        elif tok.kind in ("and", "or"):
            close_group()
            pending_connective = tok.kind.upper()
            i += 1
        elif tok.kind == "op":
            if not current:
                raise QueryParseError("comparison operator without a left operand")
            left = tuple(current)
            current = []
            op: ComparisonOp = tok.value
            i += 1
            right, i = _parse_operand(tokens, i, op)
            predicates.append(Predicate(left, op, right))
            pending_connective = None
        elif tok.kind == "date":
            raise QueryParseError("date() literal outside a comparison")
        elif tok.kind == "top":
            limit = int(tok.value)
            i += 1
        elif tok.kind == "agg":
            if agg_function is not None:
                raise QueryParseError("only one aggregation operator is allowed")
            agg_function, agg_attribute = tok.value
            i += 1
        elif tok.kind == "groupby":
            if group_by:
                raise QueryParseError("only one group by is allowed")
            group_by = tok.value
            i += 1
        else:  # pragma: no cover - all kinds handled above
            raise QueryParseError(f"unexpected token {tok.kind}")
    close_group()

    if group_by and agg_function is None:
        raise QueryParseError("group by requires an aggregation operator")
    if limit is not None and agg_function is None:
        raise QueryParseError("top N requires an aggregation operator")

    aggregation = None
    if agg_function is not None:
        if not agg_attribute:
            raise QueryParseError("aggregation with empty attribute")
        aggregation = AggregationSpec(agg_function, agg_attribute, group_by, limit)

    ast = QueryAst(tuple(groups), tuple(connectives), tuple(predicates), aggregation)
    if ast.is_empty():
        raise QueryParseError("query has no keywords, predicates or aggregation")
    return ast


def _parse_operand(tokens: list[Token], i: int, op: ComparisonOp) -> tuple[Operand, int]:
    if i >= len(tokens):
        raise QueryParseError(f"comparison operator {op.value} is missing its right operand")
    tok = tokens[i]
    if tok.kind == "date":
        return tok.value, i + 1
    if tok.kind == "word":
        first = str(tok.value)
        if op is not ComparisonOp.LIKE and _NUMBER_RE.match(first):
            return (float(first) if "." in first else int(first)), i + 1
        # LIKE operands pass through verbatim (wildcards intact); keyword
        # operands run to the next connective/operator token.
        words = []
        while i < len(tokens) and tokens[i].kind == "word":
            words.append(str(tokens[i].value))
            i += 1
        return tuple(words), i
    raise QueryParseError(f"bad right operand for {op.value}")


def parse(raw: str) -> QueryAst:
    return parse_query(tokenize(raw))


# ---------------------------------------------------------------------------
# Canonical text (round-trip support)
# ---------------------------------------------------------------------------

def render_operand(value: Operand) -> str:
    if isinstance(value, DateLiteral):
        return f"date({value})"
    if isinstance(value, tuple):
        return " ".join(value)
    return str(value)


def render_query(ast: QueryAst) -> str:
    """Canonical text form; re-parsing it yields a structurally equal AST.

    Predicates render before plain keyword groups (separated by an explicit
    ``and``) so group words never merge into a predicate's operands.
    """
    parts: list[str] = []
    if ast.aggregation and ast.aggregation.limit is not None:
        parts.append(f"top {ast.aggregation.limit}")
    if ast.aggregation:
        attr = " ".join(ast.aggregation.attribute) \
            if ast.aggregation.attribute != ("*",) else "*"
        parts.append(f"{ast.aggregation.function.lower()} ({attr})")
    for idx, pred in enumerate(ast.predicates):
        if idx > 0:
            parts.append("and")
        op = pred.op.value.lower() if pred.op is ComparisonOp.LIKE else pred.op.value
        parts.append(f"{' '.join(pred.left)} {op} {render_operand(pred.right)}")
    for idx, group in enumerate(ast.groups):
        if idx > 0:
            parts.append(ast.connectives[idx - 1].lower())
        elif ast.predicates:
            parts.append("and")
        parts.append(" ".join(group))
    if ast.aggregation and ast.aggregation.group_by:
        attrs = ", ".join(" ".join(g) for g in ast.aggregation.group_by)
        parts.append(f"group by ({attrs})")
    return " ".join(parts)
