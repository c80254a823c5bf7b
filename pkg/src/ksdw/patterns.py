"""Graph pattern language: triple constraints with variables and backtracking.

A pattern is a conjunction of clauses over a root variable ``x``::

    ( x tablename t:y ) & ( x type physical_table )

Term syntax inside a clause:

* a single letter optionally followed by digits (``x``, ``y``, ``c1``) is a
  variable; it binds to a node id and keeps that value for the whole match,
* ``t:`` marks a text-label term; ``t:y`` is a variable binding to a label,
  ``t:high`` (anything not variable-shaped) is a literal label,
* any other token is a static node id,
* ``( v matches-column )`` requires that the pattern registered under the
  name ``column`` has at least one binding rooted at ``v``,
* ``( a != b )`` requires two bound variables to hold distinct values.

Predicates are always static.  Clauses are evaluated in source order by
depth-first unification with backtracking.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from .graph import MetadataGraph, UnknownNodeError

_VARIABLE_RE = re.compile(r"^[a-z][0-9]*$")


class PatternError(Exception):
    """Pattern source could not be parsed or registered."""


@dataclass(frozen=True)
class Term:
    """One term of a clause: a variable, a static node, or a text label."""

    kind: str  # "var" | "node" | "text"
    value: str
    is_text: bool = False  # for kind == "var": must bind a text label

    @property
    def is_var(self) -> bool:
        return self.kind == "var"


@dataclass(frozen=True)
class EdgeClause:
    subject: Term
    predicate: str
    obj: Term


@dataclass(frozen=True)
class RefClause:
    var: str
    pattern_name: str


@dataclass(frozen=True)
class NotEqualClause:
    left: str
    right: str


Clause = Union[EdgeClause, RefClause, NotEqualClause]

ROOT_VAR = "x"


@dataclass(frozen=True)
class Pattern:
    name: str
    clauses: tuple[Clause, ...]

    def variables(self) -> set[str]:
        out: set[str] = set()
        for c in self.clauses:
            if isinstance(c, EdgeClause):
                if c.subject.is_var:
                    out.add(c.subject.value)
                if c.obj.is_var:
                    out.add(c.obj.value)
            elif isinstance(c, RefClause):
                out.add(c.var)
            else:
                out.update((c.left, c.right))
        return out

    def references(self) -> set[str]:
        return {c.pattern_name for c in self.clauses if isinstance(c, RefClause)}


class Binding:
    """An assignment of pattern variables to node ids or text labels.

    Values are ``(is_text, value)`` pairs internally; ``node(var)`` and
    ``text(var)`` unwrap them.
    """

    __slots__ = ("_values",)

    def __init__(self, values: dict[str, tuple[bool, str]]):
        self._values = values

    def __contains__(self, var: str) -> bool:
        return var in self._values

    def __eq__(self, other) -> bool:
        return isinstance(other, Binding) and self._values == other._values

    def __hash__(self) -> int:
        return hash(frozenset(self._values.items()))

    def variables(self) -> list[str]:
        return sorted(self._values)

    def raw(self, var: str) -> tuple[bool, str]:
        return self._values[var]

    def node(self, var: str) -> str:
        is_text, value = self._values[var]
        if is_text:
            raise KeyError(f"variable {var!r} is bound to a text label")
        return value

    def text(self, var: str) -> str:
        is_text, value = self._values[var]
        if not is_text:
            raise KeyError(f"variable {var!r} is bound to a node")
        return value

    def sort_key(self):
        return tuple(sorted(self._values.items()))

    def __repr__(self) -> str:
        inner = ", ".join(
            f"{v}={'t:' if t else ''}{val}" for v, (t, val) in sorted(self._values.items()))
        return f"Binding({inner})"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _parse_term(token: str, position: str) -> Term:
    if token.startswith("t:"):
        name = token[2:]
        if not name:
            raise PatternError("empty text term 't:'")
        if _VARIABLE_RE.match(name):
            return Term("var", name, is_text=True)
        return Term("text", name)
    if _VARIABLE_RE.match(token):
        return Term("var", token)
    if position == "subject" or position == "object":
        return Term("node", token)
    raise PatternError(f"unexpected term {token!r}")


def _split_clauses(text: str) -> list[list[str]]:
    """Split ``( ... ) & ( ... )`` into token lists, checking balance."""
    clauses: list[list[str]] = []
    depth = 0
    current: list[str] = []
    buf = ""

    def flush_token():
        nonlocal buf
        if buf:
            current.append(buf)
            buf = ""

    for ch in text:
        if ch == "(":
            if depth:
                raise PatternError("nested parentheses are not allowed")
            depth = 1
            current = []
        elif ch == ")":
            if not depth:
                raise PatternError("unbalanced parentheses")
            flush_token()
            clauses.append(current)
            depth = 0
        elif depth:
            if ch.isspace():
                flush_token()
            else:
                buf += ch
        elif ch == "&" or ch.isspace():
            continue
        else:
            raise PatternError(f"unexpected character {ch!r} outside clause")
    if depth:
        raise PatternError("unbalanced parentheses")
    if not clauses:
        raise PatternError("pattern has no clauses")
    return clauses


def parse_pattern(name: str, text: str) -> Pattern:
    """Parse one pattern body. Raises :class:`PatternError` on bad syntax."""
    clauses: list[Clause] = []
    for tokens in _split_clauses(text):
        if len(tokens) == 2 and tokens[1].startswith("matches-"):
            var = tokens[0]
            if not _VARIABLE_RE.match(var):
                raise PatternError(f"reference clause needs a variable, got {var!r}")
            ref = tokens[1][len("matches-"):]
            if not ref:
                raise PatternError("empty pattern reference")
            clauses.append(RefClause(var, ref))
            continue
        if len(tokens) == 3 and tokens[1] == "!=":
            left, right = tokens[0], tokens[2]
            for v in (left, right):
                if not _VARIABLE_RE.match(v):
                    raise PatternError(f"'!=' needs variables, got {v!r}")
            clauses.append(NotEqualClause(left, right))
            continue
        if len(tokens) != 3:
            raise PatternError(
                f"clause needs subject, predicate and object, got {tokens}")
        subject = _parse_term(tokens[0], "subject")
        if subject.kind == "text":
            raise PatternError("clause subject cannot be a text label")
        predicate = tokens[1]
        if _VARIABLE_RE.match(predicate) or predicate.startswith("t:"):
            raise PatternError(f"predicate must be static, got {predicate!r}")
        obj = _parse_term(tokens[2], "object")
        clauses.append(EdgeClause(subject, predicate, obj))

    pattern = Pattern(name, tuple(clauses))
    _check_connected(pattern)
    return pattern


def _check_connected(pattern: Pattern) -> None:
    """Every variable must be reachable from the root through clause chains."""
    variables = pattern.variables()
    if ROOT_VAR not in variables:
        raise PatternError(f"pattern {pattern.name!r} never uses the root variable 'x'")
    adjacent: dict[str, set[str]] = {v: set() for v in variables}
    for c in pattern.clauses:
        if isinstance(c, EdgeClause):
            ends = [t.value for t in (c.subject, c.obj) if t.is_var]
            for a in ends:
                for b in ends:
                    adjacent[a].add(b)
        elif isinstance(c, NotEqualClause):
            adjacent[c.left].add(c.right)
            adjacent[c.right].add(c.left)
    seen = {ROOT_VAR}
    queue = [ROOT_VAR]
    while queue:
        for nxt in adjacent[queue.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    floating = variables - seen
    if floating:
        raise PatternError(
            f"pattern {pattern.name!r}: variables not connected to x: {sorted(floating)}")


def parse_pattern_file(text: str) -> list[Pattern]:
    """Parse ``pattern <name>:`` blocks separated by blank lines."""
    patterns: list[Pattern] = []
    header: str | None = None
    body: list[str] = []

    def close_block():
        nonlocal header, body
        if header is None:
            if any(line.strip() for line in body):
                raise PatternError("clause text before any 'pattern <name>:' header")
            body = []
            return
        patterns.append(parse_pattern(header, "\n".join(body)))
        header, body = None, []

    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("#"):
            continue
        if not stripped:
            close_block()
            continue
        if stripped.startswith("pattern ") and stripped.endswith(":"):
            close_block()
            header = stripped[len("pattern "):-1].strip()
            if not header:
                raise PatternError("empty pattern name")
            continue
        body.append(stripped)
    close_block()
    return patterns


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

class PatternRegistry:
    """Named patterns; registration validates references and rejects cycles."""

    def __init__(self):
        self._patterns: dict[str, Pattern] = {}

    def register(self, pattern: Pattern) -> None:
        for ref in pattern.references():
            if ref != pattern.name and ref not in self._patterns:
                raise PatternError(
                    f"pattern {pattern.name!r} references unknown pattern {ref!r}")
        if self._reaches_itself(pattern):
            raise PatternError(f"pattern {pattern.name!r} is recursive")
        self._patterns[pattern.name] = pattern

    def register_source(self, text: str) -> None:
        for pattern in parse_pattern_file(text):
            self.register(pattern)

    def register_file(self, path: str | Path) -> None:
        self.register_source(Path(path).read_text(encoding="utf-8"))

    def _reaches_itself(self, pattern: Pattern) -> bool:
        stack = list(pattern.references())
        seen: set[str] = set()
        while stack:
            name = stack.pop()
            if name == pattern.name:
                return True
            if name in seen or name not in self._patterns:
                continue
            seen.add(name)
            stack.extend(self._patterns[name].references())
        return False

    def get(self, name: str) -> Pattern:
        try:
            return self._patterns[name]
        except KeyError:
            raise PatternError(f"no pattern registered under {name!r}") from None

    def names(self) -> list[str]:
        return sorted(self._patterns)

    def __contains__(self, name: str) -> bool:
        return name in self._patterns


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------

def match_at(graph: MetadataGraph, pattern: Pattern, node: str,
             registry: PatternRegistry | None = None) -> list[Binding]:
    """All bindings of `pattern` with the root variable fixed to `node`.

    Returns the empty list when nothing matches; results are sorted by
    their bound values so the order is stable across runs.
    """
    if not graph.has_node(node):
        raise UnknownNodeError(f"unknown node <{node}>")
    registry = registry or PatternRegistry()
    results: list[dict[str, tuple[bool, str]]] = []
    _solve(graph, pattern.clauses, 0, {ROOT_VAR: (False, node)}, registry, results)
    bindings = [Binding(dict(values)) for values in results]
    unique = sorted(set(bindings), key=Binding.sort_key)
    return unique


def match_all(graph: MetadataGraph, pattern: Pattern,
              registry: PatternRegistry | None = None) -> list[tuple[str, Binding]]:
    """Concatenation of :func:`match_at` over every node, in node order."""
    out: list[tuple[str, Binding]] = []
    for node in graph.nodes():
        for binding in match_at(graph, pattern, node, registry):
            out.append((node, binding))
    return out


def _resolve(term: Term, env: dict[str, tuple[bool, str]]):
    """Return (is_text, value) for bound/static terms, None for free vars."""
    if term.kind == "node":
        return (False, term.value)
    if term.kind == "text":
        return (True, term.value)
    return env.get(term.value)


def _bind(term: Term, value: tuple[bool, str],
          env: dict[str, tuple[bool, str]]) -> bool:
    """Try to bind a term to a value; returns False on conflict."""
    is_text, _ = value
    if term.kind == "var":
        if term.is_text != is_text:
            return False
        current = env.get(term.value)
        if current is None:
            env[term.value] = value
            return True
        return current == value
    return _resolve(term, {}) == value


def _solve(graph: MetadataGraph, clauses: tuple[Clause, ...], index: int,
           env: dict[str, tuple[bool, str]], registry: PatternRegistry,
           results: list[dict[str, tuple[bool, str]]]) -> None:
    if index == len(clauses):
        results.append(dict(env))
        return
    clause = clauses[index]

    if isinstance(clause, NotEqualClause):
        left, right = env.get(clause.left), env.get(clause.right)
        if left is None or right is None:
            raise PatternError(
                f"'!=' on unbound variable; reorder clauses ({clause.left}, {clause.right})")
        if left != right:
            _solve(graph, clauses, index + 1, env, registry, results)
        return

    if isinstance(clause, RefClause):
        value = env.get(clause.var)
        if value is None:
            raise PatternError(f"reference clause on unbound variable {clause.var!r}")
        is_text, node = value
        if is_text:
            return  # sub-patterns are rooted at nodes
        sub = registry.get(clause.pattern_name)
        if match_at(graph, sub, node, registry):
            _solve(graph, clauses, index + 1, env, registry, results)
        return

    subject = _resolve(clause.subject, env)
    obj = _resolve(clause.obj, env)

    if subject is not None:
        if subject[0]:
            return  # text labels have no outgoing edges
        if not graph.has_node(subject[1]):
            return
        candidates = [t for t in graph.outgoing(subject[1])
                      if t.predicate == clause.predicate]
    elif obj is not None and not obj[0]:
        if not graph.has_node(obj[1]):
            return
        candidates = [t for t in graph.incoming(obj[1])
                      if t.predicate == clause.predicate]
    else:
        # neither end bound (or object is a known text label): scan by predicate
        candidates = list(graph.with_predicate(clause.predicate))

    for triple in candidates:
        trial = dict(env)
        if not _bind(clause.subject, (False, triple.subject), trial):
            continue
        if not _bind(clause.obj, (triple.obj_is_text, triple.obj), trial):
            continue
        _solve(graph, clauses, index + 1, trial, registry, results)


# ---------------------------------------------------------------------------
# Built-in patterns
# ---------------------------------------------------------------------------

def builtin_pattern_source() -> str:
    from importlib.resources import files

    return files("ksdw.data").joinpath("builtin_patterns.txt").read_text("utf-8")


def builtin_registry() -> PatternRegistry:
    registry = PatternRegistry()
    registry.register_source(builtin_pattern_source())
    return registry
