"""The query pipeline: lookup, ranking, table/join discovery, filters, SQL.

A parsed query is classified into entry points (lookup), the combinatorial
product of the alternatives forms interpretations, the best N are kept, and
each interpretation is expanded into executable candidates by walking the
metadata graph: tables and columns are recognized by pattern matches along
outgoing edges, joins come from foreign-key / join-node matches restricted
to direct paths between the entry tables, and filters merge query
predicates, base-data hits and filter annotations found in the ontology.
"""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field, replace
from typing import Optional

from . import sqlgen
from .graph import MetadataGraph
from .indexing import (BaseDataHit, ClassificationIndex, EntryPoint,
                       InvertedIndex, MetadataHit, classify)
from .patterns import PatternRegistry, match_at
from .querylang import ComparisonOp, DateLiteral, QueryAst, parse
from .sqlgen import ColRef, ResultSet, SqlError, SqlStatement, render
from .store import RelationalStore

logger = logging.getLogger(__name__)

DEFAULT_LAYER_WEIGHTS = {
    "ontology": 1.0,
    "conceptual": 0.9,
    "logical": 0.8,
    "physical": 0.7,
    "base-data": 0.6,
    "base-data-ref": 0.6,
    "synonym": 0.5,
}

DEFAULT_TOP_N = 10
DEFAULT_SNIPPET_CAP = 20

# caps on combinatorial fan-out inside one interpretation
MAX_ANCHOR_CHOICES = 16
MAX_PATHS_PER_PAIR = 8
MAX_JOIN_SETS = 32

JOIN_EDGE_PREDICATES = ("foreign_key", "foreign_key_of", "primary_key_of")


@dataclass(frozen=True)
class JoinCondition:
    left: tuple[str, str]   # primary-key side (table, column)
    right: tuple[str, str]  # foreign-key side (table, column)
    provenance: str         # foreign-key | join-node | inheritance | bridge

    def tables(self) -> tuple[str, str]:
        return (self.left[0], self.right[0])

    def key(self):
        return tuple(sorted((self.left, self.right)))

    def describe(self) -> str:
        return (f"{self.left[0]}.{self.left[1]} = "
                f"{self.right[0]}.{self.right[1]} [{self.provenance}]")


@dataclass(frozen=True)
class FilterCondition:
    table: str
    column: str
    op: ComparisonOp
    value: object
    provenance: str  # query | base-data-hit | metadata
    alternatives: tuple = ()  # non-empty: OR of (op, value) pairs on this column

    def describe(self) -> str:
        if self.alternatives:
            ors = " OR ".join(f"{op.value} {value!r}" for op, value in self.alternatives)
            return f"{self.table}.{self.column} ({ors}) [{self.provenance}]"
        return f"{self.table}.{self.column} {self.op.value} {self.value!r} [{self.provenance}]"


@dataclass(frozen=True)
class LookupUnit:
    """One classified slot of the query; interpretations pick one alternative."""

    kind: str  # keyword | pred-left | pred-right | agg-attribute | group-by
    words: tuple[str, ...]
    alternatives: tuple[Optional[EntryPoint], ...]
    ref: int = -1          # predicate / group-by position
    connective: str = "AND"  # connective in front of this unit's group


@dataclass(frozen=True)
class Interpretation:
    units: tuple[LookupUnit, ...]
    choices: tuple[Optional[EntryPoint], ...]

    def entry_points(self) -> list[EntryPoint]:
        return [c for c in self.choices if c is not None]


@dataclass
class Lookup:
    units: list[LookupUnit]
    interpretations: list[Interpretation]
    complexity: int
    diagnostics: list[str]


@dataclass
class Candidate:
    interpretation: Interpretation
    score: float
    tables: tuple[str, ...]
    joins: tuple[JoinCondition, ...]
    filters: tuple[FilterCondition, ...]
    aggregation: Optional[sqlgen.ResolvedAggregation]
    statement: Optional[SqlStatement] = None
    sql: Optional[str] = None
    snippet: Optional[ResultSet] = None
    diagnostics: tuple[str, ...] = ()

    def describe_entries(self) -> list[str]:
        return [e.describe() for e in self.interpretation.entry_points()]


@dataclass
class PipelineResult:
    query: str
    page: int
    complexity: int
    interpretation_count: int
    candidates: list[Candidate]
    diagnostics: list[str]
    elapsed: float = 0.0


# ---------------------------------------------------------------------------
# Search context: everything a query run needs, built once per workspace
# ---------------------------------------------------------------------------

class SearchContext:
    def __init__(self, graph: MetadataGraph, registry: PatternRegistry,
                 store: RelationalStore, classification: ClassificationIndex,
                 inverted: InvertedIndex,
                 layer_weights: Optional[dict[str, float]] = None,
                 top_n: int = DEFAULT_TOP_N,
                 snippet_cap: int = DEFAULT_SNIPPET_CAP):
        self.graph = graph
        self.registry = registry
        self.store = store
        self.classification = classification
        self.inverted = inverted
        self.layer_weights = dict(DEFAULT_LAYER_WEIGHTS)
        if layer_weights:
            self.layer_weights.update(layer_weights)
        self.top_n = top_n
        self.snippet_cap = snippet_cap

        # node <-> relational identity maps
        self.table_of_node: dict[str, str] = {}
        self.node_of_table: dict[str, str] = {}
        self.column_of_node: dict[str, tuple[str, str]] = {}
        self.node_of_column: dict[tuple[str, str], str] = {}
        for node, binding in self._match_everywhere("table"):
            name = binding.text("y")
            self.table_of_node[node] = name
            self.node_of_table.setdefault(name, node)
        for node, binding in self._match_everywhere("column"):
            owner = binding.node("z")
            table = self.table_of_node.get(owner)
            if table is None:
                continue
            column = binding.text("y")
            self.column_of_node[node] = (table, column)
            self.node_of_column.setdefault((table, column), node)

        # inheritance structure: child table -> parent table
        self.parent_of: dict[str, str] = {}
        for node, binding in self._match_everywhere("inheritance_child"):
            child = self.table_of_node.get(node)
            parent = self.table_of_node.get(binding.node("p"))
            if child and parent:
                self.parent_of[child] = parent

    def _match_everywhere(self, pattern_name: str):
        pattern = self.registry.get(pattern_name)
        for node in self.graph.nodes():
            for binding in match_at(self.graph, pattern, node, self.registry):
                yield node, binding

    def weight(self, layer: str) -> float:
        return self.layer_weights.get(layer, 0.0)


# ---------------------------------------------------------------------------
# Step 1: lookup
# ---------------------------------------------------------------------------

def _unit_for_phrase(ctx: SearchContext, kind: str, words: tuple[str, ...],
                     ref: int = -1) -> LookupUnit:
    """Classify one operand phrase as a whole (no window decomposition)."""
    cls = classify(ctx.classification, ctx.inverted, words)
    if len(cls.subgroups) == 1 and not cls.unmatched:
        alternatives = tuple(cls.subgroups[0])
    else:
        alternatives = ()
    return LookupUnit(kind, words, alternatives, ref)


def lookup(ast: QueryAst, ctx: SearchContext) -> Lookup:
    """Classify every keyword group and operand; build the interpretation
    product.  The number of interpretations equals the query complexity."""
    units: list[LookupUnit] = []
    diagnostics: list[str] = []
    dead = False

    for index, group in enumerate(ast.groups):
        connective = ast.connectives[index - 1] if index > 0 else "AND"
        cls = classify(ctx.classification, ctx.inverted, group)
        if cls.unmatched:
            diagnostics.append("unmatched words: " + " ".join(cls.unmatched))
        if not cls.subgroups:
            diagnostics.append(f"no entry points for {' '.join(group)!r}")
            dead = True
            continue
        for sub_index, alternatives in enumerate(cls.subgroups):
            units.append(LookupUnit(
                "keyword", alternatives[0].words, tuple(alternatives),
                connective=connective if sub_index == 0 else "AND"))

    for p_index, predicate in enumerate(ast.predicates):
        left = _unit_for_phrase(ctx, "pred-left", predicate.left, p_index)
        if not left.alternatives:
            diagnostics.append(
                f"predicate operand {' '.join(predicate.left)!r} matches no column")
            left = replace(left, alternatives=(None,))
        units.append(left)
        if isinstance(predicate.right, tuple):
            right = _unit_for_phrase(ctx, "pred-right", predicate.right, p_index)
            if right.alternatives:
                units.append(right)

    if ast.aggregation:
        agg = ast.aggregation
        if agg.attribute != ("*",):
            unit = _unit_for_phrase(ctx, "agg-attribute", agg.attribute)
            if not unit.alternatives:
                diagnostics.append(
                    f"aggregation attribute {' '.join(agg.attribute)!r} has no match")
                dead = True
            else:
                units.append(unit)
        for g_index, group in enumerate(agg.group_by):
            unit = _unit_for_phrase(ctx, "group-by", group, g_index)
            if not unit.alternatives:
                diagnostics.append(f"group by {' '.join(group)!r} has no match")
                dead = True
            else:
                units.append(unit)

    if dead or not units:
        return Lookup(units, [], 0, diagnostics)

    complexity = 1
    for unit in units:
        complexity *= len(unit.alternatives)
    interpretations = [
        Interpretation(tuple(units), choices)
        for choices in itertools.product(*(u.alternatives for u in units))
    ]
    return Lookup(units, interpretations, complexity, diagnostics)


def complexity(ast: QueryAst, ctx: SearchContext) -> int:
    """Number of combinations that can lead to a result (0 when any
    mandatory part of the query has no entry points)."""
    return lookup(ast, ctx).complexity


# ---------------------------------------------------------------------------
# Step 2: rank and top N
# ---------------------------------------------------------------------------

def score(interp: Interpretation, ctx: SearchContext) -> float:
    entries = interp.entry_points()
    if not entries:
        return 0.0
    return sum(ctx.weight(e.layer) for e in entries) / len(entries)


def rank(interpretations: list[Interpretation], n: int,
         ctx: SearchContext) -> list[tuple[Interpretation, float]]:
    """Best n interpretations by mean entry-point layer weight; ties keep
    construction order (sort is stable)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    scored = [(interp, score(interp, ctx)) for interp in interpretations]
    scored.sort(key=lambda pair: -pair[1])
    return scored[:n]


# ---------------------------------------------------------------------------
# Step 3: tables and joins
# ---------------------------------------------------------------------------

@dataclass
class Discovery:
    """What graph traversal found for one interpretation."""

    tables: set[str] = field(default_factory=set)
    columns: set[tuple[str, str]] = field(default_factory=set)
    parents: dict[str, str] = field(default_factory=dict)  # child -> parent
    metadata_filters: list[FilterCondition] = field(default_factory=list)
    anchors: list[list[str]] = field(default_factory=list)  # per entry point
    visited: set[str] = field(default_factory=set)
    diagnostics: list[str] = field(default_factory=list)


def _entry_roots(ctx: SearchContext, entry: EntryPoint) -> list[str]:
    if isinstance(entry.target, MetadataHit):
        return [entry.target.node] if ctx.graph.has_node(entry.target.node) else []
    node = ctx.node_of_column.get((entry.target.table, entry.target.column))
    return [node] if node else []


def _traverse_entry(ctx: SearchContext, entry: EntryPoint, disc: Discovery) -> None:
    """Breadth-first walk from one entry point over outgoing edges.

    Tables recognized by pattern matches are collected; the matches may pull
    in extra roots (the inheritance parent, the table owning a matched
    column) because those tables are needed to build correct SQL.  The
    nearest tables seen become the entry's anchor set.
    """
    graph, registry = ctx.graph, ctx.registry
    roots = _entry_roots(ctx, entry)
    anchor_depth: Optional[int] = None
    anchors: set[str] = set()

    if isinstance(entry.target, BaseDataHit):
        # the hit carries its table even when the column is not modeled
        disc.tables.add(entry.target.table)
        disc.columns.add((entry.target.table, entry.target.column))
        anchors.add(entry.target.table)
        anchor_depth = 0

    queue: list[tuple[str, int]] = [(n, 0) for n in roots]
    seen = set(roots)
    while queue:
        node, depth = queue.pop(0)
        disc.visited.add(node)
        found_tables: set[str] = set()

        for binding in match_at(graph, registry.get("table"), node, registry):
            found_tables.add(binding.text("y"))
        for binding in match_at(graph, registry.get("column"), node, registry):
            owner = binding.node("z")
            table = ctx.table_of_node.get(owner)
            if table:
                disc.columns.add((table, binding.text("y")))
                found_tables.add(table)
                if owner not in seen:
                    seen.add(owner)
                    queue.append((owner, depth + 1))
        for binding in match_at(graph, registry.get("inheritance_child"), node, registry):
            child = ctx.table_of_node.get(node)
            parent_node = binding.node("p")
            parent = ctx.table_of_node.get(parent_node)
            if child and parent:
                disc.parents[child] = parent
                disc.tables.add(parent)
                if parent_node not in seen:
                    seen.add(parent_node)
                    queue.append((parent_node, depth + 1))
        for binding in match_at(graph, registry.get("metadata_filter"), node, registry):
            condition = _metadata_filter(ctx, binding)
            if condition and condition not in disc.metadata_filters:
                disc.metadata_filters.append(condition)

        if found_tables:
            disc.tables.update(found_tables)
            if anchor_depth is None or depth < anchor_depth:
                anchor_depth = depth
                anchors = set(found_tables)
            elif depth == anchor_depth:
                anchors.update(found_tables)

        for triple in graph.outgoing(node):
            if not triple.obj_is_text and triple.obj not in seen:
                seen.add(triple.obj)
                queue.append((triple.obj, depth + 1))

    if not anchors:
        disc.diagnostics.append(
            f"entry {' '.join(entry.words)!r} leads to no table")
    disc.anchors.append(sorted(anchors))


def _metadata_filter(ctx: SearchContext, binding) -> Optional[FilterCondition]:
    column = ctx.column_of_node.get(binding.node("c"))
    if column is None:
        return None
    op_text = binding.text("o")
    op = next((o for o in ComparisonOp if o.value == op_text.upper() or o.value == op_text), None)
    if op is None:
        return None
    table, col = column
    try:
        value = _coerce_filter_value(ctx, table, col, binding.text("v"))
    except ValueError:
        return None
    return FilterCondition(table, col, op, value, "metadata")


def discover_tables(ctx: SearchContext, interp: Interpretation) -> Discovery:
    """Step 3, first half: tables, columns and inheritance parents reachable
    from the interpretation's entry points."""
    disc = Discovery()
    for entry in interp.entry_points():
        _traverse_entry(ctx, entry, disc)
    return disc


def discover_joins(ctx: SearchContext, visited: set[str]) -> list[JoinCondition]:
    """Step 3, second half: join conditions seen from the traversal.

    Foreign-key and join-relationship patterns are tested at every visited
    node; since join nodes point *at* columns, sources of incoming join
    edges are tested as well, so edge direction cannot hide a join.
    """
    graph, registry = ctx.graph, ctx.registry
    probes = set(visited)
    for node in visited:
        for triple in graph.incoming(node):
            if triple.predicate in JOIN_EDGE_PREDICATES:
                probes.add(triple.subject)

    joins: dict[tuple, JoinCondition] = {}
    for node in sorted(probes):
        for binding in match_at(graph, registry.get("foreign_key"), node, registry):
            condition = _join_from_columns(ctx, pk=binding.node("y"),
                                           fk=binding.node("x"),
                                           provenance="foreign-key")
            if condition:
                joins.setdefault(condition.key(), condition)
        for binding in match_at(graph, registry.get("join_relationship"), node, registry):
            condition = _join_from_columns(ctx, pk=binding.node("y"),
                                           fk=binding.node("z"),
                                           provenance="join-node")
            if condition:
                joins.setdefault(condition.key(), condition)
    return [joins[k] for k in sorted(joins)]


def _join_from_columns(ctx: SearchContext, pk: str, fk: str,
                       provenance: str) -> Optional[JoinCondition]:
    left = ctx.column_of_node.get(pk)
    right = ctx.column_of_node.get(fk)
    if left is None or right is None:
        return None
    if {ctx.parent_of.get(left[0]), ctx.parent_of.get(right[0])} & {left[0], right[0]}:
        provenance = "inheritance"
    return JoinCondition(left, right, provenance)


def _bridge_probe_nodes(ctx: SearchContext, visited: set[str]) -> set[str]:
    """Candidate bridge-table nodes around the traversal: visited tables
    plus tables owning a foreign-key column whose join points at a visited
    node (the bridge itself is never reached by outgoing edges)."""
    graph = ctx.graph
    probes = {n for n in visited if n in ctx.table_of_node}
    for node in visited:
        for triple in graph.incoming(node):
            if triple.predicate not in JOIN_EDGE_PREDICATES:
                continue
            fk_columns = [triple.subject] if triple.predicate == "foreign_key" \
                else graph.objects(triple.subject, "foreign_key_of")
            for column in fk_columns:
                info = ctx.column_of_node.get(column)
                if info:
                    owner = ctx.node_of_table.get(info[0])
                    if owner:
                        probes.add(owner)
    return probes


def discover_bridges(ctx: SearchContext, visited: set[str]) -> list[tuple[str, str, str, JoinCondition, JoinCondition]]:
    """Bridge tables seen from the traversal: (bridge, t1, t2, join1, join2)."""
    graph, registry = ctx.graph, ctx.registry
    bridges: dict[tuple, tuple] = {}
    for node in sorted(_bridge_probe_nodes(ctx, visited)):
        for binding in match_at(graph, registry.get("bridge_table"), node, registry):
            join1 = _join_from_columns(ctx, pk=binding.node("p1"),
                                       fk=binding.node("f1"), provenance="bridge")
            join2 = _join_from_columns(ctx, pk=binding.node("p2"),
                                       fk=binding.node("f2"), provenance="bridge")
            t1 = ctx.table_of_node.get(binding.node("t1"))
            t2 = ctx.table_of_node.get(binding.node("t2"))
            bridge = ctx.table_of_node.get(node)
            if not (join1 and join2 and t1 and t2 and bridge):
                continue
            key = tuple(sorted((join1.key(), join2.key())))
            bridges.setdefault((bridge,) + key, (bridge, t1, t2, join1, join2))
    return [bridges[k] for k in sorted(bridges)]

# ---------------------------------------------------------------------------
# Step 4 + 5 helpers: filters, aggregation, join path selection
# ---------------------------------------------------------------------------

def _coerce_filter_value(ctx: SearchContext, table: str, column: str, value):
    """Fit a filter value to its column datatype; ValueError on mismatch."""
    from .store import coerce

    dtype = ctx.store.table(table).datatype(column)
    if isinstance(value, DateLiteral):
        value = value.to_date()
    if isinstance(value, str):
        return coerce(value, dtype)
    import datetime as dt
    ok = (dtype == "number" and isinstance(value, (int, float))
          and not isinstance(value, bool)) \
        or (dtype == "date" and isinstance(value, dt.date))
    if not ok:
        raise ValueError(f"{table}.{column} is {dtype}, got {value!r}")
    return value


def _resolve_column(ctx: SearchContext, entry: EntryPoint) -> Optional[tuple[str, str]]:
    """Map an entry point to a physical (table, column), following
    `implements` edges downward when the hit is a higher-layer attribute."""
    if isinstance(entry.target, BaseDataHit):
        return (entry.target.table, entry.target.column)
    node = entry.target.node
    seen = set()
    queue = [node]
    while queue:
        current = queue.pop(0)
        if current in seen or not ctx.graph.has_node(current):
            continue
        seen.add(current)
        if current in ctx.column_of_node:
            return ctx.column_of_node[current]
        queue.extend(ctx.graph.objects(current, "implements"))
    return None


def _resolve_table(ctx: SearchContext, entry: EntryPoint) -> Optional[str]:
    if isinstance(entry.target, BaseDataHit):
        return entry.target.table
    node = entry.target.node
    seen = set()
    queue = [node]
    while queue:
        current = queue.pop(0)
        if current in seen or not ctx.graph.has_node(current):
            continue
        seen.add(current)
        if current in ctx.table_of_node:
            return ctx.table_of_node[current]
        queue.extend(ctx.graph.objects(current, "implements"))
    return None


def _join_graph(joins: list[JoinCondition]) -> dict[str, list[tuple[str, JoinCondition]]]:
    adjacency: dict[str, list[tuple[str, JoinCondition]]] = {}
    for join in joins:
        a, b = join.left[0], join.right[0]
        if a == b:
            continue  # self joins need aliases, outside the SQL subset
        adjacency.setdefault(a, []).append((b, join))
        adjacency.setdefault(b, []).append((a, join))
    for lst in adjacency.values():
        lst.sort(key=lambda pair: (pair[0],) + pair[1].key())
    return adjacency


def _shortest_path_joins(adjacency, start: str, goal: str) -> list[tuple[JoinCondition, ...]]:
    """All shortest paths between two tables, as join-condition tuples."""
    if start == goal:
        return [()]
    if start not in adjacency or goal not in adjacency:
        return []
    dist = {start: 0}
    preds: dict[str, list[tuple[str, JoinCondition]]] = {}
    frontier = [start]
    while frontier and goal not in dist:
        nxt: list[str] = []
        for node in frontier:
            for other, join in adjacency.get(node, []):
                if other not in dist:
                    if other not in preds:
                        nxt.append(other)
                    preds.setdefault(other, []).append((node, join))
                elif dist[other] == dist[node] + 1:
                    preds[other].append((node, join))
        for node in nxt:
            dist[node] = dist[frontier[0]] + 1
        frontier = nxt
    if goal not in dist:
        return []

    paths: list[tuple[JoinCondition, ...]] = []

    def back(node: str, acc: list[JoinCondition]):
        if len(paths) >= MAX_PATHS_PER_PAIR:
            return
        if node == start:
            paths.append(tuple(reversed(acc)))
            return
        for prev, join in preds[node]:
            if dist.get(prev, -1) == dist[node] - 1:
                back(prev, acc + [join])

    back(goal, [])
    return paths


def _join_sets_for(adjacency, anchor_tables: list[str],
                   diagnostics: list[str]) -> list[tuple[JoinCondition, ...]]:
    """Join sets covering a direct path between every pair of anchors.

    Every combination of per-pair shortest paths is a candidate join set;
    duplicate and non-minimal sets are dropped.
    """
    anchors = sorted(set(anchor_tables))
    pair_options: list[list[tuple[JoinCondition, ...]]] = []
    for i, a in enumerate(anchors):
        for b in anchors[i + 1:]:
            paths = _shortest_path_joins(adjacency, a, b)
            if not paths:
                diagnostics.append(f"no join path between {a} and {b}")
                continue
            if paths != [()]:
                pair_options.append(paths)
    if not pair_options:
        return [()]
    sets: list[frozenset[JoinCondition]] = []
    for combo in itertools.islice(itertools.product(*pair_options), MAX_JOIN_SETS):
        union = frozenset(j for path in combo for j in path)
        if union not in sets:
            sets.append(union)
    minimal = [s for s in sets if not any(other < s for other in sets)]
    minimal.sort(key=lambda s: (len(s), sorted(j.key() for j in s)))
    return [tuple(sorted(s, key=JoinCondition.key)) for s in minimal]


def _table_order(anchor_order: list[str], joins: tuple[JoinCondition, ...],
                 extra: list[str], parents: dict[str, str]) -> list[str]:
    """FROM order: anchors first, then join-path tables, then filter tables;
    inheritance parents are hoisted immediately before their first child."""
    ordered: list[str] = []

    def add(table: Optional[str]):
        if table and table not in ordered:
            ordered.append(table)

    for t in anchor_order:
        add(t)
    for join in joins:
        add(join.left[0])
        add(join.right[0])
    for t in extra:
        add(t)

    for _ in range(5):  # inheritance hierarchies are shallow
        moved = False
        for parent in sorted({p for c, p in parents.items()
                              if p in ordered and c in ordered}):
            kids = [ordered.index(c) for c, p in parents.items()
                    if p == parent and c in ordered]
            if ordered.index(parent) > min(kids):
                ordered.remove(parent)
                kids = [ordered.index(c) for c, p in parents.items()
                        if p == parent and c in ordered]
                ordered.insert(min(kids), parent)
                moved = True
        if not moved:
            break
    return ordered


def attach_filters(ctx: SearchContext, interp: Interpretation,
                   disc: Discovery, ast: QueryAst,
                   diagnostics: list[str]) -> list[FilterCondition]:
    """Merge the three filter sources: query predicates, base-data entry
    points, and filter annotations discovered in the metadata."""
    filters: list[FilterCondition] = []

    # (a) query predicates
    rights: dict[int, Optional[EntryPoint]] = {}
    lefts: dict[int, Optional[EntryPoint]] = {}
    for unit, choice in zip(interp.units, interp.choices):
        if unit.kind == "pred-left":
            lefts[unit.ref] = choice
        elif unit.kind == "pred-right":
            rights[unit.ref] = choice
    for index, predicate in enumerate(ast.predicates):
        left = lefts.get(index)
        column = _resolve_column(ctx, left) if left else None
        if column is None:
            diagnostics.append(
                f"predicate {' '.join(predicate.left)!r} has no column; filter skipped")
            continue
        value = predicate.right
        if isinstance(value, tuple):
            right_entry = rights.get(index)
            if right_entry is not None and isinstance(right_entry.target, BaseDataHit):
                value = right_entry.target.value
            else:
                value = " ".join(value)
        if predicate.op is ComparisonOp.LIKE:
            coerced = str(value)
        else:
            try:
                coerced = _coerce_filter_value(ctx, column[0], column[1], value)
            except ValueError as exc:
                diagnostics.append(f"predicate value mismatch: {exc}")
                continue
        filters.append(FilterCondition(column[0], column[1], predicate.op,
                                       coerced, "query"))

    # (b) base-data entry points, honoring OR between adjacent groups
    previous: Optional[FilterCondition] = None
    for unit, choice in zip(interp.units, interp.choices):
        if unit.kind != "keyword" or choice is None:
            continue
        if not isinstance(choice.target, BaseDataHit):
            previous = None
            continue
        hit = choice.target
        try:
            value = _coerce_filter_value(ctx, hit.table, hit.column, hit.value)
        except ValueError as exc:
            diagnostics.append(str(exc))
            continue
        condition = FilterCondition(hit.table, hit.column, ComparisonOp.EQ,
                                    value, "base-data-hit")
        if (unit.connective == "OR" and previous is not None
                and (previous.table, previous.column) == (hit.table, hit.column)):
            merged = FilterCondition(
                hit.table, hit.column, ComparisonOp.EQ, None, "base-data-hit",
                alternatives=_or_alternatives(previous) + ((ComparisonOp.EQ, value),))
            filters[filters.index(previous)] = merged
            previous = merged
            continue
        if unit.connective == "OR" and previous is not None:
            diagnostics.append(
                "OR over different columns; kept as separate candidates")
        filters.append(condition)
        previous = condition

    # (c) filters stored in the metadata
    filters.extend(disc.metadata_filters)

    return filters


def _or_alternatives(condition: FilterCondition) -> tuple:
    if condition.alternatives:
        return condition.alternatives
    return ((condition.op, condition.value),)


def _resolve_aggregation(ctx: SearchContext, interp: Interpretation,
                         ast: QueryAst,
                         diagnostics: list[str]) -> tuple[Optional[sqlgen.ResolvedAggregation], bool]:
    """Returns (aggregation, ok); ok is False when a column stayed unresolved."""
    if ast.aggregation is None:
        return None, True
    spec = ast.aggregation
    attr_entry: Optional[EntryPoint] = None
    group_entries: dict[int, EntryPoint] = {}
    for unit, choice in zip(interp.units, interp.choices):
        if unit.kind == "agg-attribute":
            attr_entry = choice
        elif unit.kind == "group-by" and choice is not None:
            group_entries[unit.ref] = choice

    column: Optional[ColRef] = None
    if spec.attribute != ("*",):
        resolved = _resolve_column(ctx, attr_entry) if attr_entry else None
        if resolved is None and attr_entry is not None and spec.function == "COUNT":
            table = _resolve_table(ctx, attr_entry)
            if table is not None:
                pk = ctx.store.table(table).primary_key
                resolved = (table, pk[0])
        if resolved is None:
            diagnostics.append(
                f"aggregate column unresolved: {' '.join(spec.attribute)!r}")
            return None, False
        if spec.function == "SUM" \
                and ctx.store.table(resolved[0]).datatype(resolved[1]) != "number":
            diagnostics.append(f"sum over non-numeric column {resolved[0]}.{resolved[1]}")
            return None, False
        column = ColRef(*resolved)

    group_by: list[ColRef] = []
    for index in range(len(spec.group_by)):
        entry = group_entries.get(index)
        resolved = _resolve_column(ctx, entry) if entry else None
        if resolved is None:
            diagnostics.append(
                f"group by column unresolved: {' '.join(spec.group_by[index])!r}")
            return None, False
        group_by.append(ColRef(*resolved))

    return sqlgen.ResolvedAggregation(spec.function, column, tuple(group_by),
                                      spec.limit), True


# ---------------------------------------------------------------------------
# Candidate construction
# ---------------------------------------------------------------------------

def build_candidates(ctx: SearchContext, interp: Interpretation,
                     interp_score: float, ast: QueryAst) -> list[Candidate]:
    disc = discover_tables(ctx, interp)
    joins_all = discover_joins(ctx, disc.visited)
    bridges = discover_bridges(ctx, disc.visited)
    adjacency = _join_graph(joins_all)

    base_diagnostics = list(disc.diagnostics)
    filters = attach_filters(ctx, interp, disc, ast, base_diagnostics)
    aggregation, agg_ok = _resolve_aggregation(ctx, interp, ast, base_diagnostics)

    entries = interp.entry_points()
    anchor_lists = [a for a in disc.anchors if a]
    candidates: list[Candidate] = []
    anchor_choices = list(itertools.islice(
        itertools.product(*anchor_lists), MAX_ANCHOR_CHOICES)) or [()]

    for anchor_choice in anchor_choices:
        anchor_order = list(dict.fromkeys(anchor_choice))
        path_diags: list[str] = []
        join_sets = _join_sets_for(adjacency, anchor_order, path_diags)
        for join_set in join_sets:
            diagnostics = base_diagnostics + path_diags
            joins = list(join_set)

            # bridge tables connecting two anchors contribute their joins
            # (already-found conditions are relabeled as bridge joins)
            for bridge, t1, t2, join1, join2 in bridges:
                if t1 in anchor_order and t2 in anchor_order:
                    for extra in (join1, join2):
                        keys = {j.key(): i for i, j in enumerate(joins)}
                        if extra.key() in keys:
                            joins[keys[extra.key()]] = extra
                        else:
                            joins.append(extra)

            filter_tables = sorted({f.table for f in filters})
            tables = _table_order(anchor_order, tuple(joins), filter_tables,
                                  disc.parents)

            # inheritance parents join in so subtype rows carry full identity
            applied_parents: dict[str, str] = {}
            for child in list(tables):
                parent = disc.parents.get(child)
                if not parent:
                    continue
                link = _find_join(joins_all, child, parent)
                if link is None:
                    diagnostics.append(
                        f"no join between {child} and parent {parent}")
                    continue
                applied_parents[child] = parent
                if link.key() not in {j.key() for j in joins}:
                    joins.append(link)
            tables = _table_order(anchor_order, tuple(joins), filter_tables,
                                  applied_parents)

            candidate = Candidate(
                interpretation=interp,
                score=interp_score,
                tables=tuple(tables),
                joins=tuple(sorted(joins, key=JoinCondition.key)),
                filters=tuple(filters),
                aggregation=aggregation,
                diagnostics=tuple(diagnostics),
            )
            if agg_ok:
                _render_and_execute(ctx, candidate)
            candidates.append(candidate)
    return candidates


def _find_join(joins: list[JoinCondition], a: str, b: str) -> Optional[JoinCondition]:
    for join in joins:
        if set(join.tables()) == {a, b}:
            return join
    return None


def _render_and_execute(ctx: SearchContext, candidate: Candidate) -> None:
    try:
        statement = sqlgen.generate_sql(candidate)
    except SqlError as exc:
        candidate.diagnostics += (f"SQL generation failed: {exc}",)
        return
    candidate.statement = statement
    candidate.sql = render(statement)
    try:
        candidate.snippet = sqlgen.execute(statement, ctx.store, ctx.snippet_cap)
    except SqlError as exc:
        candidate.diagnostics += (f"execution failed: {exc}",)


# ---------------------------------------------------------------------------
# End to end
# ---------------------------------------------------------------------------

def run_pipeline(raw: str, ctx: SearchContext, page: int = 0) -> PipelineResult:
    """Parse, look up, rank, discover, filter, and render the page's
    candidates.  Page k covers the interpretations ranked [k*N, (k+1)*N)."""
    started = time.perf_counter()
    ast = parse(raw)
    lk = lookup(ast, ctx)
    result = PipelineResult(query=raw, page=page, complexity=lk.complexity,
                            interpretation_count=len(lk.interpretations),
                            candidates=[], diagnostics=list(lk.diagnostics))
    if lk.interpretations:
        ranked = rank(lk.interpretations, len(lk.interpretations), ctx)
        window = ranked[page * ctx.top_n:(page + 1) * ctx.top_n]
        for interp, interp_score in window:
            result.candidates.extend(build_candidates(ctx, interp, interp_score, ast))
    result.elapsed = time.perf_counter() - started
    return result
