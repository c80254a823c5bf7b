"""Metadata graph: an immutable, layered triple store with adjacency indexes.

The graph holds schema nodes (conceptual / logical / physical), domain
ontology concepts, and synonym entries.  Triples either connect two nodes
or attach a text label to a node.  The on-disk format is one triple per
line, tab-separated: ``subject<TAB>predicate<TAB>object``, where a node
object is written ``<uri>`` and a text label is a bare string.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

logger = logging.getLogger(__name__)

LAYERS = ("conceptual", "logical", "physical", "ontology", "synonym", "base-data-ref")
DEFAULT_LAYER = "physical"

# Predicates with special meaning to the index builders and the pipeline.
# Any other predicate is a plain edge.
RESERVED_PREDICATES = frozenset({
    "type", "layer", "tablename", "columnname", "column", "foreign_key",
    "primary_key_of", "foreign_key_of", "inheritance_child",
    "inheritance_parent", "synonym_of", "concept_label",
    "filter_column", "filter_op", "filter_value", "implements",
})


class GraphError(Exception):
    """Base class for metadata-graph failures."""


class GraphFormatError(GraphError):
    """A line in a graph file could not be parsed."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class UnknownNodeError(GraphError):
    """A node id was used that does not exist in the graph."""


@dataclass(frozen=True)
class Triple:
    """One edge: node -> node, or node -> text label."""

    subject: str
    predicate: str
    obj: str
    obj_is_text: bool = False

    def sort_key(self):
        return (self.predicate, self.obj, self.obj_is_text, self.subject)

    def __str__(self) -> str:
        obj = self.obj if self.obj_is_text else f"<{self.obj}>"
        return f"<{self.subject}> {self.predicate} {obj}"


class MetadataGraph:
    """Immutable directed labeled multigraph over opaque node ids.

    Every node appearing anywhere in a triple is indexed; ``outgoing`` and
    ``incoming`` adjacency lists are kept mutually consistent.  Layer tags
    come from each node's ``layer`` triple and default to ``physical``.
    """

    def __init__(self, triples: Iterable[Triple]):
        tset: set[Triple] = set(triples)
        out: dict[str, list[Triple]] = {}
        inc: dict[str, list[Triple]] = {}
        by_pred: dict[str, list[Triple]] = {}
        layers: dict[str, str] = {}

        for t in tset:
            out.setdefault(t.subject, []).append(t)
            by_pred.setdefault(t.predicate, []).append(t)
            if not t.obj_is_text:
                inc.setdefault(t.obj, []).append(t)
                out.setdefault(t.obj, [])
            if t.predicate == "layer" and t.obj_is_text:
                if t.obj not in LAYERS:
                    raise GraphFormatError(
                        f"unknown layer {t.obj!r} for node <{t.subject}>")
                layers[t.subject] = t.obj

        for node in out:
            inc.setdefault(node, [])
        for adj in (out, inc, by_pred):
            for lst in adj.values():
                lst.sort(key=Triple.sort_key)

        for node in out:
            if node not in layers:
                logger.warning("node <%s> has no layer triple; defaulting to %s",
                               node, DEFAULT_LAYER)
                layers[node] = DEFAULT_LAYER

        self._triples = frozenset(tset)
        self._out = {n: tuple(ts) for n, ts in out.items()}
        self._in = {n: tuple(ts) for n, ts in inc.items()}
        self._by_pred = {p: tuple(ts) for p, ts in by_pred.items()}
        self._layers = layers

    # -- basic accessors ----------------------------------------------------

    @property
    def triples(self) -> frozenset[Triple]:
        return self._triples

    def __len__(self) -> int:
        return len(self._triples)

    def node_count(self) -> int:
        return len(self._out)

    def nodes(self) -> list[str]:
        return sorted(self._out)

    def has_node(self, node: str) -> bool:
        return node in self._out

    def _require(self, node: str) -> None:
        if node not in self._out:
            raise UnknownNodeError(f"unknown node <{node}>")

    def outgoing(self, node: str) -> tuple[Triple, ...]:
        """All triples with this subject, sorted by (predicate, object)."""
        self._require(node)
        return self._out[node]

    def incoming(self, node: str) -> tuple[Triple, ...]:
        """All triples with this node as object, sorted by (predicate, object)."""
        self._require(node)
        return self._in[node]

    def layer(self, node: str) -> str:
        self._require(node)
        return self._layers[node]

    def with_predicate(self, predicate: str) -> tuple[Triple, ...]:
        return self._by_pred.get(predicate, ())

    # -- convenience lookups used across the pipeline -----------------------

    def objects(self, node: str, predicate: str) -> list[str]:
        """Node objects of `node --predicate-->`, in sorted order."""
        return [t.obj for t in self.outgoing(node)
                if t.predicate == predicate and not t.obj_is_text]

    def labels(self, node: str, predicate: str) -> list[str]:
        """Text-label objects of `node --predicate-->`, in sorted order."""
        return [t.obj for t in self.outgoing(node)
                if t.predicate == predicate and t.obj_is_text]

    def subjects(self, predicate: str, node: str) -> list[str]:
        """Subjects of `? --predicate--> node`, in sorted order."""
        return [t.subject for t in self.incoming(node) if t.predicate == predicate]

    def has_triple(self, subject: str, predicate: str, obj: str,
                   obj_is_text: bool = False) -> bool:
        return Triple(subject, predicate, obj, obj_is_text) in self._triples


def _parse_object(field: str) -> tuple[str, bool]:
    field = field.strip()
    if field.startswith("<") and field.endswith(">"):
        uri = field[1:-1]
        if not uri or any(c.isspace() for c in uri):
            raise ValueError(f"bad node id {field!r}")
        return uri, False
    return field, True


def parse_triple_line(line: str) -> Triple:
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 3:
        raise ValueError(f"expected 3 tab-separated fields, got {len(parts)}")
    subj_raw, predicate, obj_raw = (p.strip() for p in parts)
    if not subj_raw.startswith("<") or not subj_raw.endswith(">"):
        raise ValueError(f"subject must be a <uri>, got {subj_raw!r}")
    subject = subj_raw[1:-1]
    if not subject or any(c.isspace() for c in subject):
        raise ValueError(f"bad subject id {subj_raw!r}")
    if not predicate:
        raise ValueError("empty predicate")
    obj, is_text = _parse_object(obj_raw)
    if is_text and not obj:
        raise ValueError("empty object")
    return Triple(subject, predicate, obj, is_text)


def iter_triple_lines(text: str) -> Iterator[tuple[int, str]]:
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield line_no, line


def load_graph(source: str | Path) -> MetadataGraph:
    """Load a metadata graph from a triple file.

    Duplicate triples are ignored with a warning; malformed lines raise
    :class:`GraphFormatError` carrying the line number.
    """
    path = Path(source)
    text = path.read_text(encoding="utf-8")
    triples: list[Triple] = []
    seen: set[Triple] = set()
    for line_no, line in iter_triple_lines(text):
        try:
            triple = parse_triple_line(line)
        except ValueError as exc:
            raise GraphFormatError(str(exc), line_no) from exc
        if triple in seen:
            logger.warning("%s:%d: duplicate triple ignored: %s",
                           path.name, line_no, triple)
            continue
        seen.add(triple)
        triples.append(triple)
    graph = MetadataGraph(triples)
    logger.info("loaded %s: %d triples, %d nodes",
                path.name, len(graph), graph.node_count())
    return graph
