"""Term indexes: schema/ontology labels and base-data text columns.

The classification index maps normalized terms to metadata-graph nodes and
is built from ``tablename``, ``columnname`` and ``concept_label`` labels;
synonym nodes contribute their label but resolve (via ``synonym_of``) to the
node they annotate.  The inverted index covers text-typed base-data columns
only, token by token plus whole cells as phrases.
"""

from __future__ import annotations

import logging
import re
import unicodedata
from dataclasses import dataclass
from typing import Optional

from .graph import MetadataGraph
from .store import RelationalStore

logger = logging.getLogger(__name__)

LABEL_PREDICATES = ("tablename", "columnname", "concept_label")

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)


def normalize(text: str) -> str:
    """Lowercase and fold diacritics, so 'Zurich' finds 'Zürich'."""
    decomposed = unicodedata.normalize("NFKD", text.lower())
    return "".join(c for c in decomposed if not unicodedata.combining(c))


def tokens_of(text: str) -> list[str]:
    return [normalize(t) for t in _TOKEN_RE.findall(text)]


@dataclass(frozen=True)
class MetadataHit:
    node: str
    layer: str

    def sort_key(self):
        return (self.layer, self.node)


@dataclass(frozen=True)
class BaseDataHit:
    table: str
    column: str
    value: str  # the full cell value the term was found in

    def sort_key(self):
        return (self.table, self.column, self.value)


@dataclass(frozen=True)
class EntryPoint:
    """Where a keyword sub-group was found: a graph node or a base-data cell."""

    words: tuple[str, ...]
    target: MetadataHit | BaseDataHit

    @property
    def layer(self) -> str:
        if isinstance(self.target, MetadataHit):
            return self.target.layer
        return "base-data"

    def describe(self) -> str:
        phrase = " ".join(self.words)
        if isinstance(self.target, MetadataHit):
            return f"{phrase!r} -> <{self.target.node}> [{self.target.layer}]"
        t = self.target
        return f"{phrase!r} -> {t.table}.{t.column} = {t.value!r} [base data]"


class ClassificationIndex:
    """normalized term -> metadata hits, with phrase keys kept whole."""

    def __init__(self, entries: dict[str, list[MetadataHit]]):
        self._entries = {term: sorted(set(hits), key=MetadataHit.sort_key)
                         for term, hits in entries.items()}

    def lookup(self, phrase: str) -> list[MetadataHit]:
        return self._entries.get(normalize(phrase), [])

    def terms(self) -> list[str]:
        return sorted(self._entries)

    def __len__(self) -> int:
        return len(self._entries)


def build_classification_index(graph: MetadataGraph) -> ClassificationIndex:
    entries: dict[str, list[MetadataHit]] = {}

    def add(term: str, hit: MetadataHit):
        entries.setdefault(normalize(term), []).append(hit)

    for node in graph.nodes():
        layer = graph.layer(node)
        synonym_targets = graph.objects(node, "synonym_of")
        for predicate in LABEL_PREDICATES:
            for label in graph.labels(node, predicate):
                if synonym_targets:
                    # synonym entries resolve to the node they annotate but
                    # keep the synonym layer tag
                    for target in synonym_targets:
                        add(label, MetadataHit(target, "synonym"))
                else:
                    add(label, MetadataHit(node, layer))
    index = ClassificationIndex(entries)
    logger.info("classification index: %d terms", len(index))
    return index


class InvertedIndex:
    """normalized term/phrase -> postings (table, column, row id).

    Only text-typed columns are indexed.  The store reference is kept so
    matches can be resolved back to full cell values.
    """

    def __init__(self, store: RelationalStore):
        self.store = store
        self._postings: dict[str, list[tuple[str, str, int]]] = {}
        self._cell_tokens: dict[tuple[str, str, int], list[str]] = {}

    def _add(self, term: str, posting: tuple[str, str, int]) -> None:
        self._postings.setdefault(term, []).append(posting)

    def postings(self, term: str) -> list[tuple[str, str, int]]:
        return self._postings.get(normalize(term), [])

    def posting_count(self) -> int:
        return sum(len(p) for p in self._postings.values())

    def terms(self) -> list[str]:
        return sorted(self._postings)

    def lookup_phrase(self, words: list[str]) -> list[BaseDataHit]:
        """Cells whose token sequence contains the phrase contiguously."""
        if not words:
            return []
        needle = [normalize(w) for w in words]
        first = self._postings.get(needle[0], [])
        hits: set[BaseDataHit] = set()
        for posting in first:
            cell_tokens = self._cell_tokens[posting]
            if _contains_run(cell_tokens, needle):
                table, column, row_id = posting
                value = self.store.cell(table, column, row_id)
                hits.add(BaseDataHit(table, column, str(value)))
        return sorted(hits, key=BaseDataHit.sort_key)


def _contains_run(haystack: list[str], needle: list[str]) -> bool:
    n = len(needle)
    return any(haystack[i:i + n] == needle for i in range(len(haystack) - n + 1))


def build_inverted_index(store: RelationalStore) -> InvertedIndex:
    index = InvertedIndex(store)
    for table in store.tables():
        table_def = store.table(table)
        text_columns = [(i, name) for i, (name, dtype) in enumerate(table_def.columns)
                        if dtype == "text"]
        for row_id in sorted(store.rows(table)):
            row = store.rows(table)[row_id]
            for col_index, column in text_columns:
                value = row[col_index]
                if value is None:
                    continue
                posting = (table, column, row_id)
                cell_tokens = tokens_of(str(value))
                index._cell_tokens[posting] = cell_tokens
                seen: set[str] = set()
                for token in cell_tokens:
                    if token not in seen:
                        index._add(token, posting)
                        seen.add(token)
                whole = normalize(str(value))
                if whole and whole not in seen:
                    index._add(whole, posting)
    for postings in index._postings.values():
        postings.sort()
    logger.info("inverted index: %d terms, %d postings",
                len(index._postings), index.posting_count())
    return index


# ---------------------------------------------------------------------------
# Classification: longest word combinations
# ---------------------------------------------------------------------------

@dataclass
class Classification:
    """Result of classifying one keyword group."""

    subgroups: list[list[EntryPoint]]
    unmatched: list[str]


def _window_hits(ci: ClassificationIndex, ii: Optional[InvertedIndex],
                 words: tuple[str, ...]) -> list[EntryPoint]:
    phrase = " ".join(words)
    hits: list[EntryPoint] = [EntryPoint(words, h) for h in ci.lookup(phrase)]
    if ii is not None:
        hits.extend(EntryPoint(words, h) for h in ii.lookup_phrase(list(words)))
    return hits


def classify(ci: ClassificationIndex, ii: Optional[InvertedIndex],
             group: tuple[str, ...]) -> Classification:
    """Longest-word-combination matching over one keyword group.

    The whole group is tried first; on failure, smaller contiguous windows
    are tried longest first with a left-to-right tie break, and the
    remainders are classified recursively.  Unmatched residual words are
    dropped and reported.
    """
    words = tuple(group)
    result = Classification([], [])
    _classify_span(ci, ii, words, 0, len(words), result)
    if result.unmatched:
        logger.warning("unmatched words dropped: %s", result.unmatched)
    return result


def _classify_span(ci, ii, words: tuple[str, ...], lo: int, hi: int,
                   result: Classification) -> None:
    if lo >= hi:
        return
    for size in range(hi - lo, 0, -1):
        for start in range(lo, hi - size + 1):
            window = words[start:start + size]
            hits = _window_hits(ci, ii, window)
            if hits:
                _classify_span(ci, ii, words, lo, start, result)
                result.subgroups.append(hits)
                _classify_span(ci, ii, words, start + size, hi, result)
                return
    result.unmatched.extend(words[lo:hi])
