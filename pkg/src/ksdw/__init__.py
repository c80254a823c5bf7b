"""Keyword search over relational data warehouses.

Keyword/operator queries are matched against a layered metadata graph and a
base-data inverted index, tables and join paths are discovered by graph
pattern matching, and the result is a ranked list of executable SQL
statements with result snippets.
"""

from .graph import MetadataGraph, Triple, load_graph
from .indexing import (build_classification_index, build_inverted_index,
                       classify)
from .patterns import (Pattern, PatternRegistry, builtin_registry, match_all,
                       match_at, parse_pattern)
from .pipeline import SearchContext, complexity, lookup, rank, run_pipeline
from .querylang import QueryAst, parse
from .sqlgen import execute, generate_sql, parse_sql, render
from .store import RelationalStore, ingest_csv, load_manifest

__version__ = "0.1.0"

__all__ = [
    "MetadataGraph", "Triple", "load_graph",
    "Pattern", "PatternRegistry", "builtin_registry", "parse_pattern",
    "match_at", "match_all",
    "QueryAst", "parse",
    "RelationalStore", "load_manifest", "ingest_csv",
    "build_classification_index", "build_inverted_index", "classify",
    "SearchContext", "lookup", "complexity", "rank", "run_pipeline",
    "generate_sql", "render", "parse_sql", "execute",
    "__version__",
]
