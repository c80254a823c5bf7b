"""HTTP API: search with ranked SQL candidates, feedback log, schema browser.

Endpoints:
  POST /search            {"query": ..., "page": n} -> SearchResponse
  POST /feedback          {"query", "candidateId", "verdict"} -> 204
  GET  /schema/tables     table summaries
  GET  /schema/table/{t}  columns, datatypes, join/inheritance neighbors

Search is read-only and deterministic over the loaded snapshot; feedback is
an append-only newline-delimited JSON log.  When a UI directory is
configured its static files are served at /ui.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import logging
import threading
import time
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .config import Workspace
from .pipeline import Candidate, PipelineResult, run_pipeline
from .querylang import QueryParseError
from .sqlgen import ResultSet

logger = logging.getLogger(__name__)


def _json_value(value: Any) -> Any:
    if isinstance(value, dt.date):
        return value.isoformat()
    return value


def candidate_id(candidate: Candidate) -> str:
    basis = candidate.sql or "|".join(candidate.diagnostics) or "empty"
    return hashlib.sha256(basis.encode("utf-8")).hexdigest()[:16]


def snippet_payload(snippet: Optional[ResultSet]) -> Optional[dict]:
    if snippet is None:
        return None
    return {"columns": snippet.columns,
            "rows": [[_json_value(v) for v in row] for row in snippet.rows]}


def candidate_payload(rank: int, candidate: Candidate) -> dict:
    return {
        "id": candidate_id(candidate),
        "rank": rank,
        "score": round(candidate.score, 4),
        "sql": candidate.sql,
        "tables": list(candidate.tables),
        "joins": [j.describe() for j in candidate.joins],
        "filters": [f.describe() for f in candidate.filters],
        "entryPoints": candidate.describe_entries(),
        "snippet": snippet_payload(candidate.snippet),
        "diagnostics": list(candidate.diagnostics),
    }


def search_payload(result: PipelineResult) -> dict:
    return {
        "query": result.query,
        "page": result.page,
        "complexity": result.complexity,
        "interpretations": result.interpretation_count,
        "diagnostics": result.diagnostics,
        "elapsedSeconds": round(result.elapsed, 4),
        "candidates": [candidate_payload(i + 1, c)
                       for i, c in enumerate(result.candidates)],
    }


class SearchRequest(BaseModel):
    query: str
    page: int = 0


class FeedbackRequest(BaseModel):
    query: str
    candidateId: str
    verdict: str


class FeedbackLog:
    """Append-only NDJSON feedback store; writes are serialized."""

    def __init__(self, path: Path):
        self.path = path
        self._lock = threading.Lock()

    def append(self, record: dict) -> None:
        line = json.dumps(record, sort_keys=True)
        with self._lock:
            with self.path.open("a", encoding="utf-8") as handle:
                handle.write(line + "\n")

    def count(self) -> int:
        if not self.path.exists():
            return 0
        with self.path.open(encoding="utf-8") as handle:
            return sum(1 for line in handle if line.strip())


def _schema_model(workspace: Workspace) -> dict[str, dict]:
    """Tables with columns and neighbors, derived once from the metadata."""
    from .pipeline import discover_joins

    ctx = workspace.context
    joins = discover_joins(ctx, set(ctx.graph.nodes()))
    tables: dict[str, dict] = {}
    for name in sorted(ctx.node_of_table):
        columns = []
        if ctx.store.has_table(name):
            columns = [{"name": c, "datatype": d}
                       for c, d in ctx.store.table(name).columns]
        tables[name] = {"name": name, "columns": columns, "neighbors": []}

    def add_neighbor(table: str, other: str, kind: str, via: str):
        if table in tables:
            entry = {"table": other, "kind": kind, "via": via}
            if entry not in tables[table]["neighbors"]:
                tables[table]["neighbors"].append(entry)

    for join in joins:
        (lt, _), (rt, _) = join.left, join.right
        if lt == rt:
            continue
        add_neighbor(lt, rt, join.provenance, join.describe())
        add_neighbor(rt, lt, join.provenance, join.describe())
    for child, parent in ctx.parent_of.items():
        add_neighbor(child, parent, "inheritance-parent", f"{child} -> {parent}")
        add_neighbor(parent, child, "inheritance-child", f"{parent} -> {child}")
    for info in tables.values():
        info["neighbors"].sort(key=lambda n: (n["table"], n["kind"]))
    return tables


def create_app(workspace: Workspace) -> FastAPI:
    app = FastAPI(title="keyword search over the data warehouse")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    feedback = FeedbackLog(workspace.config.feedback_log)
    schema = _schema_model(workspace)

    @app.post("/search")
    def search(request: SearchRequest) -> dict:
        if request.page < 0:
            raise HTTPException(status_code=400, detail="page must be >= 0")
        try:
            result = run_pipeline(request.query, workspace.context,
                                  page=request.page)
        except QueryParseError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return search_payload(result)

    @app.post("/feedback", status_code=204)
    def post_feedback(request: FeedbackRequest) -> Response:
        if request.verdict not in ("like", "dislike"):
            raise HTTPException(status_code=400,
                                detail="verdict must be 'like' or 'dislike'")
        feedback.append({
            "candidateId": request.candidateId,
            "query": request.query,
            "verdict": request.verdict,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        })
        return Response(status_code=204)

    @app.get("/schema/tables")
    def schema_tables() -> list[dict]:
        return [{"name": name,
                 "columnCount": len(info["columns"]),
                 "neighborCount": len(info["neighbors"])}
                for name, info in schema.items()]

    @app.get("/schema/table/{name}")
    def schema_table(name: str) -> dict:
        if name not in schema:
            raise HTTPException(status_code=404, detail=f"unknown table {name!r}")
        return schema[name]

    ui_dir = workspace.config.ui_dir
    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
