"""Benchmark evaluation: precision/recall of candidates against gold SQL.

A suite file holds one block per query (id in brackets, ``query:`` line,
``type:`` tags, ``gold:`` followed by the indented gold statement) plus
optional ``threshold <id> <minP> <minR>`` lines that make a query
acceptance-bearing.  Result tuples are compared as sets over the shared
(case-folded) column names of the two result sets.
"""

from __future__ import annotations

import datetime as dt
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .pipeline import PipelineResult, SearchContext, run_pipeline
from .sqlgen import ResultSet, SqlError, execute, parse_sql

logger = logging.getLogger(__name__)


class SuiteError(Exception):
    pass


@dataclass
class GoldStandard:
    query_id: str
    query: str
    gold_sql: str
    types: tuple[str, ...] = ()
    notes: str = ""


@dataclass
class Suite:
    queries: list[GoldStandard]
    thresholds: dict[str, tuple[float, float]]  # id -> (min best P, min best R)


def parse_suite(text: str) -> Suite:
    queries: list[GoldStandard] = []
    thresholds: dict[str, tuple[float, float]] = {}
    current: Optional[GoldStandard] = None
    in_gold = False

    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if in_gold and raw.startswith((" ", "\t")) and stripped:
            current.gold_sql += ("\n" if current.gold_sql else "") + stripped
            continue
        in_gold = False
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            current = GoldStandard(stripped[1:-1], "", "")
            queries.append(current)
        elif stripped.startswith("threshold "):
            parts = stripped.split()
            if len(parts) != 4:
                raise SuiteError(f"line {line_no}: expected 'threshold <id> <p> <r>'")
            thresholds[parts[1]] = (float(parts[2]), float(parts[3]))
        elif current is None:
            raise SuiteError(f"line {line_no}: content before any [query-id] block")
        elif stripped.startswith("query:"):
            current.query = stripped[len("query:"):].strip()
        elif stripped.startswith("type:"):
            current.types = tuple(stripped[len("type:"):].split())
        elif stripped.startswith("notes:"):
            current.notes = stripped[len("notes:"):].strip()
        elif stripped.startswith("gold:"):
            in_gold = True
        else:
            raise SuiteError(f"line {line_no}: unknown suite directive {stripped!r}")

    ids = [q.query_id for q in queries]
    if len(set(ids)) != len(ids):
        raise SuiteError("duplicate query ids in suite")
    unknown = sorted(set(thresholds) - set(ids))
    if unknown:
        raise SuiteError(f"thresholds reference unknown query ids: {unknown}")
    for q in queries:
        if not q.query or not q.gold_sql:
            raise SuiteError(f"query {q.query_id!r} is missing its query or gold SQL")
    return Suite(queries, thresholds)


def load_suite(path: str | Path) -> Suite:
    return parse_suite(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Precision / recall
# ---------------------------------------------------------------------------

def _normalized(value):
    if isinstance(value, dt.date):
        return value.isoformat()
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value


def _project(result: ResultSet, columns: list[str]) -> set[tuple]:
    indexes = [ [c.lower() for c in result.columns].index(col) for col in columns ]
    return {tuple(_normalized(row[i]) for i in indexes) for row in result.rows}


def compare_results(candidate: ResultSet, gold: ResultSet) -> tuple[float, float]:
    """Precision and recall of a candidate result against the gold result.

    Rows are projected onto the shared (case-folded) column names and
    deduplicated; precision is |C ∩ G| / |C| and recall |C ∩ G| / |G|, each
    0 when its denominator is empty.  An empty column intersection scores
    (0, 0).
    """
    shared = sorted({c.lower() for c in candidate.columns}
                    & {c.lower() for c in gold.columns})
    if not shared:
        logger.warning("no shared columns between candidate %s and gold %s",
                       candidate.columns, gold.columns)
        return (0.0, 0.0)
    mine = _project(candidate, shared)
    theirs = _project(gold, shared)
    overlap = len(mine & theirs)
    precision = overlap / len(mine) if mine else 0.0
    recall = overlap / len(theirs) if theirs else 0.0
    return (precision, recall)


# ---------------------------------------------------------------------------
# Benchmark runner
# ---------------------------------------------------------------------------

@dataclass
class QueryReport:
    query_id: str
    query: str
    types: tuple[str, ...]
    complexity: int = 0
    candidate_count: int = 0
    scores: list[tuple[float, float]] = field(default_factory=list)
    best: tuple[float, float] = (0.0, 0.0)
    best_rank: Optional[int] = None
    positive: int = 0  # candidates with P > 0 and R > 0
    zero: int = 0      # candidates with P = 0 and R = 0
    pipeline_seconds: float = 0.0
    total_seconds: float = 0.0
    error: Optional[str] = None

    def passes(self, threshold: tuple[float, float]) -> bool:
        return self.best[0] >= threshold[0] and self.best[1] >= threshold[1]


@dataclass
class EvalReport:
    queries: list[QueryReport]
    thresholds: dict[str, tuple[float, float]]

    def failures(self) -> list[str]:
        out = []
        for report in self.queries:
            threshold = self.thresholds.get(report.query_id)
            if report.error and (threshold or not self.thresholds):
                out.append(f"{report.query_id}: {report.error}")
            elif threshold and not report.passes(threshold):
                out.append(
                    f"{report.query_id}: best P/R {report.best[0]:.2f}/{report.best[1]:.2f} "
                    f"below threshold {threshold[0]:.2f}/{threshold[1]:.2f}")
        return out

    def to_json(self) -> str:
        payload = []
        for r in self.queries:
            payload.append({
                "id": r.query_id,
                "query": r.query,
                "types": list(r.types),
                "complexity": r.complexity,
                "candidates": r.candidate_count,
                "perCandidate": [{"precision": p, "recall": rr} for p, rr in r.scores],
                "best": {"precision": r.best[0], "recall": r.best[1],
                         "rank": r.best_rank},
                "resultsPositive": r.positive,
                "resultsZero": r.zero,
                "pipelineSeconds": round(r.pipeline_seconds, 4),
                "totalSeconds": round(r.total_seconds, 4),
                "error": r.error,
            })
        return json.dumps({"queries": payload}, indent=2)


def _best(scores: list[tuple[float, float]]) -> tuple[tuple[float, float], Optional[int]]:
    if not scores:
        return (0.0, 0.0), None
    def goodness(pair):
        p, r = pair[1]
        return (p * r, p + r, -pair[0])
    index, best = max(enumerate(scores), key=goodness)
    return best, index + 1


def run_benchmark(suite: Suite, ctx: SearchContext) -> EvalReport:
    """Run every suite query through the pipeline, execute all candidates
    uncapped, and score them against the gold standard."""
    reports: list[QueryReport] = []
    for gold_standard in suite.queries:
        report = QueryReport(gold_standard.query_id, gold_standard.query,
                             gold_standard.types)
        reports.append(report)
        started = time.perf_counter()
        try:
            gold_result = execute(parse_sql(gold_standard.gold_sql), ctx.store)
        except SqlError as exc:
            report.error = f"gold SQL failed: {exc}"
            continue
        try:
            result: PipelineResult = run_pipeline(gold_standard.query, ctx)
        except Exception as exc:  # a bad query aborts its row, not the suite
            report.error = f"pipeline failed: {exc}"
            continue
        report.complexity = result.complexity
        report.pipeline_seconds = result.elapsed
        report.candidate_count = len(result.candidates)
        for candidate in result.candidates:
            if candidate.statement is None:
                report.scores.append((0.0, 0.0))
                continue
            try:
                uncapped = execute(candidate.statement, ctx.store)
            except SqlError:
                report.scores.append((0.0, 0.0))
                continue
            report.scores.append(compare_results(uncapped, gold_result))
        report.best, report.best_rank = _best(report.scores)
        report.positive = sum(1 for p, r in report.scores if p > 0 and r > 0)
        report.zero = sum(1 for p, r in report.scores if p == 0 and r == 0)
        report.total_seconds = time.perf_counter() - started
    return EvalReport(reports, suite.thresholds)


# ---------------------------------------------------------------------------
# Text report
# ---------------------------------------------------------------------------

def _table(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def render_report(report: EvalReport) -> str:
    quality = [["Q", "Types", "Best P", "Best R", "#P,R>0", "#P,R=0"]]
    for r in report.queries:
        if r.error:
            quality.append([r.query_id, " ".join(r.types), "ERROR", "-", "-", "-"])
        else:
            quality.append([r.query_id, " ".join(r.types),
                            f"{r.best[0]:.2f}", f"{r.best[1]:.2f}",
                            str(r.positive), str(r.zero)])
    runtime = [["Q", "Complexity", "#Results", "Pipeline (s)", "Total (s)"]]
    for r in report.queries:
        runtime.append([r.query_id, str(r.complexity), str(r.candidate_count),
                        f"{r.pipeline_seconds:.2f}", f"{r.total_seconds:.2f}"])
    sections = ["Precision and recall per query", _table(quality), "",
                "Complexity and runtime per query", _table(runtime)]
    failures = report.failures()
    if failures:
        sections += ["", "Threshold failures:"] + [f"  {f}" for f in failures]
    else:
        sections += ["", "All thresholds met."]
    return "\n".join(sections)
