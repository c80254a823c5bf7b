"""Command line entry point.

Subcommands: ``index`` (load everything, print counts), ``query`` (one-shot
search), ``eval`` (benchmark against the suite), ``serve`` (HTTP API).

Exit codes are a stable contract: 0 success, 1 benchmark threshold miss,
2 configuration or I/O problems, 3 query parse errors, 4 bind failures.
"""

from __future__ import annotations

import argparse
import errno
import json
import logging
import sys

from .config import ConfigError, load_config, load_workspace
from .evaluation import SuiteError, load_suite, render_report, run_benchmark
from .graph import GraphError
from .querylang import QueryParseError
from .store import StoreError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_THRESHOLD = 1
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_BIND = 4


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ksdw",
        description="keyword search over a relational data warehouse")
    parser.add_argument("--config", default="workspace.cfg",
                        help="workspace config file (default: ./workspace.cfg)")
    parser.add_argument("--top-n", type=int, default=None,
                        help="interpretations kept per page")
    parser.add_argument("--snippet-cap", type=int, default=None,
                        help="max snippet rows per candidate")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("index", help="load graph and data, build indexes, print counts")

    query = sub.add_parser("query", help="run one query and print candidates")
    query.add_argument("text", help="the search query")
    query.add_argument("--page", type=int, default=0)
    query.add_argument("--sql-only", action="store_true",
                       help="print only the rendered SQL statements")
    query.add_argument("--json", action="store_true", dest="as_json",
                       help="emit the service JSON shape")

    sub.add_parser("eval", help="run the benchmark suite")

    serve = sub.add_parser("serve", help="serve the HTTP API")
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--host", default="127.0.0.1")
    return parser


def _load(args) -> "Workspace":
    overrides = {}
    if args.top_n is not None:
        overrides["top_n"] = str(args.top_n)
    if args.snippet_cap is not None:
        overrides["snippet_cap"] = str(args.snippet_cap)
    config = load_config(args.config, overrides)
    return load_workspace(config)


def cmd_index(args) -> int:
    workspace = _load(args)
    ctx = workspace.context
    print(f"tables indexed: {len(ctx.node_of_table)}")
    for table in ctx.store.tables():
        print(f"  {table}: {ctx.store.row_count(table)} rows")
    print(f"classification terms: {len(ctx.classification)}")
    print(f"inverted index postings: {ctx.inverted.posting_count()}")
    return EXIT_OK


def cmd_query(args) -> int:
    workspace = _load(args)
    from .pipeline import run_pipeline
    from .service import search_payload

    try:
        result = run_pipeline(args.text, workspace.context, page=args.page)
    except QueryParseError as exc:
        print(f"query error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    if args.as_json:
        print(json.dumps(search_payload(result), indent=2, ensure_ascii=False))
        return EXIT_OK

    if not result.candidates:
        print("no results")
        for diagnostic in result.diagnostics:
            print(f"  {diagnostic}")
        return EXIT_OK

    for index, candidate in enumerate(result.candidates, start=1):
        if args.sql_only:
            if candidate.sql:
                print(candidate.sql)
                print()
            continue
        print(f"=== candidate {index}  score {candidate.score:.3f}")
        for line in candidate.describe_entries():
            print(f"  entry: {line}")
        if candidate.sql:
            print(candidate.sql)
        for diagnostic in candidate.diagnostics:
            print(f"  ! {diagnostic}")
        if candidate.snippet is not None:
            print(f"  -- snippet ({len(candidate.snippet.rows)} rows)")
            print("  " + " | ".join(candidate.snippet.columns))
            for row in candidate.snippet.rows:
                print("  " + " | ".join(str(v) for v in row))
        print()
    return EXIT_OK


def cmd_eval(args) -> int:
    workspace = _load(args)
    if workspace.config.suite is None:
        print("config has no suite file", file=sys.stderr)
        return EXIT_CONFIG
    suite = load_suite(workspace.config.suite)
    report = run_benchmark(suite, workspace.context)
    print(render_report(report))
    json_path = workspace.config.suite.with_suffix(".report.json")
    json_path.write_text(report.to_json(), encoding="utf-8")
    print(f"\nJSON report written to {json_path}")
    return EXIT_THRESHOLD if report.failures() else EXIT_OK


def cmd_serve(args) -> int:
    import socket

    import uvicorn

    workspace = _load(args)
    from .service import create_app

    app = create_app(workspace)
    try:
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((args.host, args.port))
    except OSError as exc:
        if exc.errno in (errno.EADDRINUSE, errno.EACCES):
            print(f"cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
            return EXIT_BIND
        raise
    host, port = sock.getsockname()[:2]
    print(f"serving on http://{host}:{port}", flush=True)
    server = uvicorn.Server(uvicorn.Config(app, log_level="info"))
    server.run(sockets=[sock])
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"index": cmd_index, "query": cmd_query,
                "eval": cmd_eval, "serve": cmd_serve}
    try:
        return handlers[args.command](args)
    except (ConfigError, StoreError, GraphError, SuiteError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
