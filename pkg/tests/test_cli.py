import json
import socket

from ksdw.cli import (EXIT_BIND, EXIT_CONFIG, EXIT_OK, EXIT_PARSE, main)

from conftest import FIXTURE_DIR

CONFIG = str(FIXTURE_DIR / "workspace.cfg")


class TestIndex:
    def test_reports_counts(self, capsys):
        assert main(["--config", CONFIG, "index"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "tables indexed: 8" in out
        assert "individuals: 60 rows" in out

    def test_missing_config_exits_2(self, capsys):
        assert main(["--config", "/nonexistent.cfg", "index"]) == EXIT_CONFIG
        assert "error" in capsys.readouterr().err

    def test_missing_manifest_exits_2(self, tmp_path, capsys):
        config = tmp_path / "w.cfg"
        config.write_text(
            f"graph = {FIXTURE_DIR / 'graph.tsv'}\n"
            "manifest = nope.txt\n"
            f"csv_dir = {FIXTURE_DIR / 'csv'}\n")
        assert main(["--config", str(config), "index"]) == EXIT_CONFIG
        assert "manifest" in capsys.readouterr().err


class TestQuery:
    def test_sql_only_prints_statement(self, capsys):
        code = main(["--config", CONFIG, "query", "Sara Guttinger", "--sql-only"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("SELECT *\nFROM parties, individuals\n")

    def test_empty_query_exits_3(self, capsys):
        assert main(["--config", CONFIG, "query", "  "]) == EXIT_PARSE
        assert "query error" in capsys.readouterr().err

    def test_no_results_is_success_with_diagnostics(self, capsys):
        assert main(["--config", CONFIG, "query", "qzx"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "no results" in out
        assert "qzx" in out

    def test_json_output_is_parseable(self, capsys):
        assert main(["--config", CONFIG, "query", "Zurich", "--json"]) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["complexity"] == 1
        assert payload["candidates"][0]["sql"].startswith("SELECT *")
        assert payload["candidates"][0]["rank"] == 1

    def test_snippet_cap_flag(self, capsys):
        assert main(["--config", CONFIG, "--snippet-cap", "3",
                     "query", "client", "--json"]) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert len(payload["candidates"][0]["snippet"]["rows"]) == 3


class TestEval:
    def test_suite_passes(self, capsys, tmp_path):
        assert main(["--config", CONFIG, "eval"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "All thresholds met." in out
        report = FIXTURE_DIR / "suite.report.json"
        assert report.exists()
        report.unlink()


class TestServe:
    def test_port_in_use_exits_4(self, capsys):
        blocker = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        blocker.bind(("127.0.0.1", 0))
        port = blocker.getsockname()[1]
        try:
            code = main(["--config", CONFIG, "serve", "--port", str(port)])
        finally:
            blocker.close()
        assert code == EXIT_BIND
        assert "cannot bind" in capsys.readouterr().err
