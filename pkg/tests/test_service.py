import json

import pytest
from fastapi.testclient import TestClient

from ksdw.config import load_config, load_workspace
from ksdw.service import create_app

from conftest import FIXTURE_DIR


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    # a private workspace so the feedback log lands in a temp dir
    feedback = tmp_path_factory.mktemp("feedback") / "feedback.ndjson"
    config = load_config(FIXTURE_DIR / "workspace.cfg",
                         {"feedback_log": str(feedback)})
    workspace = load_workspace(config)
    app = create_app(workspace)
    with TestClient(app) as test_client:
        test_client.feedback_path = feedback
        yield test_client


class TestSearch:
    def test_sara_guttinger_top_candidate(self, client):
        response = client.post("/search", json={"query": "Sara Guttinger",
                                                "page": 0})
        assert response.status_code == 200
        payload = response.json()
        assert payload["complexity"] == 1
        top = payload["candidates"][0]
        assert top["sql"] == ("SELECT *\nFROM parties, individuals\n"
                              "WHERE parties.id = individuals.id\n"
                              "AND individuals.firstName = 'Sara'\n"
                              "AND individuals.lastName = 'Guttinger'")
        assert top["snippet"]["rows"][0][3] == "Sara"

    def test_empty_query_is_400_with_diagnostic(self, client):
        response = client.post("/search", json={"query": "", "page": 0})
        assert response.status_code == 400
        assert "empty" in response.json()["detail"]

    def test_page_past_end_is_200_empty(self, client):
        response = client.post("/search", json={"query": "Sara Guttinger",
                                                "page": 9})
        assert response.status_code == 200
        assert response.json()["candidates"] == []

    def test_no_match_is_200_with_diagnostics(self, client):
        response = client.post("/search", json={"query": "qzx", "page": 0})
        assert response.status_code == 200
        payload = response.json()
        assert payload["candidates"] == []
        assert any("qzx" in d for d in payload["diagnostics"])

    def test_idempotent(self, client):
        a = client.post("/search", json={"query": "Zurich", "page": 0}).json()
        b = client.post("/search", json={"query": "Zurich", "page": 0}).json()
        a.pop("elapsedSeconds")
        b.pop("elapsedSeconds")
        assert a == b

    def test_matches_cli_json_ordering(self, client, capsys):
        from ksdw.cli import main

        main(["--config", str(FIXTURE_DIR / "workspace.cfg"),
              "query", "customers Zurich financial instruments", "--json"])
        cli_payload = json.loads(capsys.readouterr().out)
        api_payload = client.post(
            "/search", json={"query": "customers Zurich financial instruments",
                             "page": 0}).json()
        assert [c["sql"] for c in cli_payload["candidates"]] == \
            [c["sql"] for c in api_payload["candidates"]]


class TestFeedback:
    def test_like_appends_record(self, client):
        before = client.feedback_path.read_text().count("\n") \
            if client.feedback_path.exists() else 0
        response = client.post("/feedback", json={
            "query": "Sara Guttinger", "candidateId": "abc123",
            "verdict": "like"})
        assert response.status_code == 204
        lines = client.feedback_path.read_text().strip().splitlines()
        assert len(lines) == before + 1
        record = json.loads(lines[-1])
        assert record["verdict"] == "like"
        assert record["candidateId"] == "abc123"

    def test_unknown_verdict_is_400(self, client):
        response = client.post("/feedback", json={
            "query": "x", "candidateId": "abc", "verdict": "maybe"})
        assert response.status_code == 400

    def test_repeated_feedback_appends_both(self, client):
        for _ in range(2):
            client.post("/feedback", json={"query": "x", "candidateId": "dup",
                                           "verdict": "dislike"})
        lines = [json.loads(l) for l in
                 client.feedback_path.read_text().strip().splitlines()]
        assert sum(1 for r in lines if r["candidateId"] == "dup") == 2


class TestSchema:
    def test_tables_lists_eight(self, client):
        response = client.get("/schema/tables")
        assert response.status_code == 200
        tables = response.json()
        assert len(tables) == 8
        assert {t["name"] for t in tables} >= {"parties", "individuals"}

    def test_table_detail_with_neighbors(self, client):
        response = client.get("/schema/table/parties")
        assert response.status_code == 200
        payload = response.json()
        names = {c["name"] for c in payload["columns"]}
        assert names == {"id", "type"}
        neighbors = {(n["table"], n["kind"]) for n in payload["neighbors"]}
        assert ("individuals", "inheritance-child") in neighbors
        assert ("organizations", "inheritance-child") in neighbors

    def test_unknown_table_is_404(self, client):
        assert client.get("/schema/table/nope").status_code == 404
