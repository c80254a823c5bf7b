import datetime as dt

import pytest

from ksdw.store import (RelationalStore, StoreError, TableDef, coerce,
                        ingest_csv, parse_manifest)

MANIFEST = """\
table people
column id number
column name text
column born date
pk id
"""


def table_defs():
    return parse_manifest(MANIFEST)


def write_csv(tmp_path, name, text):
    (tmp_path / f"{name}.csv").write_text(text, encoding="utf-8")
    return tmp_path


class TestManifest:
    def test_parse(self):
        defs = table_defs()
        assert len(defs) == 1
        assert defs[0].name == "people"
        assert defs[0].columns == (("id", "number"), ("name", "text"),
                                   ("born", "date"))
        assert defs[0].primary_key == ("id",)

    def test_duplicate_column_rejected(self):
        with pytest.raises(StoreError):
            TableDef("t", (("a", "text"), ("a", "text")), ("a",))

    def test_pk_must_exist(self):
        with pytest.raises(StoreError):
            TableDef("t", (("a", "text"),), ("b",))

    def test_bad_datatype(self):
        with pytest.raises(StoreError):
            TableDef("t", (("a", "blob"),), ("a",))


class TestCoerce:
    def test_number_affinity(self):
        assert coerce("5", "number") == 5
        assert isinstance(coerce("5.0", "number"), int)
        assert coerce("5.5", "number") == 5.5

    def test_date(self):
        assert coerce("2012-02-29", "date") == dt.date(2012, 2, 29)
        with pytest.raises(ValueError):
            coerce("2011-02-30", "date")

    def test_empty_means_null(self):
        for dtype in ("text", "number", "date"):
            assert coerce("", dtype) is None

    def test_bad_number(self):
        with pytest.raises(ValueError):
            coerce("abc", "number")


class TestIngest:
    def test_header_only_csv_loads_zero_rows(self, tmp_path):
        write_csv(tmp_path, "people", "id,name,born\n")
        store = RelationalStore()
        counts = ingest_csv(store, table_defs(), tmp_path)
        assert counts == {"people": 0}
        assert store.has_table("people")

    def test_rows_loaded_with_types(self, tmp_path):
        write_csv(tmp_path, "people",
                  "id,name,born\n1,Ada,1815-12-10\n2,Alan,\n")
        store = RelationalStore()
        ingest_csv(store, table_defs(), tmp_path)
        assert store.row_count("people") == 2
        assert store.cell("people", "born", 1) == dt.date(1815, 12, 10)
        assert store.cell("people", "born", 2) is None

    def test_text_in_number_column_names_everything(self, tmp_path):
        write_csv(tmp_path, "people", "id,name,born\nnope,Ada,1815-12-10\n")
        with pytest.raises(StoreError, match="people.csv line 2.*'id'"):
            ingest_csv(RelationalStore(), table_defs(), tmp_path)

    def test_arity_mismatch_reports_line(self, tmp_path):
        write_csv(tmp_path, "people", "id,name,born\n1,Ada\n")
        with pytest.raises(StoreError, match="line 2"):
            ingest_csv(RelationalStore(), table_defs(), tmp_path)

    def test_header_mismatch_rejected(self, tmp_path):
        write_csv(tmp_path, "people", "id,born,name\n")
        with pytest.raises(StoreError, match="header"):
            ingest_csv(RelationalStore(), table_defs(), tmp_path)

    def test_missing_csv_rejected(self, tmp_path):
        with pytest.raises(StoreError, match="missing CSV"):
            ingest_csv(RelationalStore(), table_defs(), tmp_path)

    def test_mini_bank_row_counts(self, store):
        assert store.row_count("individuals") == 60
        assert store.row_count("parties") == 120
        for table in store.tables():
            assert store.row_count(table) >= 50
