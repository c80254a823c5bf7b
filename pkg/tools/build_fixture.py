#!/usr/bin/env python3
"""Generate the mini-bank fixture workspace under fixtures/mini-bank/.

The workspace is deterministic (seeded RNG) and is the reference world for
tests, the benchmark suite and the demo CLI/UI.  Word pools are curated so
benchmark query terms hit exactly the intended metadata labels and cells:
do not add tokens like 'customers', 'company', 'transactions', 'zurich',
'sara', or 'nora' to unrelated pools.
"""

from __future__ import annotations

import csv
import random
import shutil
from datetime import date, timedelta
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "fixtures" / "mini-bank"

FIRST_NAMES = ["Luca", "Elena", "Marco", "Julia", "David", "Anna", "Peter",
               "Clara", "Felix", "Marta", "Iris", "Hugo", "Lena", "Paul",
               "Rosa", "Timo", "Vera", "Jonas", "Mia", "Noel"]
LAST_NAMES = ["Muster", "Keller", "Baumann", "Frei", "Meier", "Huber",
              "Graf", "Steiner", "Widmer", "Brunner", "Vogel", "Zbinden",
              "Koch", "Weber", "Schmid", "Moser", "Roth", "Gerber"]
CITIES = ["Geneva", "Basel", "Bern", "Lugano", "Chur", "Thun", "Olten"]
STREETS = ["Bahnhofstrasse", "Seestrasse", "Marktgasse", "Hauptstrasse",
           "Lindenweg", "Rosenweg", "Feldweg"]
ORG_WORDS = ["Alpine", "Nordic", "Atlas", "Orion", "Vega", "Delta", "Aurora",
             "Juna", "Pilatus", "Rigi", "Saentis", "Dufour"]
ORG_SUFFIXES = ["Holdings", "Capital", "Group", "Partners", "Trust"]
INSTRUMENT_WORDS = ["Alpha", "Beta", "Gamma", "Sigma", "Omega", "Quartz",
                    "Onyx", "Jade", "Topaz", "Basalt"]
INSTRUMENT_KINDS = ["Fund", "Bond", "Share", "Certificate", "Note"]
CURRENCIES = ["CHF", "EUR", "USD", "GBP", "JPY"]

N_INDIVIDUALS = 60
N_ORGANIZATIONS = 60
N_ADDRESSES = 70
N_INSTRUMENTS = 55
N_FI_TX = 90
N_MONEY_TX = 60
FI_TX_TO_ORGS = 78  # org k receives k transactions, k = 1..12 (distinct counts)


def individuals_rows(rng: random.Random) -> list[list]:
    rows = []
    for i in range(N_INDIVIDUALS):
        pid = 1001 + i
        if i == 0:
            rows.append([pid, "Sara", "Guttinger", "1981-04-23", 90000])
            continue
        if i == 1 or i == 2:
            first = "Nora"  # ambiguity partner of the 'Nora Capital' organization
        else:
            first = rng.choice(FIRST_NAMES)
        last = rng.choice(LAST_NAMES)
        birthday = date(1950, 1, 1) + timedelta(days=rng.randrange(18000))
        salary = rng.randrange(40, 250) * 1000
        if i in (5, 17, 33):
            salary = rng.choice([1200000, 1500000, 2000000])
        rows.append([pid, first, last, birthday.isoformat(), salary])
    return rows


def organizations_rows(rng: random.Random) -> list[list]:
    rows = []
    names = set()
    for i in range(N_ORGANIZATIONS):
        oid = 2001 + i
        if i == 0:
            name = "Nora Capital"
        else:
            while True:
                name = f"{rng.choice(ORG_WORDS)} {rng.choice(ORG_SUFFIXES)}"
                if name not in names and not name.startswith("Nora"):
                    break
        names.add(name)
        rows.append([oid, name])
    return rows


def addresses_rows(rng: random.Random) -> list[list]:
    rows = []
    for i in range(N_ADDRESSES):
        individual = 1001 + (i % N_INDIVIDUALS)
        street = f"{rng.choice(STREETS)} {rng.randrange(1, 99)}"
        city = "Zürich" if i % 5 == 0 else rng.choice(CITIES)
        rows.append([i + 1, individual, street, city])
    return rows


def instruments_rows(rng: random.Random) -> list[list]:
    rows = []
    for i in range(N_INSTRUMENTS):
        iid = 3001 + i
        name = f"{rng.choice(INSTRUMENT_WORDS)} {rng.choice(INSTRUMENT_KINDS)} {i + 1}"
        # structured instruments reference another instrument of the table
        parent = 3001 + rng.randrange(i) if i and i % 4 == 0 else ""
        rows.append([iid, name, parent])
    return rows


def transactions_rows(rng: random.Random) -> tuple[list[list], list[list], list[list]]:
    transactions, fi_tx, money_tx = [], [], []
    fi_dates = [date(2010, 1, 15) + timedelta(days=61 * k) for k in range(15)]
    to_orgs = [2001 + k for k in range(12) for _ in range(k + 1)]
    assert len(to_orgs) == FI_TX_TO_ORGS

    for i in range(N_FI_TX):
        tid = 5001 + i
        sender = 1001 + rng.randrange(N_INDIVIDUALS)
        if i < FI_TX_TO_ORGS:
            receiver = to_orgs[i]
        else:
            receiver = 1001 + rng.randrange(N_INDIVIDUALS)
        transactions.append([tid, sender, receiver])
        amount = rng.randrange(500, 250000)
        when = rng.choice(fi_dates)
        instrument = 3001 + rng.randrange(N_INSTRUMENTS)
        fi_tx.append([tid, amount, when.isoformat(), instrument])

    for i in range(N_MONEY_TX):
        tid = 5001 + N_FI_TX + i
        sender = 1001 + rng.randrange(N_INDIVIDUALS)
        receiver = 1001 + rng.randrange(N_INDIVIDUALS)  # money moves between people
        transactions.append([tid, sender, receiver])
        amount = rng.randrange(200, 36000) / 4.0  # quarters are exact in binary
        when = date(2010, 2, 1) + timedelta(days=rng.randrange(700))
        money_tx.append([tid, amount, when.isoformat(), rng.choice(CURRENCIES)])

    return transactions, fi_tx, money_tx


MANIFEST = """\
# mini-bank relational schema
table parties
column id number
column type text
pk id

table individuals
column id number
column firstName text
column lastName text
column birthday date
column salary number
pk id

table organizations
column id number
column companyname text
pk id

table addresses
column id number
column individual_id number
column street text
column city text
pk id

table financial_instruments
column id number
column name text
column parent_id number
pk id

table transactions
column id number
column fromParty number
column toParty number
pk id

table fi_transactions
column id number
column amount number
column transactiondate date
column instrument_id number
pk id

table money_transactions
column id number
column amount number
column transactiondate date
column currency text
pk id
"""

TABLES = {
    "parties": ["id", "type"],
    "individuals": ["id", "firstName", "lastName", "birthday", "salary"],
    "organizations": ["id", "companyname"],
    "addresses": ["id", "individual_id", "street", "city"],
    "financial_instruments": ["id", "name", "parent_id"],
    "transactions": ["id", "fromParty", "toParty"],
    "fi_transactions": ["id", "amount", "transactiondate", "instrument_id"],
    "money_transactions": ["id", "amount", "transactiondate", "currency"],
}

COLUMN_TYPES = {
    ("parties", "id"): "number", ("parties", "type"): "text",
    ("individuals", "id"): "number", ("individuals", "firstName"): "text",
    ("individuals", "lastName"): "text", ("individuals", "birthday"): "date",
    ("individuals", "salary"): "number",
    ("organizations", "id"): "number", ("organizations", "companyname"): "text",
    ("addresses", "id"): "number", ("addresses", "individual_id"): "number",
    ("addresses", "street"): "text", ("addresses", "city"): "text",
    ("financial_instruments", "id"): "number",
    ("financial_instruments", "name"): "text",
    ("financial_instruments", "parent_id"): "number",
    ("transactions", "id"): "number", ("transactions", "fromParty"): "number",
    ("transactions", "toParty"): "number",
    ("fi_transactions", "id"): "number", ("fi_transactions", "amount"): "number",
    ("fi_transactions", "transactiondate"): "date",
    ("fi_transactions", "instrument_id"): "number",
    ("money_transactions", "id"): "number",
    ("money_transactions", "amount"): "number",
    ("money_transactions", "transactiondate"): "date",
    ("money_transactions", "currency"): "text",
}

JOIN_NODES = [
    # (join node, pk column, fk column)
    ("jn_individuals_parties", ("parties", "id"), ("individuals", "id")),
    ("jn_organizations_parties", ("parties", "id"), ("organizations", "id")),
    ("jn_addresses_individuals", ("individuals", "id"), ("addresses", "individual_id")),
    ("jn_transactions_from", ("parties", "id"), ("transactions", "fromParty")),
    ("jn_transactions_to", ("parties", "id"), ("transactions", "toParty")),
    ("jn_fi_tx_transactions", ("transactions", "id"), ("fi_transactions", "id")),
    ("jn_money_tx_transactions", ("transactions", "id"), ("money_transactions", "id")),
    ("jn_fi_tx_instruments", ("financial_instruments", "id"),
     ("fi_transactions", "instrument_id")),
    ("jn_instruments_self", ("financial_instruments", "id"),
     ("financial_instruments", "parent_id")),
]


def graph_lines() -> list[str]:
    lines = ["# mini-bank metadata graph (tab separated triples)"]

    def node(s: str, p: str, o: str):
        lines.append(f"<{s}>\t{p}\t<{o}>")

    def text(s: str, p: str, o: str):
        lines.append(f"<{s}>\t{p}\t{o}")

    for marker in ("physical_table", "physical_column", "inheritance_node", "join_node"):
        text(marker, "layer", "physical")

    lines.append("")
    lines.append("# physical schema")
    for table, columns in TABLES.items():
        tnode = f"tbl_{table}"
        node(tnode, "type", "physical_table")
        text(tnode, "tablename", table)
        text(tnode, "layer", "physical")
        for column in columns:
            cnode = f"col_{table}_{column}"
            node(tnode, "column", cnode)
            node(cnode, "type", "physical_column")
            text(cnode, "columnname", column)
            text(cnode, "datatype", COLUMN_TYPES[(table, column)])
            text(cnode, "layer", "physical")

    lines.append("")
    lines.append("# join relationships (explicit join nodes)")
    for jnode, (pk_t, pk_c), (fk_t, fk_c) in JOIN_NODES:
        node(jnode, "type", "join_node")
        node(jnode, "primary_key_of", f"col_{pk_t}_{pk_c}")
        node(jnode, "foreign_key_of", f"col_{fk_t}_{fk_c}")
        text(jnode, "layer", "physical")

    lines.append("")
    lines.append("# inheritance structures")
    for inode, parent, children in [
        ("inh_parties", "parties", ("individuals", "organizations")),
        ("inh_transactions", "transactions", ("fi_transactions", "money_transactions")),
    ]:
        node(inode, "type", "inheritance_node")
        node(inode, "inheritance_parent", f"tbl_{parent}")
        for child in children:
            node(inode, "inheritance_child", f"tbl_{child}")
        text(inode, "layer", "logical")

    lines.append("")
    lines.append("# logical layer")
    text("log_financial_instruments", "concept_label", "financial instruments")
    node("log_financial_instruments", "implements", "tbl_financial_instruments")
    node("log_financial_instruments", "traded_in", "log_fi_transactions")
    text("log_financial_instruments", "layer", "logical")
    text("log_fi_transactions", "concept_label", "instrument transactions")
    node("log_fi_transactions", "implements", "tbl_fi_transactions")
    text("log_fi_transactions", "layer", "logical")
    for attr, label, table, column in [
        ("la_family_name", "family name", "individuals", "lastName"),
        ("la_given_name", "given name", "individuals", "firstName"),
        ("la_birth_date", "birth date", "individuals", "birthday"),
        ("la_transaction_date", "transaction date", "fi_transactions", "transactiondate"),
        ("la_company_name", "company name", "organizations", "companyname"),
    ]:
        text(attr, "concept_label", label)
        node(attr, "implements", f"col_{table}_{column}")
        text(attr, "layer", "logical")

    lines.append("")
    lines.append("# conceptual layer")
    text("con_financial_instruments", "concept_label", "financial instruments")
    node("con_financial_instruments", "implements", "log_financial_instruments")
    text("con_financial_instruments", "layer", "conceptual")

    lines.append("")
    lines.append("# domain ontology")
    text("ont_customers", "concept_label", "customers")
    node("ont_customers", "classifies", "ont_private_customers")
    node("ont_customers", "classifies", "ont_corporate_customers")
    text("ont_customers", "layer", "ontology")
    text("ont_private_customers", "concept_label", "private customers")
    node("ont_private_customers", "implements", "tbl_individuals")
    text("ont_private_customers", "layer", "ontology")
    text("ont_corporate_customers", "concept_label", "corporate customers")
    node("ont_corporate_customers", "implements", "tbl_organizations")
    text("ont_corporate_customers", "layer", "ontology")
    text("ont_wealthy_individuals", "concept_label", "wealthy individuals")
    node("ont_wealthy_individuals", "implements", "tbl_individuals")
    node("ont_wealthy_individuals", "filter_column", "col_individuals_salary")
    text("ont_wealthy_individuals", "filter_op", ">")
    text("ont_wealthy_individuals", "filter_value", "1000000")
    text("ont_wealthy_individuals", "layer", "ontology")

    lines.append("")
    lines.append("# synonym lexicon")
    for snode, label in [("syn_customer", "customer"), ("syn_client", "client"),
                         ("syn_political_organization", "political organization")]:
        text(snode, "concept_label", label)
        node(snode, "synonym_of", "tbl_parties")
        text(snode, "layer", "synonym")

    return lines


SUITE = """\
# mini-bank benchmark suite: query types B (base data), S (schema),
# D (domain ontology), I (inheritance), P (predicates), A (aggregates).

[q1.0]
query: private customers family name
type: D S I
gold:
  SELECT *
  FROM parties, individuals
  WHERE parties.id = individuals.id

[q2.1]
query: Nora
type: B I
notes: deliberately ambiguous; the name is also an organization
gold:
  SELECT *
  FROM parties, individuals
  WHERE parties.id = individuals.id
  AND individuals.firstName = 'Nora'

[q2.2]
query: Sara given name
type: B S I
gold:
  SELECT *
  FROM parties, individuals
  WHERE parties.id = individuals.id
  AND individuals.firstName = 'Sara'

[q3.0]
query: Sara Guttinger
type: B I
gold:
  SELECT *
  FROM parties, individuals
  WHERE parties.id = individuals.id
  AND individuals.firstName = 'Sara'
  AND individuals.lastName = 'Guttinger'

[q4.0]
query: Zurich
type: B
gold:
  SELECT *
  FROM addresses
  WHERE addresses.city = 'Zürich'

[q5.0]
query: customers Zurich financial instruments
type: D B S I
notes: deliberately ambiguous; customers split into two subtypes
gold:
  SELECT *
  FROM parties, individuals, addresses, transactions, fi_transactions, financial_instruments
  WHERE parties.id = individuals.id
  AND addresses.individual_id = individuals.id
  AND transactions.fromParty = parties.id
  AND transactions.id = fi_transactions.id
  AND fi_transactions.instrument_id = financial_instruments.id
  AND addresses.city = 'Zürich'

[q6.0]
query: transaction date > date(2011-09-01)
type: P S I
gold:
  SELECT *
  FROM transactions, fi_transactions
  WHERE transactions.id = fi_transactions.id
  AND fi_transactions.transactiondate > DATE '2011-09-01'

[q7.0]
query: salary >= 50000 and birthday = date(1981-04-23)
type: P S I
gold:
  SELECT *
  FROM parties, individuals
  WHERE parties.id = individuals.id
  AND individuals.birthday = DATE '1981-04-23'
  AND individuals.salary >= 50000

[q8.0]
query: wealthy individuals
type: D I
notes: the filter comes from the ontology annotation, not the query
gold:
  SELECT *
  FROM parties, individuals
  WHERE parties.id = individuals.id
  AND individuals.salary > 1000000

[q9.0]
query: sum (amount) group by (transaction date)
type: A S
gold:
  SELECT sum(amount), transactiondate
  FROM fi_transactions
  GROUP BY transactiondate

[q10.0]
query: count (transactions) group by (company name)
type: A S
gold:
  SELECT count(fi_transactions.id), companyname
  FROM transactions, fi_transactions, organizations
  WHERE transactions.id = fi_transactions.id
  AND transactions.toParty = organizations.id
  GROUP BY organizations.companyname
  ORDER BY count (fi_transactions.id) desc

[q11.0]
query: client
type: S
notes: synonym entry resolving to the supertype table
gold:
  SELECT *
  FROM parties

threshold q1.0 1.0 1.0
threshold q2.1 1.0 1.0
threshold q2.2 1.0 1.0
threshold q3.0 1.0 1.0
threshold q4.0 1.0 1.0
threshold q5.0 1.0 1.0
threshold q6.0 1.0 1.0
threshold q7.0 1.0 1.0
threshold q8.0 1.0 1.0
threshold q9.0 1.0 1.0
threshold q10.0 1.0 1.0
threshold q11.0 1.0 1.0
"""

CONFIG = """\
# mini-bank workspace (paths are relative to this file)
graph = graph.tsv
patterns = patterns.txt
manifest = manifest.txt
csv_dir = csv
suite = suite.txt
feedback_log = feedback.ndjson
top_n = 10
snippet_cap = 20
# web client assets; run `npm run build` in frontend/ first, then `ksdw serve`
# exposes them at /ui (the key is ignored while the directory is missing)
ui_dir = ../../frontend/dist
"""


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def main() -> None:
    rng = random.Random(20120810)
    out_csv = OUT / "csv"
    out_csv.mkdir(parents=True, exist_ok=True)

    individuals = individuals_rows(rng)
    organizations = organizations_rows(rng)
    parties = [[r[0], "I"] for r in individuals] + [[r[0], "O"] for r in organizations]
    addresses = addresses_rows(rng)
    instruments = instruments_rows(rng)
    transactions, fi_tx, money_tx = transactions_rows(rng)

    write_csv(out_csv / "parties.csv", TABLES["parties"], parties)
    write_csv(out_csv / "individuals.csv", TABLES["individuals"], individuals)
    write_csv(out_csv / "organizations.csv", TABLES["organizations"], organizations)
    write_csv(out_csv / "addresses.csv", TABLES["addresses"], addresses)
    write_csv(out_csv / "financial_instruments.csv", TABLES["financial_instruments"],
              instruments)
    write_csv(out_csv / "transactions.csv", TABLES["transactions"], transactions)
    write_csv(out_csv / "fi_transactions.csv", TABLES["fi_transactions"], fi_tx)
    write_csv(out_csv / "money_transactions.csv", TABLES["money_transactions"], money_tx)

    (OUT / "graph.tsv").write_text("\n".join(graph_lines()) + "\n", encoding="utf-8")
    (OUT / "manifest.txt").write_text(MANIFEST, encoding="utf-8")
    (OUT / "suite.txt").write_text(SUITE, encoding="utf-8")
    (OUT / "workspace.cfg").write_text(CONFIG, encoding="utf-8")
    shutil.copy(ROOT / "src" / "ksdw" / "data" / "builtin_patterns.txt",
                OUT / "patterns.txt")
    print(f"wrote fixture to {OUT}")


if __name__ == "__main__":
    main()
