import logging
from pathlib import Path

import pytest

from ksdw.config import load_config, load_workspace

logging.getLogger("ksdw").setLevel(logging.ERROR)

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures" / "mini-bank"


@pytest.fixture(scope="session")
def workspace():
    return load_workspace(load_config(FIXTURE_DIR / "workspace.cfg"))


@pytest.fixture(scope="session")
def ctx(workspace):
    return workspace.context


@pytest.fixture(scope="session")
def graph(ctx):
    return ctx.graph


@pytest.fixture(scope="session")
def store(ctx):
    return ctx.store


@pytest.fixture(scope="session")
def registry(ctx):
    return ctx.registry
