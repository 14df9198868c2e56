import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from config import Config  # noqa: E402
from diagrams import braid_from_text, closure  # noqa: E402

BRAIDS = {
    'unknot': "1:",
    'unlink': "2:",
    'unlink3': "3:",
    'kink': "2: 1",
    'hopf': "2: 1 1",
    'trefoil': "2: 1 1 1",
    'figure_eight': "3: 1 -2 1 -2",
    't33': "3: 2 1 2 1 2 1",
    't34': "3: 2 1 2 1 2 1 2 1",
}


def pytest_collection_modifyitems(config, items):
    if Config.ENABLE_EXTENDED:
        return
    skip = pytest.mark.skip(reason="set KHWIDTH_ENABLE_EXTENDED=true to run t = 3 checks")
    for item in items:
        if 'extended' in item.keywords:
            item.add_marker(skip)


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    """Keep process pools out of unit tests."""
    monkeypatch.setattr(Config, 'THREADS', 1)


@pytest.fixture
def diagram():
    def build(name):
        return closure(braid_from_text(BRAIDS[name]))
    return build


@pytest.fixture
def unknot(diagram):
    return diagram('unknot')


@pytest.fixture
def hopf(diagram):
    return diagram('hopf')


@pytest.fixture
def trefoil(diagram):
    return diagram('trefoil')


@pytest.fixture
def figure_eight(diagram):
    return diagram('figure_eight')


@pytest.fixture
def t33(diagram):
    return diagram('t33')


@pytest.fixture
def t34(diagram):
    return diagram('t34')
