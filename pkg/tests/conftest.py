import json
import sys
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
SAMPLES = Path(__file__).parent.parent / "samples"

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def mars_news_text() -> str:
    return (SAMPLES / "mars_news.json").read_text()


@pytest.fixture
def mars_news_script(mars_news_text):
    from soundscript.script import parse_script

    return parse_script(mars_news_text)


@pytest.fixture
def default_catalog():
    from soundscript.voices import load_catalog

    return load_catalog()


@pytest.fixture
def csr_replay() -> dict:
    return json.loads((FIXTURES / "csr_replay.json").read_text())
