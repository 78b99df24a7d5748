import sys
from pathlib import Path

import pytest

from npequiv import load
from npequiv.spectrum import CORPUS_DIR

sys.path.insert(0, str(Path(__file__).parent))


def corpus_model(slug: str):
    return load(CORPUS_DIR / f"{slug}.nplts")


@pytest.fixture
def corpus():
    return corpus_model


@pytest.fixture
def corpus_dir():
    return CORPUS_DIR
