import os
import sys
import textwrap

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from cbugscan.ir import build_unit_from_text

CORPUS_DIR = os.path.join(os.path.dirname(__file__), "corpus")
GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")


@pytest.fixture
def unit_of():
    """Build a TranslationUnit from dedented inline source."""
    def build(source: str, path: str = "test.c"):
        return build_unit_from_text(textwrap.dedent(source), path)
    return build


@pytest.fixture
def corpus_path():
    def lookup(name: str) -> str:
        path = os.path.join(CORPUS_DIR, name)
        assert os.path.isfile(path), f"missing corpus file {name}"
        return path
    return lookup
