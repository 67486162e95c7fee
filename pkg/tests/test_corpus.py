"""Planted-bug corpus: every fixture's findings, frozen exactly.

Each corpus file documents its planted bug (or cleanliness) in a header
comment; manifest.json freezes the expected (checker, importance,
message, count) groups per file. Running all four checkers on a file
must reproduce its manifest entry exactly: no missed bugs, no extra
noise. The full-corpus report is additionally pinned byte-for-byte in
golden/corpus_report.json (regenerate with
scripts/refresh_corpus_golden.py after intentional changes).
"""

import collections
import glob
import json
import os

import pytest

from conftest import CORPUS_DIR, GOLDEN_DIR
from cbugscan.config import AnalysisJob, SourceDescriptor
from cbugscan.engine import run_job
from cbugscan.report import export_json

ALL_CHECKERS = [("automaton", None), ("lockstat", None),
                ("thread", None), ("reach", None)]

with open(os.path.join(CORPUS_DIR, "manifest.json"), encoding="utf-8") as _fh:
    MANIFEST = json.load(_fh)


def corpus_files():
    return sorted(
        os.path.basename(p) for p in glob.glob(os.path.join(CORPUS_DIR, "*.c")))


def run_on(paths, checkers=ALL_CHECKERS, **kwargs):
    job = AnalysisJob(
        sources=[SourceDescriptor(p) for p in paths],
        checkers=list(checkers),
        **kwargs,
    )
    result = run_job(job)
    assert result.diagnostics == [], result.diagnostics
    return result


# -- corpus inventory ---------------------------------------------------------------

def test_every_corpus_file_is_in_the_manifest():
    assert corpus_files() == sorted(MANIFEST)


def test_at_least_twenty_planted_bugs():
    planted = [name for name, expected in MANIFEST.items() if expected]
    assert len(planted) >= 20
    clean = [name for name, expected in MANIFEST.items() if not expected]
    assert len(clean) >= 4


def test_corpus_covers_all_four_checkers():
    checkers = {group["checker"]
                for expected in MANIFEST.values() for group in expected}
    assert checkers == {"automaton", "lockstat", "thread", "reach"}


def test_every_file_documents_its_expectation():
    for name in corpus_files():
        with open(os.path.join(CORPUS_DIR, name), encoding="utf-8") as handle:
            header = handle.read(600)
        if MANIFEST[name]:
            assert "Planted bug:" in header, name
        else:
            assert "Clean file:" in header, name


# -- per-file exactness ----------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(MANIFEST))
def test_file_findings_match_manifest(name):
    result = run_on([os.path.join(CORPUS_DIR, name)])
    got = collections.Counter(
        (t.checker, t.importance.value, t.message) for t in result.traces)
    want = collections.Counter()
    for group in MANIFEST[name]:
        want[(group["checker"], group["importance"], group["message"])] = \
            group["count"]
    assert got == want


# -- whole-corpus report ---------------------------------------------------------------

def corpus_job(**kwargs):
    sources = [os.path.join("corpus", name) for name in corpus_files()]
    return AnalysisJob(
        sources=[SourceDescriptor(p) for p in sources],
        checkers=list(ALL_CHECKERS),
        **kwargs,
    )


def test_full_corpus_report_matches_golden(monkeypatch):
    monkeypatch.chdir(os.path.dirname(CORPUS_DIR))
    result = run_job(corpus_job())
    assert result.diagnostics == []
    with open(os.path.join(GOLDEN_DIR, "corpus_report.json"),
              encoding="utf-8") as handle:
        golden = handle.read()
    assert export_json(result.traces) == golden
