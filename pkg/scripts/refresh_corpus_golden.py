#!/usr/bin/env python3
"""Regenerate tests/golden/corpus_report.json.

Runs all four checkers with their bundled default configs over every
corpus file and freezes the normalized JSON report. Paths are kept
relative to the tests directory so the golden file is stable across
machines. Run from anywhere:

    python3 scripts/refresh_corpus_golden.py
"""

import glob
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from cbugscan.config import AnalysisJob, SourceDescriptor
from cbugscan.engine import run_job
from cbugscan.report import export_json

TESTS_DIR = os.path.normpath(
    os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "tests"))
GOLDEN = os.path.join("golden", "corpus_report.json")


def main() -> int:
    os.chdir(TESTS_DIR)
    sources = sorted(glob.glob(os.path.join("corpus", "*.c")))
    if not sources:
        sys.stderr.write("no corpus files found\n")
        return 1
    job = AnalysisJob(
        sources=[SourceDescriptor(path) for path in sources],
        checkers=[("automaton", None), ("lockstat", None),
                  ("thread", None), ("reach", None)],
    )
    result = run_job(job)
    for diagnostic in result.diagnostics:
        sys.stderr.write(f"diagnostic: {diagnostic}\n")
    if result.diagnostics:
        sys.stderr.write("refusing to freeze a report with diagnostics\n")
        return 1
    with open(GOLDEN, "w", encoding="utf-8") as handle:
        handle.write(export_json(result.traces))
    sys.stderr.write(
        f"wrote {GOLDEN}: {len(result.traces)} traces "
        f"from {len(sources)} files\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
