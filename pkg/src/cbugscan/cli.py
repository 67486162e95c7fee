"""Command-line interface.

Exit codes: 0 = clean run, 1 = at least one error-importance finding,
2 = usage, configuration, or frontend failure.
"""

from __future__ import annotations

import sys

from cbugscan.config import CliParser, build_job
from cbugscan.engine import run_job
from cbugscan.errors import CbugscanError, ConfigError
from cbugscan.frontend.ast_nodes import dump_sexpr
from cbugscan.frontend.parser import parse
from cbugscan.frontend.preprocess import preprocess_source
from cbugscan.ir.cfg import cfg_to_dot
from cbugscan.ir.units import load_unit
from cbugscan.report import (
    EXPORTERS,
    Triage,
    TriageDb,
    format_statistics,
    traces_from_json,
)

USAGE = """\
usage: cbugscan COMMAND ...

commands:
  check [--dir D]... [--list F]... [--compdb F]... [FILE]...
        --checker NAME[:CONFIG]... [--memory-units N]
        [--format json|xml|console] [--output PATH] [--preprocess CMD]
        [--recursive] [--min-importance warning|error]
                         run checkers over the given sources
  dump-ast FILE          print the file's syntax tree
  dump-cfg FILE [--function NAME]
                         print control flow graphs as DOT
  report DB [--traces FILE]
                         triage statistics from a journal (+ report file)
  triage DB ID real|false-positive [--report FILE]
                         record a triage verdict for one finding
"""


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    if not argv:
        sys.stderr.write(USAGE)
        return 2
    if argv[0] in ("-h", "--help", "help"):
        sys.stdout.write(USAGE)
        return 0
    command = argv[0]
    try:
        if command == "check":
            return _cmd_check(argv)
        if command == "dump-ast":
            return _cmd_dump_ast(argv[1:])
        if command == "dump-cfg":
            return _cmd_dump_cfg(argv[1:])
        if command == "report":
            return _cmd_report(argv[1:])
        if command == "triage":
            return _cmd_triage(argv[1:])
        sys.stderr.write(f"cbugscan: unknown command {command!r}\n{USAGE}")
        return 2
    except CbugscanError as exc:
        sys.stderr.write(f"cbugscan: {exc}\n")
        return 2


def _cmd_check(argv: list[str]) -> int:
    job = build_job(argv)
    result = run_job(job)
    for diagnostic in result.diagnostics:
        sys.stderr.write(f"cbugscan: {diagnostic}\n")
    rendered = EXPORTERS[job.output_format](result.traces)
    if job.output_path:
        try:
            with open(job.output_path, "w", encoding="utf-8") as handle:
                handle.write(rendered)
        except OSError as exc:
            raise ConfigError(f"cannot write {job.output_path}: {exc}") from exc
    else:
        sys.stdout.write(rendered)
    return 1 if result.has_errors() else 0


def _cmd_dump_ast(argv: list[str]) -> int:
    parser = CliParser(prog="cbugscan dump-ast", add_help=False)
    parser.add_argument("file")
    args = parser.parse_args(argv)
    text = preprocess_source(args.file)
    sys.stdout.write(dump_sexpr(parse(text, args.file)) + "\n")
    return 0


def _cmd_dump_cfg(argv: list[str]) -> int:
    parser = CliParser(prog="cbugscan dump-cfg", add_help=False)
    parser.add_argument("file")
    parser.add_argument("--function", default=None)
    args = parser.parse_args(argv)
    unit = load_unit(args.file)
    names = list(unit.cfgs)
    if args.function is not None:
        if args.function not in unit.cfgs:
            raise ConfigError(
                f"no function {args.function!r} in {args.file}")
        names = [args.function]
    sys.stdout.write("\n".join(cfg_to_dot(unit.cfgs[n]) for n in names) + "\n")
    return 0


def _cmd_report(argv: list[str]) -> int:
    parser = CliParser(prog="cbugscan report", add_help=False)
    parser.add_argument("db")
    parser.add_argument("--traces", default=None)
    args = parser.parse_args(argv)
    db = TriageDb(args.db)
    if args.traces is None:
        verdicts = db.entries()
        real = sum(1 for v in verdicts.values() if v is Triage.REAL)
        false = sum(1 for v in verdicts.values() if v is Triage.FALSE_POSITIVE)
        sys.stdout.write(
            f"{len(verdicts)} triaged findings: {real} real, "
            f"{false} false positives\n")
        return 0
    try:
        with open(args.traces, encoding="utf-8") as handle:
            traces = traces_from_json(handle.read())
    except OSError as exc:
        raise ConfigError(f"cannot read {args.traces}: {exc}") from exc
    traces = db.apply(traces)
    sys.stdout.write(format_statistics(traces))
    return 0


def _cmd_triage(argv: list[str]) -> int:
    parser = CliParser(prog="cbugscan triage", add_help=False)
    parser.add_argument("db")
    parser.add_argument("error_id")
    parser.add_argument("status", choices=["real", "false-positive"])
    parser.add_argument("--report", default=None)
    args = parser.parse_args(argv)
    if args.report is not None:
        try:
            with open(args.report, encoding="utf-8") as handle:
                traces = traces_from_json(handle.read())
        except OSError as exc:
            raise ConfigError(f"cannot read {args.report}: {exc}") from exc
        if all(t.id != args.error_id for t in traces):
            sys.stderr.write(
                f"cbugscan: warning: id {args.error_id} not present in "
                f"{args.report}; recorded anyway\n")
    TriageDb(args.db).record(args.error_id, Triage(args.status))
    return 0


if __name__ == "__main__":
    sys.exit(main())
