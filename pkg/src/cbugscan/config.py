"""Command-line and file inputs turned into a validated analysis job."""

from __future__ import annotations

import argparse
import json
import os
from dataclasses import dataclass, field

from cbugscan.checkers import builtin_registry
from cbugscan.errors import ConfigError
from cbugscan.report import Importance


@dataclass(frozen=True)
class SourceDescriptor:
    path: str
    flags: tuple[str, ...] = ()


@dataclass
class AnalysisJob:
    sources: list[SourceDescriptor] = field(default_factory=list)
    checkers: list[tuple[str, str | None]] = field(default_factory=list)
    memory_units: int | None = None
    output_format: str = "console"
    output_path: str | None = None
    preprocess_command: str | None = None
    min_importance: Importance = Importance.WARNING


class CliParser(argparse.ArgumentParser):
    """argparse that reports errors as exceptions instead of exiting."""

    def error(self, message: str):
        raise ConfigError(message)


def check_arg_parser() -> argparse.ArgumentParser:
    parser = CliParser(prog="cbugscan check", add_help=False)
    parser.add_argument("files", nargs="*", metavar="FILE")
    parser.add_argument("--dir", action="append", default=[])
    parser.add_argument("--list", action="append", default=[])
    parser.add_argument("--compdb", action="append", default=[])
    parser.add_argument("--checker", action="append", default=[],
                        metavar="NAME[:CONFIG]")
    parser.add_argument("--memory-units", type=int, default=None)
    parser.add_argument("--format", choices=["json", "xml", "console"],
                        default="console")
    parser.add_argument("--output", default=None)
    parser.add_argument("--preprocess", default=None, metavar="CMD")
    parser.add_argument("--recursive", action="store_true")
    parser.add_argument("--min-importance", choices=["warning", "error"],
                        default="warning")
    return parser


def load_compilation_database(path: str) -> list[SourceDescriptor]:
    """Read a JSON array of {file, flags} entries.

    Duplicate files keep their first position in the list but take the
    last entry's flags.
    """
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read compilation database {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed compilation database {path}: {exc}") from exc
    if not isinstance(data, list):
        raise ConfigError(f"{path}: compilation database must be a JSON array")
    by_file: dict[str, SourceDescriptor] = {}
    for i, entry in enumerate(data):
        if (not isinstance(entry, dict)
                or not isinstance(entry.get("file"), str)
                or not isinstance(entry.get("flags"), list)
                or not all(isinstance(f, str) for f in entry["flags"])):
            raise ConfigError(
                f"{path}: entry {i} needs a string 'file' and a string list 'flags'")
        by_file[entry["file"]] = SourceDescriptor(
            entry["file"], tuple(entry["flags"]))
    return list(by_file.values())


def expand_directory(path: str, recursive: bool) -> list[str]:
    if not os.path.isdir(path):
        raise ConfigError(f"not a directory: {path}")
    if recursive:
        found = []
        for root, _dirs, files in os.walk(path):
            found.extend(os.path.join(root, f)
                         for f in files if f.endswith(".c"))
        return sorted(found)
    return sorted(
        os.path.join(path, f) for f in os.listdir(path)
        if f.endswith(".c") and os.path.isfile(os.path.join(path, f)))


def read_list_file(path: str) -> list[str]:
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read list file {path}: {exc}") from exc
    entries = []
    for line in lines:
        line = line.strip()
        if line and not line.startswith("#"):
            entries.append(line)
    return entries


def parse_checker_spec(spec: str) -> tuple[str, str | None]:
    name, sep, config = spec.partition(":")
    if not name:
        raise ConfigError(f"bad checker spec {spec!r}")
    return name, (config if sep else None)


def build_job(argv: list[str]) -> AnalysisJob:
    """Turn `check ...` command-line arguments into a validated job."""
    if not argv or argv[0] != "check":
        raise ConfigError("build_job expects a 'check' command line")
    args = check_arg_parser().parse_args(argv[1:])

    sources: list[SourceDescriptor] = []
    seen_paths: set[str] = set()

    def add(descriptor: SourceDescriptor) -> None:
        if descriptor.path not in seen_paths:
            seen_paths.add(descriptor.path)
            sources.append(descriptor)

    for path in args.files:
        add(SourceDescriptor(path))
    for directory in args.dir:
        for path in expand_directory(directory, args.recursive):
            add(SourceDescriptor(path))
    for list_path in args.list:
        for path in read_list_file(list_path):
            add(SourceDescriptor(path))
    for compdb_path in args.compdb:
        for descriptor in load_compilation_database(compdb_path):
            add(descriptor)

    if not sources:
        raise ConfigError("no source files given")
    for descriptor in sources:
        if not os.path.isfile(descriptor.path):
            raise ConfigError(f"no such source file: {descriptor.path}")

    if not args.checker:
        raise ConfigError("at least one --checker is required")
    registry = builtin_registry()
    checkers: list[tuple[str, str | None]] = []
    for spec in args.checker:
        name, config_path = parse_checker_spec(spec)
        if name not in registry.names():
            known = ", ".join(registry.names())
            raise ConfigError(f"unknown checker {name!r} (known: {known})")
        if any(existing == name for existing, _ in checkers):
            raise ConfigError(f"checker {name!r} listed twice")
        if config_path is not None and not os.path.isfile(config_path):
            raise ConfigError(f"unreadable checker config: {config_path}")
        checkers.append((name, config_path))

    if args.memory_units is not None and args.memory_units < 1:
        raise ConfigError("--memory-units must be at least 1")

    return AnalysisJob(
        sources=sources,
        checkers=checkers,
        memory_units=args.memory_units,
        output_format=args.format,
        output_path=args.output,
        preprocess_command=args.preprocess,
        min_importance=Importance(args.min_importance),
    )
