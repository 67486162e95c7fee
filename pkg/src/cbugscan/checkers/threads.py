"""Deadlock checker: lock-order graphs and cycle detection.

Each thread entry point is walked interprocedurally with a may-hold
lockset. Acquiring B while A is held records the dependency edge
A <- B (B depends on A). The per-entry graphs are unioned and every
elementary cycle in the combined graph is reported: a cycle means two
orders of acquisition are possible, which is a potential deadlock.

Thread entry points come from spawn-call matches (the argument bound
by %F), from names listed in the config, or, when neither yields
anything, every defined function (conservative).
"""

from __future__ import annotations

import shlex
from collections import deque
from dataclasses import dataclass, field

from cbugscan.checkers.base import Checker, Services
from cbugscan.errors import ConfigError
from cbugscan.frontend.ast_nodes import (
    AstNode,
    NodeKind,
    SourceLocation,
    iter_tree,
    to_text,
)
from cbugscan.ir.units import TranslationUnit
from cbugscan.patterns import Pattern, compile_pattern, match_node
from cbugscan.report import ErrorTrace, Importance, TraceStep
from cbugscan.traverse import build_supergraph

DEFAULT_SPAWN = 'pthread_create(%A, %B, %F, %D)'
DEFAULT_MAX_CYCLES = 1000


@dataclass
class ThreadConfig:
    spawns: list[Pattern] = field(default_factory=list)
    entries: list[str] = field(default_factory=list)
    locks: list[Pattern] = field(default_factory=list)
    unlocks: list[Pattern] = field(default_factory=list)
    max_cycles: int = DEFAULT_MAX_CYCLES


def parse_thread_config(text: str, source: str = "<thread>") -> ThreadConfig:
    config = ThreadConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        try:
            parts = shlex.split(raw, comments=True)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from exc
        if not parts:
            continue
        directive = parts[0]
        if directive == "spawn" and len(parts) == 2:
            pattern = compile_pattern(parts[1])
            if "F" not in pattern.metavar_names():
                raise ConfigError(
                    f"{source}:{lineno}: spawn template must bind %F")
            config.spawns.append(pattern)
        elif directive == "entry" and len(parts) == 2:
            config.entries.append(parts[1])
        elif directive == "lock" and len(parts) == 4 and parts[2] == "unlock":
            config.locks.append(compile_pattern(parts[1]))
            config.unlocks.append(compile_pattern(parts[3]))
        elif directive == "lock" and len(parts) == 2:
            config.locks.append(compile_pattern(parts[1]))
        elif directive == "unlock" and len(parts) == 2:
            config.unlocks.append(compile_pattern(parts[1]))
        elif directive == "max-cycles" and len(parts) == 2:
            try:
                config.max_cycles = int(parts[1])
            except ValueError as exc:
                raise ConfigError(f"{source}:{lineno}: bad max-cycles") from exc
        else:
            raise ConfigError(f"{source}:{lineno}: cannot parse {raw.strip()!r}")
    if not config.spawns:
        config.spawns.append(compile_pattern(DEFAULT_SPAWN))
    return config


def lock_key(pattern: Pattern, bindings: dict[str, AstNode],
             node: AstNode) -> str:
    """Canonical lock identity: the bound expression's text, with one
    leading address-of stripped so `&m` and the lock object `m` agree."""
    names = pattern.metavar_names()
    expr = bindings[names[0]] if names else node
    if expr.kind is NodeKind.UNARY_OP and expr.text == "addrof":
        expr = expr.children[0]
    return to_text(expr)


def spawned_entry_name(binding: AstNode) -> str | None:
    """Function name from a spawn call's %F argument (f or &f)."""
    node = binding
    if node.kind is NodeKind.UNARY_OP and node.text == "addrof":
        node = node.children[0]
    if node.kind is NodeKind.IDENTIFIER:
        return node.text
    return None


@dataclass(frozen=True)
class Witness:
    entry: str
    first_location: SourceLocation
    second_location: SourceLocation


LockOrderGraph = dict[tuple[str, str], list[Witness]]


def find_thread_entries(unit: TranslationUnit, config: ThreadConfig,
                        services: Services) -> list[str]:
    entries: list[str] = []
    for spawn in config.spawns:
        for node in iter_tree(unit.ast):
            bindings = match_node(spawn, node)
            if bindings is None:
                continue
            name = spawned_entry_name(bindings["F"])
            if name is not None and name in unit.functions and name not in entries:
                entries.append(name)
    for name in config.entries:
        if name not in unit.functions:
            services.report_diagnostic(
                f"{unit.path}: thread entry {name!r} is not defined here; skipped")
            continue
        if name not in entries:
            entries.append(name)
    if not entries:
        entries = list(unit.functions)
    return entries


def build_dependency_graph(unit: TranslationUnit, entry: str,
                           config: ThreadConfig) -> LockOrderGraph:
    """Interprocedural may-hold lockset walk from one entry point."""
    graph = build_supergraph(unit, entry)
    edges: LockOrderGraph = {}
    seen: set[tuple[str, str, SourceLocation, SourceLocation]] = set()

    # dataflow value: frozenset of (lock key, acquisition location)
    def transfer(in_set: frozenset, super_key) -> frozenset:
        node = graph.cfg_node(super_key)
        if node.ast_ref is None:
            return in_set
        current = set(in_set)
        for subnode in iter_tree(node.ast_ref):
            for pattern in config.locks:
                bindings = match_node(pattern, subnode)
                if bindings is None:
                    continue
                key = lock_key(pattern, bindings, subnode)
                for held_key, held_loc in sorted(current):
                    if held_key == key:
                        continue
                    dedup = (held_key, key, held_loc, subnode.location)
                    if dedup in seen:
                        continue
                    seen.add(dedup)
                    edges.setdefault((held_key, key), []).append(
                        Witness(entry, held_loc, subnode.location))
                current.add((key, subnode.location))
            for pattern in config.unlocks:
                bindings = match_node(pattern, subnode)
                if bindings is None:
                    continue
                key = lock_key(pattern, bindings, subnode)
                current = {pair for pair in current if pair[0] != key}
        return frozenset(current)

    in_sets = {graph.entry: frozenset()}
    work = deque([graph.entry])
    while work:
        super_key = work.popleft()
        out = transfer(in_sets[super_key], super_key)
        for succ in graph.succs.get(super_key, []):
            merged = in_sets.get(succ, frozenset()) | out
            if succ not in in_sets or merged != in_sets[succ]:
                in_sets[succ] = merged
                work.append(succ)
    return edges


def combine_graphs(graphs: list[LockOrderGraph]) -> LockOrderGraph:
    combined: LockOrderGraph = {}
    for graph in graphs:
        for edge, witnesses in graph.items():
            combined.setdefault(edge, []).extend(witnesses)
    for witnesses in combined.values():
        witnesses.sort(key=lambda w: (w.entry, w.first_location, w.second_location))
    return combined


def elementary_cycles(edges: LockOrderGraph,
                      cap: int = DEFAULT_MAX_CYCLES) -> list[tuple[str, ...]]:
    """Every elementary cycle, as a node tuple rotated so its
    lexicographically smallest key comes first; enumeration stops at cap."""
    adjacency: dict[str, list[str]] = {}
    for a, b in edges:
        adjacency.setdefault(a, []).append(b)
    for targets in adjacency.values():
        targets.sort()

    cycles: list[tuple[str, ...]] = []

    def search(start: str, current: str, path: list[str],
               on_path: set[str]) -> None:
        if len(cycles) >= cap:
            return
        for target in adjacency.get(current, ()):
            if target == start and len(path) >= 2:
                cycles.append(tuple(path))
                if len(cycles) >= cap:
                    return
            elif target > start and target not in on_path:
                on_path.add(target)
                path.append(target)
                search(start, target, path, on_path)
                path.pop()
                on_path.remove(target)

    for start in sorted(adjacency):
        search(start, start, [start], {start})
    return cycles


class ThreadChecker(Checker):
    name = "thread"

    def __init__(self, config_path: str | None):
        if config_path is None:
            raise ConfigError("thread checker requires a config file")
        try:
            with open(config_path, encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {config_path}: {exc}") from exc
        self.config = parse_thread_config(text, config_path)

    def check_unit(self, unit: TranslationUnit,
                   services: Services) -> list[ErrorTrace]:
        entries = find_thread_entries(unit, self.config, services)
        graphs = [build_dependency_graph(unit, entry, self.config)
                  for entry in entries]
        combined = combine_graphs(graphs)
        traces = []
        for cycle in elementary_cycles(combined, self.config.max_cycles):
            chain = " <- ".join(cycle + (cycle[0],))
            message = f"circular lock dependency: {chain}"
            steps = []
            for i, lock_a in enumerate(cycle):
                lock_b = cycle[(i + 1) % len(cycle)]
                witness = combined[(lock_a, lock_b)][0]
                steps.append(TraceStep(
                    witness.first_location,
                    f"{lock_a} acquired ({witness.entry})"))
                steps.append(TraceStep(
                    witness.second_location,
                    f"{lock_b} acquired while {lock_a} held ({witness.entry})"))
            traces.append(ErrorTrace(
                checker="thread",
                importance=Importance.ERROR,
                message=message,
                steps=tuple(steps),
            ))
        return traces
