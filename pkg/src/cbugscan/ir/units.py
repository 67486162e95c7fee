"""Translation units and the memory-bounded unit cache.

A TranslationUnit bundles everything one source file contributes: its
AST, per-function CFGs, the call graph, and declaration tables. The
UnitManager builds units on demand through a loader callable and keeps
at most `budget` of them resident, evicting the least recently used.
Analyses that fetch units only through the manager produce identical
results at any budget; only peak memory and reload counts change.
"""

from __future__ import annotations

import itertools
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable

from cbugscan.errors import ConfigError
from cbugscan.frontend.ast_nodes import AstNode, NodeKind
from cbugscan.frontend.parser import parse
from cbugscan.frontend.preprocess import preprocess_source
from cbugscan.ir.callgraph import CallGraph, build_call_graph
from cbugscan.ir.cfg import Cfg, build_cfg


@dataclass(eq=False)
class TranslationUnit:
    path: str
    ast: AstNode
    functions: dict[str, AstNode] = field(default_factory=dict)
    cfgs: dict[str, Cfg] = field(default_factory=dict)
    call_graph: CallGraph = field(default_factory=CallGraph)
    globals: dict[str, AstNode] = field(default_factory=dict)
    func_params: dict[str, list[str]] = field(default_factory=dict)
    func_locals: dict[str, set[str]] = field(default_factory=dict)

    def defined_function_names(self) -> list[str]:
        return list(self.functions)


def build_unit_from_text(source: str, path: str) -> TranslationUnit:
    """Parse + lower one source text into a complete unit."""
    ast = parse(source, path)
    unit = TranslationUnit(path=path, ast=ast)
    ids = itertools.count(0)
    for decl in ast.children:
        if decl.kind is NodeKind.FUNCTION_DEF:
            unit.functions[decl.text] = decl
        elif decl.kind is NodeKind.VAR_DECL:
            unit.globals[decl.text] = decl
    for name, func in unit.functions.items():
        params = [p.text for p in func.children[:-1]]
        unit.func_params[name] = params
        body = func.children[-1]
        local_names = set(params)
        _collect_locals(body, local_names)
        unit.func_locals[name] = local_names
        unit.cfgs[name] = build_cfg(func, ids)
    unit.call_graph = build_call_graph(unit.functions)
    return unit


def _collect_locals(node: AstNode, into: set[str]) -> None:
    if node.kind is NodeKind.VAR_DECL:
        into.add(node.text)
    for child in node.children:
        _collect_locals(child, into)


def load_unit(path: str, flags: tuple[str, ...] = (),
              preprocess_mode: str = "none",
              preprocess_command: str | None = None) -> TranslationUnit:
    """Read (optionally preprocess) and build the unit for one file."""
    source = preprocess_source(path, flags, preprocess_mode, preprocess_command)
    return build_unit_from_text(source, path)


class UnitManager:
    """LRU cache of translation units, loaded lazily by path.

    loader(path) must return a TranslationUnit. A budget of None means
    unlimited residency; otherwise at most `budget` (>= 1) units stay
    loaded. Load counts and the high-water mark of resident units are
    tracked so streaming behavior is observable in tests.
    """

    def __init__(self, loader: Callable[[str], TranslationUnit],
                 budget: int | None = None):
        if budget is not None and budget < 1:
            raise ConfigError("unit budget must be at least 1")
        self._loader = loader
        self._budget = budget
        self._resident: OrderedDict[str, TranslationUnit] = OrderedDict()
        self._lock = threading.RLock()
        self.load_counts: dict[str, int] = {}
        self.total_loads = 0
        self.max_resident = 0

    @property
    def budget(self) -> int | None:
        return self._budget

    def get(self, path: str) -> TranslationUnit:
        with self._lock:
            unit = self._resident.get(path)
            if unit is not None:
                self._resident.move_to_end(path)
                return unit
            unit = self._loader(path)
            self._resident[path] = unit
            self.load_counts[path] = self.load_counts.get(path, 0) + 1
            self.total_loads += 1
            if self._budget is not None:
                while len(self._resident) > self._budget:
                    self._resident.popitem(last=False)
            self.max_resident = max(self.max_resident, len(self._resident))
            return unit

    def resident_paths(self) -> list[str]:
        with self._lock:
            return list(self._resident)

    def drop(self, path: str) -> None:
        with self._lock:
            self._resident.pop(path, None)
