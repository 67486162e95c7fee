"""Call graph construction over a translation unit.

Call sites are collected in AST post-order, so nested calls appear
inner-first, matching evaluation order. Calls through anything other
than a plain identifier are recorded under the `<indirect>` sentinel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from cbugscan.frontend.ast_nodes import AstNode, NodeKind

INDIRECT = "<indirect>"


@dataclass(frozen=True)
class CallEdge:
    caller: str
    call_node: AstNode
    callee: str
    external: bool


@dataclass
class CallGraph:
    edges: list[CallEdge] = field(default_factory=list)
    by_caller: dict[str, list[CallEdge]] = field(default_factory=dict)
    by_callee: dict[str, list[CallEdge]] = field(default_factory=dict)

    def add(self, edge: CallEdge) -> None:
        self.edges.append(edge)
        self.by_caller.setdefault(edge.caller, []).append(edge)
        self.by_callee.setdefault(edge.callee, []).append(edge)

    def callees_of(self, caller: str) -> list[str]:
        return [e.callee for e in self.by_caller.get(caller, [])]

    def callers_of(self, callee: str) -> list[str]:
        return [e.caller for e in self.by_callee.get(callee, [])]


def collect_calls(node: AstNode) -> list[AstNode]:
    """All Call nodes under `node`, post-order (inner calls first)."""
    found: list[AstNode] = []

    def walk(n: AstNode) -> None:
        for child in n.children:
            walk(child)
        if n.kind is NodeKind.CALL:
            found.append(n)

    walk(node)
    return found


def call_target(call: AstNode) -> tuple[str, bool]:
    """(callee name, is_indirect) for a Call node."""
    target = call.children[0]
    if target.kind is NodeKind.IDENTIFIER:
        return target.text, False
    return INDIRECT, True


def build_call_graph(functions: dict[str, AstNode]) -> CallGraph:
    """Call graph for a unit, given its defined functions by name.

    A callee is external when it is not defined in this unit (library
    functions, other units) or when the call is indirect.
    """
    graph = CallGraph()
    for name, func in functions.items():
        for call in collect_calls(func):
            callee, indirect = call_target(call)
            external = indirect or callee not in functions
            graph.add(CallEdge(name, call, callee, external))
    return graph
