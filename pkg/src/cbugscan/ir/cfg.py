"""Control flow graphs lowered from function ASTs.

Every statement maps to exactly one node. Structured statements dissolve:
an `if`/`while`/`for` contributes a condition node plus its body nodes,
and branches connect straight to the following statement (or the exit)
rather than through synthetic join nodes. Literal integer conditions
(`while (1)`, `if (0)`) are lowered as single-successor statement nodes,
so genuine condition nodes always carry exactly one true and one false
edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

from cbugscan.errors import FrontendError
from cbugscan.frontend.ast_nodes import (
    AstNode,
    NodeKind,
    SourceLocation,
    statement_text,
)


class CfgNodeKind(Enum):
    ENTRY = "entry"
    EXIT = "exit"
    STATEMENT = "statement"
    CONDITION = "condition"


@dataclass(frozen=True)
class CfgEdge:
    target: int
    label: str | None = None  # "true"/"false" on condition edges


@dataclass(eq=False)
class CfgNode:
    id: int
    kind: CfgNodeKind
    location: SourceLocation
    ast_ref: AstNode | None = None


@dataclass(eq=False)
class Cfg:
    function_name: str
    entry: int
    exit: int
    nodes: dict[int, CfgNode] = field(default_factory=dict)
    succs: dict[int, list[CfgEdge]] = field(default_factory=dict)
    preds: dict[int, tuple[int, ...]] = field(default_factory=dict)

    def successors(self, node_id: int) -> list[CfgEdge]:
        return self.succs.get(node_id, [])

    def iter_nodes(self) -> Iterator[CfgNode]:
        for node_id in sorted(self.nodes):
            yield self.nodes[node_id]


# Dangling edge sources produced while lowering: (node id, edge label).
_Frontier = list[tuple[int, "str | None"]]


def build_cfg(func: AstNode, ids: Iterator[int]) -> Cfg:
    """Lower one FunctionDef to its CFG. `ids` allocates unit-unique node ids."""
    if func.kind is not NodeKind.FUNCTION_DEF:
        raise ValueError("build_cfg expects a FunctionDef node")
    return _CfgBuilder(func, ids).build()


class _CfgBuilder:
    def __init__(self, func: AstNode, ids: Iterator[int]):
        self.func = func
        self.ids = ids
        self.nodes: dict[int, CfgNode] = {}
        self.succs: dict[int, list[CfgEdge]] = {}
        self.labels: dict[str, int] = {}
        self.gotos: list[tuple[int, str, SourceLocation]] = []
        self.loop_stack: list[dict[str, _Frontier]] = []
        self.exit_id = -1

    def build(self) -> Cfg:
        body = self.func.children[-1]
        end_loc = body.end_location or self.func.location
        entry = self.new_node(CfgNodeKind.ENTRY, None, self.func.location)
        exit_id = self.new_node(CfgNodeKind.EXIT, None, end_loc)
        self.exit_id = exit_id

        _, out = self.lower(body, [(entry, None)])
        self.connect(out, exit_id)
        for node_id, label, loc in self.gotos:
            target = self.labels.get(label)
            if target is None:
                raise FrontendError(f"goto to undefined label {label!r}", loc)
            self.add_edge(node_id, target, None)

        preds: dict[int, list[int]] = {nid: [] for nid in self.nodes}
        for src, edges in self.succs.items():
            for edge in edges:
                preds[edge.target].append(src)
        for node_id, node in self.nodes.items():
            if node.kind is CfgNodeKind.CONDITION and len(self.succs[node_id]) != 2:
                raise AssertionError("condition node without two successors")
        return Cfg(
            function_name=self.func.text,
            entry=entry,
            exit=exit_id,
            nodes=self.nodes,
            succs=self.succs,
            preds={nid: tuple(preds[nid]) for nid in self.nodes},
        )

    # -- graph primitives ----------------------------------------------

    def new_node(self, kind: CfgNodeKind, ast_ref: AstNode | None,
                 location: SourceLocation) -> int:
        node_id = next(self.ids)
        self.nodes[node_id] = CfgNode(node_id, kind, location, ast_ref)
        self.succs[node_id] = []
        return node_id

    def add_edge(self, src: int, dst: int, label: str | None) -> None:
        self.succs[src].append(CfgEdge(dst, label))

    def connect(self, frontier: _Frontier, target: int) -> None:
        for src, label in frontier:
            self.add_edge(src, target, label)

    # -- statement lowering ----------------------------------------------
    # Returns (head node id or None, fall-through frontier). A None head
    # means the statement produced no node of its own (an empty block).

    def lower(self, stmt: AstNode, preds: _Frontier) -> tuple[int | None, _Frontier]:
        kind = stmt.kind
        if kind is NodeKind.BLOCK:
            head = None
            cur = preds
            for child in stmt.children:
                child_head, cur = self.lower(child, cur)
                if head is None:
                    head = child_head
            return head, cur

        if kind in (NodeKind.VAR_DECL, NodeKind.EXPR_STATEMENT, NodeKind.EMPTY_STATEMENT):
            node = self.new_node(CfgNodeKind.STATEMENT, stmt, stmt.location)
            self.connect(preds, node)
            return node, [(node, None)]

        if kind is NodeKind.RETURN:
            node = self.new_node(CfgNodeKind.STATEMENT, stmt, stmt.location)
            self.connect(preds, node)
            self.add_edge(node, self.exit_id, None)
            return node, []

        if kind is NodeKind.GOTO:
            node = self.new_node(CfgNodeKind.STATEMENT, stmt, stmt.location)
            self.connect(preds, node)
            self.gotos.append((node, stmt.text, stmt.location))
            return node, []

        if kind is NodeKind.LABEL:
            # Labels are transparent: the label resolves to the head of the
            # statement it marks. Only an empty labeled block needs a node
            # of its own for gotos to land on.
            head, out = self.lower(stmt.children[0], preds)
            if head is None:
                head = self.new_node(CfgNodeKind.STATEMENT, stmt, stmt.location)
                self.connect(preds, head)
                out = [(head, None)]
            if stmt.text in self.labels:
                raise FrontendError(f"duplicate label {stmt.text!r}", stmt.location)
            self.labels[stmt.text] = head
            return head, out

        if kind is NodeKind.BREAK:
            if not self.loop_stack:
                raise FrontendError("'break' outside of a loop", stmt.location)
            node = self.new_node(CfgNodeKind.STATEMENT, stmt, stmt.location)
            self.connect(preds, node)
            self.loop_stack[-1]["breaks"].append((node, None))
            return node, []

        if kind is NodeKind.CONTINUE:
            if not self.loop_stack:
                raise FrontendError("'continue' outside of a loop", stmt.location)
            node = self.new_node(CfgNodeKind.STATEMENT, stmt, stmt.location)
            self.connect(preds, node)
            self.loop_stack[-1]["continues"].append((node, None))
            return node, []

        if kind is NodeKind.IF:
            return self.lower_if(stmt, preds)
        if kind is NodeKind.WHILE:
            return self.lower_while(stmt, preds)
        if kind is NodeKind.FOR:
            return self.lower_for(stmt, preds)

        raise FrontendError(f"cannot lower {kind.value} to CFG", stmt.location)

    @staticmethod
    def _const_value(cond: AstNode) -> int | None:
        if cond.kind is NodeKind.INT_LITERAL:
            return int(cond.text, 0)
        return None

    def lower_if(self, stmt: AstNode, preds: _Frontier) -> tuple[int | None, _Frontier]:
        cond = stmt.children[0]
        then = stmt.children[1]
        els = stmt.children[2] if len(stmt.children) == 3 else None
        const = self._const_value(cond)

        if const is None:
            cnode = self.new_node(CfgNodeKind.CONDITION, cond, cond.location)
            self.connect(preds, cnode)
            _, out_then = self.lower(then, [(cnode, "true")])
            if els is not None:
                _, out_else = self.lower(els, [(cnode, "false")])
            else:
                out_else = [(cnode, "false")]
            return cnode, out_then + out_else

        cnode = self.new_node(CfgNodeKind.STATEMENT, cond, cond.location)
        self.connect(preds, cnode)
        taken, untaken = (then, els) if const != 0 else (els, then)
        out = [(cnode, None)]
        if taken is not None:
            _, out = self.lower(taken, [(cnode, None)])
        if untaken is not None:
            _, dead_out = self.lower(untaken, [])
            out = out + dead_out
        return cnode, out

    def lower_while(self, stmt: AstNode, preds: _Frontier) -> tuple[int | None, _Frontier]:
        cond, body = stmt.children
        const = self._const_value(cond)
        frame: dict[str, _Frontier] = {"breaks": [], "continues": []}
        self.loop_stack.append(frame)

        if const is None:
            head = self.new_node(CfgNodeKind.CONDITION, cond, cond.location)
            self.connect(preds, head)
            _, body_out = self.lower(body, [(head, "true")])
            exits: _Frontier = [(head, "false")]
        else:
            head = self.new_node(CfgNodeKind.STATEMENT, cond, cond.location)
            self.connect(preds, head)
            if const != 0:
                _, body_out = self.lower(body, [(head, None)])
                exits = []
            else:
                _, body_out = self.lower(body, [])
                exits = [(head, None)]
        self.connect(body_out, head)
        self.loop_stack.pop()
        self.connect(frame["continues"], head)
        return head, exits + frame["breaks"]

    def lower_for(self, stmt: AstNode, preds: _Frontier) -> tuple[int | None, _Frontier]:
        init, cond, step, body = stmt.children
        first = None
        cur = preds
        if init.kind is not NodeKind.EMPTY_STATEMENT:
            first, cur = self.lower(init, cur)

        has_cond = cond.kind is not NodeKind.EMPTY_STATEMENT
        const = self._const_value(cond) if has_cond else 1

        if has_cond and const is None:
            head = self.new_node(CfgNodeKind.CONDITION, cond, cond.location)
            body_preds: _Frontier = [(head, "true")]
            exits: _Frontier = [(head, "false")]
        else:
            # cond is the EmptyStatement placeholder when absent
            head = self.new_node(CfgNodeKind.STATEMENT, cond, cond.location)
            if const != 0:
                body_preds = [(head, None)]
                exits = []
            else:
                body_preds = []
                exits = [(head, None)]
        self.connect(cur, head)
        if first is None:
            first = head

        frame: dict[str, _Frontier] = {"breaks": [], "continues": []}
        self.loop_stack.append(frame)
        _, body_out = self.lower(body, body_preds)
        self.loop_stack.pop()

        if step.kind is not NodeKind.EMPTY_STATEMENT:
            snode = self.new_node(CfgNodeKind.STATEMENT, step, step.location)
            self.connect(body_out, snode)
            self.connect(frame["continues"], snode)
            self.add_edge(snode, head, None)
        else:
            self.connect(body_out, head)
            self.connect(frame["continues"], head)
        return first, exits + frame["breaks"]


def cfg_to_dot(cfg: Cfg) -> str:
    """Render one function's CFG as a DOT digraph with true/false edge labels."""

    def esc(text: str) -> str:
        return text.replace("\\", "\\\\").replace('"', '\\"')

    lines = [f'digraph "{esc(cfg.function_name)}" {{']
    for node in cfg.iter_nodes():
        if node.kind is CfgNodeKind.ENTRY:
            label = f"{node.id}: <entry>"
        elif node.kind is CfgNodeKind.EXIT:
            label = f"{node.id}: <exit>"
        else:
            label = f"{node.id}: {statement_text(node.ast_ref)}"
        lines.append(f'  n{node.id} [label="{esc(label)}"];')
    for node in cfg.iter_nodes():
        for edge in cfg.successors(node.id):
            if edge.label:
                lines.append(f'  n{node.id} -> n{edge.target} [label="{edge.label}"];')
            else:
                lines.append(f"  n{node.id} -> n{edge.target};")
    lines.append("}")
    return "\n".join(lines)
