"""AST node and source location types for the C-subset frontend.

Nodes are plain trees: a kind tag, an optional token text, an ordered
child tuple, and the source location of the node's first token.
Structural operations (equality, matching, printing) ignore locations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator


@dataclass(frozen=True, order=True)
class SourceLocation:
    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


class NodeKind(Enum):
    TRANSLATION_UNIT = "TranslationUnitRoot"
    FUNCTION_DEF = "FunctionDef"
    PARAM_DECL = "ParamDecl"
    VAR_DECL = "VarDecl"
    BLOCK = "Block"
    IF = "If"
    WHILE = "While"
    FOR = "For"
    RETURN = "Return"
    GOTO = "Goto"
    LABEL = "Label"
    BREAK = "Break"
    CONTINUE = "Continue"
    EXPR_STATEMENT = "ExprStatement"
    EMPTY_STATEMENT = "EmptyStatement"
    ASSIGN = "Assign"
    BINARY_OP = "BinaryOp"
    UNARY_OP = "UnaryOp"
    CALL = "Call"
    MEMBER = "Member"
    INDEX = "Index"
    IDENTIFIER = "Identifier"
    INT_LITERAL = "IntLiteral"
    STRING_LITERAL = "StringLiteral"
    META_VAR = "MetaVar"


# UnaryOp.text values and their C spellings.
UNARY_SYMBOL = {"deref": "*", "addrof": "&", "not": "!", "neg": "-"}

EXPRESSION_KINDS = frozenset({
    NodeKind.ASSIGN, NodeKind.BINARY_OP, NodeKind.UNARY_OP, NodeKind.CALL,
    NodeKind.MEMBER, NodeKind.INDEX, NodeKind.IDENTIFIER,
    NodeKind.INT_LITERAL, NodeKind.STRING_LITERAL, NodeKind.META_VAR,
})


@dataclass(eq=False)
class AstNode:
    kind: NodeKind
    location: SourceLocation
    text: str = ""
    children: tuple["AstNode", ...] = ()
    # Declared type spelling for FunctionDef/ParamDecl/VarDecl; informational.
    ctype: str = ""
    # Closing-brace location for Block nodes; the CFG exit node borrows it.
    end_location: SourceLocation | None = None

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"<{self.kind.value} {self.text!r} at {self.location}>"


def iter_tree(node: AstNode) -> Iterator[AstNode]:
    """Yield node and all descendants in preorder."""
    stack = [node]
    while stack:
        cur = stack.pop()
        yield cur
        stack.extend(reversed(cur.children))


def structurally_equal(a: AstNode, b: AstNode) -> bool:
    """Compare kind, text, and children recursively; locations are ignored."""
    if a.kind is not b.kind or a.text != b.text:
        return False
    if len(a.children) != len(b.children):
        return False
    return all(structurally_equal(x, y) for x, y in zip(a.children, b.children))


_PREC_ASSIGN = 1
_PREC_UNARY = 8
_PREC_POSTFIX = 9

_BINARY_PREC = {
    "||": 2, "&&": 3,
    "==": 4, "!=": 4,
    "<": 5, ">": 5, "<=": 5, ">=": 5,
    "+": 6, "-": 6,
    "*": 7, "/": 7, "%": 7,
}


def to_text(node: AstNode) -> str:
    """Render an expression back to canonical C text.

    Parenthesization is normalized: structurally equal trees always render
    to the same string, which makes the output usable as a map key.
    """
    return _fmt(node, 0)


def _fmt(node: AstNode, ctx: int) -> str:
    kind = node.kind
    if kind in (NodeKind.IDENTIFIER, NodeKind.INT_LITERAL, NodeKind.STRING_LITERAL):
        return node.text
    if kind is NodeKind.META_VAR:
        return "%" + node.text
    if kind is NodeKind.ASSIGN:
        prec = _PREC_ASSIGN
        text = (f"{_fmt(node.children[0], _PREC_ASSIGN + 1)} = "
                f"{_fmt(node.children[1], _PREC_ASSIGN)}")
    elif kind is NodeKind.BINARY_OP:
        prec = _BINARY_PREC[node.text]
        text = (f"{_fmt(node.children[0], prec)} {node.text} "
                f"{_fmt(node.children[1], prec + 1)}")
    elif kind is NodeKind.UNARY_OP:
        prec = _PREC_UNARY
        text = UNARY_SYMBOL[node.text] + _fmt(node.children[0], _PREC_UNARY)
    elif kind is NodeKind.CALL:
        prec = _PREC_POSTFIX
        args = ", ".join(_fmt(a, _PREC_ASSIGN) for a in node.children[1:])
        text = f"{_fmt(node.children[0], _PREC_POSTFIX)}({args})"
    elif kind is NodeKind.MEMBER:
        prec = _PREC_POSTFIX
        op = "->" if node.text == "arrow" else "."
        text = f"{_fmt(node.children[0], _PREC_POSTFIX)}{op}{node.children[1].text}"
    elif kind is NodeKind.INDEX:
        prec = _PREC_POSTFIX
        text = f"{_fmt(node.children[0], _PREC_POSTFIX)}[{_fmt(node.children[1], 0)}]"
    else:
        raise ValueError(f"not an expression node: {kind.value}")
    if prec < ctx:
        return f"({text})"
    return text


def statement_text(node: AstNode) -> str:
    """One-line rendering of a statement or condition, for CFG labels."""
    kind = node.kind
    if kind is NodeKind.EXPR_STATEMENT:
        return to_text(node.children[0]) + ";"
    if kind is NodeKind.EMPTY_STATEMENT:
        return ";"
    if kind is NodeKind.RETURN:
        if node.children:
            return f"return {to_text(node.children[0])};"
        return "return;"
    if kind is NodeKind.GOTO:
        return f"goto {node.text};"
    if kind is NodeKind.BREAK:
        return "break;"
    if kind is NodeKind.CONTINUE:
        return "continue;"
    if kind is NodeKind.VAR_DECL:
        decl = f"{node.ctype} {node.text}".strip()
        if node.children:
            decl += f" = {to_text(node.children[0])}"
        return decl + ";"
    if kind is NodeKind.LABEL:
        return f"{node.text}: {statement_text(node.children[0])}"
    if kind is NodeKind.FOR:
        return "for"
    if kind in EXPRESSION_KINDS:
        return to_text(node)
    return kind.value


def dump_sexpr(root: AstNode) -> str:
    """Indented s-expression dump: one node per line.

    Each line reads `(Kind "text" file:line:col` followed by indented
    children, closing parentheses accumulating on the last line.
    """
    lines = _dump(root, 0)
    return "\n".join(lines)


def _dump(node: AstNode, depth: int) -> list[str]:
    pad = "  " * depth
    head = f"{pad}({node.kind.value} {json.dumps(node.text)} {node.location}"
    if not node.children:
        return [head + ")"]
    lines = [head]
    for child in node.children:
        lines.extend(_dump(child, depth + 1))
    lines[-1] += ")"
    return lines
