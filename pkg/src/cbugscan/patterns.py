"""AST pattern matching with metavariables.

A pattern is an ordinary code fragment in which `%NAME` placeholders
stand for arbitrary subtrees. `mutex_lock(%X)` matches any call to
mutex_lock with one argument and binds %X to that argument's AST.
A metavariable repeated within one pattern must bind structurally
equal subtrees each time.
"""

from __future__ import annotations

import shlex
from dataclasses import dataclass

from cbugscan.errors import PatternError
from cbugscan.frontend.ast_nodes import (
    AstNode,
    NodeKind,
    iter_tree,
    structurally_equal,
)
from cbugscan.frontend.parser import parse_fragment

Bindings = dict[str, AstNode]


@dataclass(eq=False)
class Pattern:
    name: str
    template: str
    tree: AstNode

    def metavar_names(self) -> list[str]:
        """Metavariable names in first-occurrence order."""
        seen: list[str] = []
        for node in iter_tree(self.tree):
            if node.kind is NodeKind.META_VAR and node.text not in seen:
                seen.append(node.text)
        return seen


def compile_pattern(template: str, name: str = "") -> Pattern:
    """Parse a pattern template (expression or statement fragment)."""
    try:
        tree = parse_fragment(template, file="<pattern>")
    except Exception as exc:
        raise PatternError(f"invalid pattern {name or template!r}: {exc}") from exc
    return Pattern(name=name or template, template=template, tree=tree)


def match_node(pattern: Pattern | AstNode, node: AstNode) -> Bindings | None:
    """Match a pattern against `node` itself (not its descendants).

    Returns the metavariable bindings on success, None on mismatch.
    """
    tree = pattern.tree if isinstance(pattern, Pattern) else pattern
    bindings: Bindings = {}
    if _match(tree, node, bindings):
        return bindings
    return None


def _match(pat: AstNode, node: AstNode, bindings: Bindings) -> bool:
    if pat.kind is NodeKind.META_VAR:
        bound = bindings.get(pat.text)
        if bound is not None:
            return structurally_equal(bound, node)
        bindings[pat.text] = node
        return True
    if pat.kind is not node.kind or pat.text != node.text:
        return False
    if len(pat.children) != len(node.children):
        return False
    return all(_match(p, n, bindings)
               for p, n in zip(pat.children, node.children))


def find_matches(pattern: Pattern, root: AstNode) -> list[tuple[AstNode, Bindings]]:
    """All subtrees of `root` (preorder, root included) matching the pattern."""
    found: list[tuple[AstNode, Bindings]] = []
    for node in iter_tree(root):
        bindings = match_node(pattern, node)
        if bindings is not None:
            found.append((node, bindings))
    return found


def substitute(pattern: Pattern, bindings: Bindings) -> AstNode:
    """Instantiate a pattern: replace each metavariable with its binding.

    Every metavariable in the pattern must be bound. Matching the
    pattern against the result recovers structurally equal bindings.
    """
    missing = [m for m in pattern.metavar_names() if m not in bindings]
    if missing:
        raise PatternError(f"unbound metavariables: {', '.join(missing)}")
    return _substitute(pattern.tree, bindings)


def _substitute(node: AstNode, bindings: Bindings) -> AstNode:
    if node.kind is NodeKind.META_VAR:
        return bindings[node.text]
    if not node.children:
        return node
    return AstNode(
        kind=node.kind,
        location=node.location,
        text=node.text,
        children=tuple(_substitute(c, bindings) for c in node.children),
        ctype=node.ctype,
        end_location=node.end_location,
    )


def parse_pattern_file(text: str, source: str = "<patterns>") -> list[Pattern]:
    """Parse `pattern NAME "TEMPLATE"` lines; `#` starts a comment."""
    patterns: list[Pattern] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        try:
            parts = shlex.split(raw, comments=True)
        except ValueError as exc:
            raise PatternError(f"{source}:{lineno}: {exc}") from exc
        if not parts:
            continue
        if parts[0] != "pattern" or len(parts) != 3:
            raise PatternError(
                f"{source}:{lineno}: expected 'pattern NAME \"TEMPLATE\"'")
        patterns.append(compile_pattern(parts[2], name=parts[1]))
    return patterns
