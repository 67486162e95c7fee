"""Frontend: lexer, parser, AST types, and the preprocessing hook."""

from cbugscan.frontend.ast_nodes import (
    AstNode,
    NodeKind,
    SourceLocation,
    dump_sexpr,
    iter_tree,
    statement_text,
    structurally_equal,
    to_text,
)
from cbugscan.frontend.lexer import Token, tokenize
from cbugscan.frontend.parser import parse, parse_fragment
from cbugscan.frontend.preprocess import preprocess_source

__all__ = [
    "AstNode",
    "NodeKind",
    "SourceLocation",
    "Token",
    "dump_sexpr",
    "iter_tree",
    "parse",
    "parse_fragment",
    "preprocess_source",
    "statement_text",
    "structurally_equal",
    "to_text",
    "tokenize",
]
