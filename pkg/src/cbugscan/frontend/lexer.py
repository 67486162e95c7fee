"""Tokenizer for the C subset and for pattern templates.

Pattern templates reuse the same token stream with metavariables enabled,
so `%NAME` lexes as a single metavariable token there; in ordinary source
the `%` stays a modulo operator.
"""

from __future__ import annotations

from dataclasses import dataclass

from cbugscan.errors import FrontendError
from cbugscan.frontend.ast_nodes import SourceLocation

KEYWORDS = frozenset({
    "break", "char", "continue", "else", "for", "goto", "if", "int",
    "return", "struct", "void", "while",
})

# Multi-character operators must come first so "&&" wins over "&".
_PUNCTUATION = (
    "&&", "||", "==", "!=", "<=", ">=", "->",
    "(", ")", "{", "}", "[", "]", ";", ",", "=",
    "<", ">", "+", "-", "*", "/", "%", "&", "!", ".", ":",
)

_IDENT_START = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | frozenset("0123456789")
_DIGITS = frozenset("0123456789")
_HEX = frozenset("0123456789abcdefABCDEF")


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "int", "string", "metavar", "eof", or the operator itself
    text: str
    location: SourceLocation


def tokenize(source: str, file: str, metavars: bool = False) -> list[Token]:
    """Split source into tokens; raises FrontendError at the first bad char.

    Comments are skipped. Lines whose first non-blank character is `#`
    (preprocessor directives, cpp line markers) are skipped as well since
    the frontend expects preprocessed input.
    """
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)
    at_line_start = True

    def loc() -> SourceLocation:
        return SourceLocation(file, line, col)

    def advance(count: int) -> None:
        nonlocal i, line, col
        for _ in range(count):
            if source[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = source[i]
        if ch in " \t\r\f\v":
            advance(1)
            continue
        if ch == "\n":
            advance(1)
            at_line_start = True
            continue
        if ch == "#" and at_line_start:
            while i < n and source[i] != "\n":
                advance(1)
            continue
        if ch == "/" and i + 1 < n and source[i + 1] == "/":
            while i < n and source[i] != "\n":
                advance(1)
            continue
        if ch == "/" and i + 1 < n and source[i + 1] == "*":
            start = loc()
            advance(2)
            while True:
                if i + 1 >= n:
                    raise FrontendError("unterminated comment", start)
                if source[i] == "*" and source[i + 1] == "/":
                    advance(2)
                    break
                advance(1)
            continue

        at_line_start = False
        start = loc()

        if ch in _IDENT_START:
            j = i
            while j < n and source[j] in _IDENT_CONT:
                j += 1
            text = source[i:j]
            kind = text if text in KEYWORDS else "ident"
            tokens.append(Token(kind, text, start))
            advance(j - i)
            continue

        if ch in _DIGITS:
            j = i
            if ch == "0" and j + 1 < n and source[j + 1] in "xX":
                j += 2
                while j < n and source[j] in _HEX:
                    j += 1
            else:
                while j < n and source[j] in _DIGITS:
                    j += 1
            if j < n and source[j] in _IDENT_START:
                raise FrontendError(f"malformed number near {source[i:j + 1]!r}", start)
            tokens.append(Token("int", source[i:j], start))
            advance(j - i)
            continue

        if ch == '"':
            j = i + 1
            while True:
                if j >= n or source[j] == "\n":
                    raise FrontendError("unterminated string literal", start)
                if source[j] == "\\":
                    j += 2
                    continue
                if source[j] == '"':
                    j += 1
                    break
                j += 1
            tokens.append(Token("string", source[i:j], start))
            advance(j - i)
            continue

        if ch == "%" and metavars and i + 1 < n and source[i + 1] in _IDENT_START:
            j = i + 1
            while j < n and source[j] in _IDENT_CONT:
                j += 1
            tokens.append(Token("metavar", source[i + 1:j], start))
            advance(j - i)
            continue

        for punct in _PUNCTUATION:
            if source.startswith(punct, i):
                tokens.append(Token(punct, punct, start))
                advance(len(punct))
                break
        else:
            raise FrontendError(f"unexpected character {ch!r}", start)

    tokens.append(Token("eof", "", loc()))
    return tokens
