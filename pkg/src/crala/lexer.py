"""Lexer for the `.crala` surface syntax.

Tokens carry byte offsets so every model element and diagnostic can point
back into the source. `//` comments and whitespace are skipped. Lexical
errors (E-LEX-01) are collected, the offending bytes skipped, and lexing
continues.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .model import Diagnostic, Severity, SourceSpan


class TokenKind(str, Enum):
    WORD = "word"
    INT = "int"
    STRING = "string"
    LBRACE = "{"
    RBRACE = "}"
    COLON = ":"
    DOT = "."
    ARROW = "->"
    TILDE = "~"
    AT = "@"
    EOF = "eof"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    start: int
    end: int
    value: Optional[object] = None  # int for INT, unescaped str for STRING

    def span(self, file: str) -> SourceSpan:
        return SourceSpan(file, self.start, self.end)


_PUNCT = {
    "{": TokenKind.LBRACE,
    "}": TokenKind.RBRACE,
    ":": TokenKind.COLON,
    ".": TokenKind.DOT,
    "~": TokenKind.TILDE,
    "@": TokenKind.AT,
}


def _is_word_start(ch: str) -> bool:
    return ch.isascii() and (ch.isalpha() or ch == "_")


def _is_word(ch: str) -> bool:
    return ch.isascii() and (ch.isalnum() or ch == "_")


def tokenize(text: str, file: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diagnostics: list[Diagnostic] = []
    pos = 0
    size = len(text)

    def error(start: int, end: int, message: str) -> None:
        diagnostics.append(
            Diagnostic(Severity.ERROR, "E-LEX-01", message, SourceSpan(file, start, end))
        )

    while pos < size:
        ch = text[pos]
        if ch in " \t\r\n":
            pos += 1
            continue
        if ch == "/" and text.startswith("//", pos):
            newline = text.find("\n", pos)
            pos = size if newline < 0 else newline + 1
            continue
        start = pos
        if _is_word_start(ch):
            while pos < size and _is_word(text[pos]):
                pos += 1
            tokens.append(Token(TokenKind.WORD, text[start:pos], start, pos))
            continue
        if ch.isdigit():
            while pos < size and text[pos].isdigit():
                pos += 1
            word = text[start:pos]
            tokens.append(Token(TokenKind.INT, word, start, pos, int(word)))
            continue
        if ch == '"':
            pos += 1
            parts: list[str] = []
            closed = False
            while pos < size:
                c = text[pos]
                if c == '"':
                    pos += 1
                    closed = True
                    break
                if c == "\n":
                    break
                if c == "\\" and pos + 1 < size and text[pos + 1] in '"\\':
                    parts.append(text[pos + 1])
                    pos += 2
                    continue
                parts.append(c)
                pos += 1
            if not closed:
                error(start, pos, "unterminated string literal")
                continue
            tokens.append(Token(TokenKind.STRING, text[start:pos], start, pos, "".join(parts)))
            continue
        if ch == "-" and text.startswith("->", pos):
            pos += 2
            tokens.append(Token(TokenKind.ARROW, "->", start, pos))
            continue
        if ch in _PUNCT:
            pos += 1
            tokens.append(Token(_PUNCT[ch], ch, start, pos))
            continue
        pos += 1
        error(start, pos, f"unexpected character {ch!r}")

    tokens.append(Token(TokenKind.EOF, "", size, size))
    return tokens, diagnostics
