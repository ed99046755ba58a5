"""Tokenizer for MiniLang source text."""

from __future__ import annotations

from dataclasses import dataclass

from .ast import Diagnostic, Position

KEYWORDS = {
    "class", "interface", "extends", "implements",
    "public", "protected", "private", "static", "abstract",
    "throws", "return", "throw", "if", "else", "try", "catch",
    "new", "this", "super", "null", "true", "false",
}

PUNCT = {"{", "}", "(", ")", ",", ";", "."}


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "keyword" | "int" | "string" | "punct" | "op" | "eof"
    value: str
    pos: Position


class LexError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic
        super().__init__(str(diagnostic))


def tokenize(text: str) -> list[Token]:
    """Produce the token stream; raises LexError on the first bad character."""
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)

    def pos() -> Position:
        return Position(line, col)

    def advance(count: int):
        nonlocal i, line, col
        for _ in range(count):
            if i < n and text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if text.startswith("//", i):
            end = text.find("\n", i)
            advance((end - i) if end != -1 else (n - i))
            continue
        if text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end == -1:
                raise LexError(Diagnostic("error", pos(), "unterminated block comment"))
            advance(end + 2 - i)
            continue
        if ch == '"':
            start = pos()
            j = i + 1
            while j < n and text[j] not in ('"', "\n"):
                j += 1
            if j >= n or text[j] != '"':
                raise LexError(Diagnostic("error", start, "unterminated string literal"))
            tokens.append(Token("string", text[i + 1:j], start))
            advance(j + 1 - i)
            continue
        if ch.isdigit():
            start = pos()
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], start))
            advance(j - i)
            continue
        if ch.isalpha() or ch == "_":
            start = pos()
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            tokens.append(Token("keyword" if word in KEYWORDS else "ident", word, start))
            advance(j - i)
            continue
        if text.startswith("==", i) or text.startswith("!=", i):
            tokens.append(Token("op", text[i:i + 2], pos()))
            advance(2)
            continue
        if ch == "=":
            tokens.append(Token("op", "=", pos()))
            advance(1)
            continue
        if ch in PUNCT:
            tokens.append(Token("punct", ch, pos()))
            advance(1)
            continue
        raise LexError(Diagnostic("error", pos(), f"unexpected character {ch!r}"))

    tokens.append(Token("eof", "", Position(line, col)))
    return tokens
