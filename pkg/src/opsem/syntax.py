"""A small shared lexer for the surface syntaxes."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 1, col: int = 1, token: str = ""):
        text = "%d:%d: %s" % (line, col, msg)
        if token:
            text += " at %r" % token
        super().__init__(text)
        self.msg, self.line, self.col, self.token = msg, line, col, token


@dataclass(frozen=True)
class Token:
    kind: str  # ident, int, sym, eof
    text: str
    line: int
    col: int


def _is_ident_start(c: str) -> bool:
    return c.isascii() and (c.isalpha() or c in "_%")


def _is_ident_char(c: str) -> bool:
    return c.isascii() and (c.isalnum() or c in "_'%")


def tokenize(src: str, symbols: Iterable[str], comment: str = "#") -> List[Token]:
    syms = sorted(set(symbols), key=len, reverse=True)
    out: List[Token] = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c.isspace():
            i, col = i + 1, col + 1
            continue
        if comment and src.startswith(comment, i):
            while i < n and src[i] != "\n":
                i += 1
            continue
        for s in syms:
            if src.startswith(s, i):
                out.append(Token("sym", s, line, col))
                i, col = i + len(s), col + len(s)
                break
        else:
            if c.isdigit():
                j = i
                while j < n and src[j].isdigit():
                    j += 1
                out.append(Token("int", src[i:j], line, col))
            elif _is_ident_start(c):
                j = i
                while j < n and _is_ident_char(src[j]):
                    j += 1
                out.append(Token("ident", src[i:j], line, col))
            else:
                raise ParseError("unexpected character", line, col, c)
            col += j - i
            i = j
    out.append(Token("eof", "", line, col))
    return out


class Lexer:
    """Token cursor with the usual peek/accept/expect helpers."""

    def __init__(self, src: str, symbols: Iterable[str], comment: str = "#"):
        self.toks = tokenize(src, symbols, comment)
        self.pos = 0

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def peek_is(self, text: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind != "eof" and t.text == text

    def at_eof(self) -> bool:
        return self.peek().kind == "eof"

    def next(self) -> Token:
        t = self.peek()
        self.pos += 1
        return t

    def accept(self, text: str) -> bool:
        if self.peek_is(text):
            self.pos += 1
            return True
        return False

    def error(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        return ParseError(msg, tok.line, tok.col, tok.text or "<eof>")

    def expect(self, text: str) -> Token:
        if not self.peek_is(text):
            raise self.error("expected %r" % text)
        return self.next()

    def expect_kind(self, kind: str) -> Token:
        if self.peek().kind != kind:
            raise self.error("expected %s" % kind)
        return self.next()

    def ident(self, reserved=()) -> str:
        t = self.peek()
        if t.kind != "ident" or t.text in reserved:
            raise self.error("expected identifier")
        self.pos += 1
        return t.text

    def expect_eof(self):
        if not self.at_eof():
            raise self.error("trailing input")
