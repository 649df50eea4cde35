"""Tokenizer for sketch files."""

from __future__ import annotations

import re
from dataclasses import dataclass

__all__ = ["ParseError", "Token", "TokenStream", "tokenize"]


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        where = f"{line}:{col}: " if line else ""
        super().__init__(f"{where}{message}")


@dataclass(frozen=True)
class Token:
    kind: str  # ident, num, op, eof
    text: str
    line: int
    col: int


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>(//|\#)[^\n]*)
  | (?P<num>\d+)
  | (?P<ident>ac-insert\b|(?:in|re):[A-Za-z_]\w*|@?[A-Za-z_]\w*)
  | (?P<op>::=|:=|==|!=|<=|>=|&&|\|\||\[\]|\.\.|--|\+\+|[;,(){}|=<>+\-*/!.:∧∨¬◻⊤])
    """,
    re.VERBOSE,
)

_ALIASES = {"∧": "&&", "∨": "||", "¬": "!", "◻": "[]"}


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident":
            out.append(Token("ident", value, line, col))
        elif kind == "num":
            out.append(Token("num", value, line, col))
        elif kind == "op":
            out.append(Token("op", _ALIASES.get(value, value), line, col))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def peek_at(self, offset: int) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, *texts: str) -> bool:
        tok = self.peek
        return tok.kind in ("op", "ident") and tok.text in texts

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.peek
        if not self.at(text):
            self.fail(f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return self.next()

    def ident(self) -> Token:
        tok = self.peek
        if tok.kind != "ident":
            self.fail(f"expected identifier, found {tok.text or 'end of input'!r}")
        return self.next()

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.peek
        raise ParseError(message, tok.line, tok.col)

    def balanced_until(self, *stops: str) -> list[Token]:
        """Collect tokens up to a stop token at bracket depth zero."""
        depth = 0
        out = []
        while True:
            tok = self.peek
            if tok.kind == "eof":
                if depth:
                    self.fail("unbalanced brackets")
                return out
            if depth == 0 and tok.kind == "op" and tok.text in stops:
                return out
            if tok.kind == "op" and tok.text in "({":
                depth += 1
            elif tok.kind == "op" and tok.text in ")}":
                if depth == 0:
                    return out
                depth -= 1
            out.append(self.next())
