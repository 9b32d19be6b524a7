"""Recursive-descent parser for the term syntax.

    term  := ("sum"|"max"|"min"|"mean") ident "." term
           | "lmean" ident "~" ident "." term
           | "E" "(" ident "," ident ")"
           | "eq" "(" ident "," ident ")"
           | name "(" term {"," term} ")"
           | number

Binder bodies extend as far right as possible.  Shadowing a variable that
is already in scope is a parse error, as is an unknown connective name or
an arity mismatch.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .connectives import Registry, default_registry
from .errors import InputError, ParseError
from .terms import Agg, Apply, Const, Edge, Eq, LMean, Term, AGG_KINDS

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[().,~])
    """,
    re.VERBOSE,
)

_KEYWORDS = frozenset(AGG_KINDS) | {"lmean"}


@dataclass(frozen=True)
class _Token:
    kind: str   # "number" | "name" | one of "( ) , . ~" | "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        chunk = m.group(0)
        if m.lastgroup == "number":
            tokens.append(_Token("number", chunk, line, col))
        elif m.lastgroup == "name":
            tokens.append(_Token("name", chunk, line, col))
        elif m.lastgroup == "punct":
            tokens.append(_Token(chunk, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], registry: Registry):
        self.tokens = tokens
        self.pos = 0
        self.registry = registry

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self, kind: str | None = None) -> _Token:
        tok = self.tokens[self.pos]
        if kind is not None and tok.kind != kind:
            want = "end of input" if kind == "eof" else repr(kind)
            got = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise ParseError(f"expected {want}, got {got}", tok.line, tok.col)
        self.pos += 1
        return tok

    def ident(self, what: str) -> _Token:
        tok = self.take("name")
        if tok.text in _KEYWORDS or tok.text in ("E", "eq"):
            raise ParseError(
                f"{tok.text!r} is reserved and cannot name a {what}",
                tok.line, tok.col,
            )
        return tok

    def term(self, scope: frozenset[str]) -> Term:
        tok = self.peek()
        if tok.kind == "number":
            self.take()
            return Const(float(tok.text))
        if tok.kind != "name":
            got = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise ParseError(f"expected a term, got {got}", tok.line, tok.col)

        if tok.text in AGG_KINDS:
            self.take()
            var = self._binder_var(scope)
            self.take(".")
            body = self.term(scope | {var.text})
            return Agg(tok.text, var.text, body)

        if tok.text == "lmean":
            self.take()
            anchor = self.ident("variable")
            self.take("~")
            var = self._binder_var(scope)
            if anchor.text == var.text:
                raise ParseError(
                    "lmean anchor and bound variable must differ",
                    anchor.line, anchor.col,
                )
            self.take(".")
            body = self.term(scope | {var.text})
            return LMean(anchor.text, var.text, body)

        if tok.text in ("E", "eq"):
            self.take()
            self.take("(")
            x = self.ident("variable")
            self.take(",")
            y = self.ident("variable")
            self.take(")")
            cls = Edge if tok.text == "E" else Eq
            return cls(x.text, y.text)

        # connective application
        self.take()
        if tok.text not in self.registry:
            raise ParseError(f"unknown connective {tok.text!r}", tok.line, tok.col)
        self.take("(")
        args = [self.term(scope)]
        while self.peek().kind == ",":
            self.take(",")
            args.append(self.term(scope))
        close = self.take(")")
        try:
            conn = self.registry.get(tok.text, len(args))
        except InputError as exc:
            raise ParseError(str(exc), close.line, close.col) from None
        return Apply(conn, tuple(args))

    def _binder_var(self, scope: frozenset[str]) -> _Token:
        var = self.ident("variable")
        if var.text in scope:
            raise ParseError(
                f"variable {var.text!r} shadows an enclosing binder",
                var.line, var.col,
            )
        return var


def parse(text: str, registry: Registry | None = None) -> Term:
    """Parse a term; raises ParseError with line and column on bad input."""
    if registry is None:
        registry = default_registry()
    p = _Parser(_tokenize(text), registry)
    t = p.term(frozenset())
    p.take("eof")
    return t
