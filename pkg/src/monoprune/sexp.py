"""Minimal s-expression reader used for problem files and term literals."""

from __future__ import annotations

import re
from dataclasses import dataclass


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class Sym(str):
    """A bare symbol, as opposed to a string literal (:class:`Str`)."""

    line = 0
    column = 0


@dataclass(frozen=True)
class Str:
    value: str


class SList(list):
    """A parenthesised list that remembers where it started."""

    line = 0
    column = 0


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>;[^\n]*)
  | (?P<open>\()
  | (?P<close>\))
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<atom>[^\s()";]+)
    """,
    re.VERBOSE,
)


def _unescape(body: str) -> str:
    return re.sub(r"\\(.)", r"\1", body)


def parse_all(text: str) -> list:
    """Parse every top-level form in ``text``."""
    stack: list[SList] = [SList()]
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError("unterminated string literal", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind == "open":
            lst = SList()
            lst.line, lst.column = line, col
            stack.append(lst)
        elif kind == "close":
            if len(stack) == 1:
                raise ParseError("unexpected ')'", line, col)
            done = stack.pop()
            stack[-1].append(done)
        elif kind == "string":
            stack[-1].append(Str(_unescape(tok[1:-1])))
        elif kind == "atom":
            sym = Sym(tok)
            sym.line, sym.column = line, col
            stack[-1].append(sym)
        newlines = tok.count("\n")
        if newlines:
            line += newlines
            line_start = pos + tok.rfind("\n") + 1
        pos = m.end()
    if len(stack) != 1:
        open_list = stack[-1]
        raise ParseError("unclosed '('", open_list.line, open_list.column)
    return list(stack[0])


def parse_one(text: str):
    forms = parse_all(text)
    if len(forms) != 1:
        raise ParseError(f"expected one form, found {len(forms)}", 1, 1)
    return forms[0]


def where(sx) -> tuple[int, int]:
    return getattr(sx, "line", 0), getattr(sx, "column", 0)
