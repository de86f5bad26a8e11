"""Boolean formulas over Alice's bits ``a1..an`` and Bob's bits ``b1..bn``.

Text form is a parenthesised prefix syntax: ``(AND (VAR a1) (NOT (VAR b2)))``.
AND and OR accept two or more arguments.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Sequence, Union

from .errors import ParseError


@dataclass(frozen=True)
class Var:
    owner: str  # "a" or "b"
    index: int

    def __str__(self) -> str:
        return f"(VAR {self.owner}{self.index})"


@dataclass(frozen=True)
class Not:
    arg: "Formula"

    def __str__(self) -> str:
        return f"(NOT {self.arg})"


@dataclass(frozen=True)
class And:
    args: tuple

    def __str__(self) -> str:
        return "(AND " + " ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Or:
    args: tuple

    def __str__(self) -> str:
        return "(OR " + " ".join(map(str, self.args)) + ")"


Formula = Union[Var, Not, And, Or]


def evaluate(f: Formula, x: Sequence[int], y: Sequence[int]) -> int:
    if isinstance(f, Var):
        return (x if f.owner == "a" else y)[f.index - 1]
    if isinstance(f, Not):
        return 1 - evaluate(f.arg, x, y)
    if isinstance(f, And):
        return int(all(evaluate(g, x, y) for g in f.args))
    return int(any(evaluate(g, x, y) for g in f.args))


def variables(f: Formula) -> set[Var]:
    if isinstance(f, Var):
        return {f}
    if isinstance(f, Not):
        return variables(f.arg)
    return set().union(*(variables(g) for g in f.args))


def arity(f: Formula) -> int:
    """Bits per player needed to evaluate ``f``."""
    return max((v.index for v in variables(f)), default=0)


def formula_truth_table(f: Formula, n: int | None = None) -> dict:
    n = arity(f) if n is None else n
    bits = list(itertools.product((0, 1), repeat=n))
    return {(x, y): evaluate(f, x, y) for x in bits for y in bits}


# -- parsing --------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\()|(\))|([A-Za-z][A-Za-z0-9]*))")


def _tokens(text: str):
    line, col, i = 1, 1, 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if ch.isspace():
            col, i = col + 1, i + 1
            continue
        m = _TOKEN.match(text, i)
        if not m or m.start(0) != i:
            raise ParseError(f"unexpected character {ch!r}", line, col)
        tok = m.group(0)
        yield tok, line, col
        col += len(tok)
        i = m.end()
    yield None, line, col


def parse_formula(text: str) -> Formula:
    toks = list(_tokens(text))
    pos = 0

    def peek():
        return toks[pos]

    def take():
        nonlocal pos
        tok = toks[pos]
        pos += 1
        return tok

    def expr() -> Formula:
        tok, line, col = take()
        if tok is None:
            raise ParseError("unexpected end of input, unbalanced parenthesis", line, col)
        if tok != "(":
            raise ParseError(f"expected '(' but found {tok!r}", line, col)
        op, oline, ocol = take()
        if op is None or op in "()":
            raise ParseError(f"expected an operator, found {op!r}", oline, ocol)
        op = op.upper()
        if op == "VAR":
            name, nline, ncol = take()
            m = re.fullmatch(r"([ab])([1-9][0-9]*)", name or "")
            if not m:
                raise ParseError(f"bad variable {name!r}, expected a<i> or b<i>", nline, ncol)
            node: Formula = Var(m.group(1), int(m.group(2)))
        elif op in ("NOT", "AND", "OR"):
            args = []
            while peek()[0] == "(":
                args.append(expr())
            end, eline, ecol = peek()
            if end is None:
                raise ParseError("unexpected end of input, unbalanced parenthesis", eline, ecol)
            if op == "NOT" and len(args) != 1:
                raise ParseError(f"NOT takes one argument, got {len(args)}", oline, ocol)
            if op != "NOT" and len(args) < 2:
                raise ParseError(f"{op} takes at least two arguments, got {len(args)}", oline, ocol)
            node = Not(args[0]) if op == "NOT" else (And if op == "AND" else Or)(tuple(args))
        else:
            raise ParseError(f"unknown operator {op!r}", oline, ocol)
        close, cline, ccol = take()
        if close != ")":
            what = "end of input" if close is None else repr(close)
            raise ParseError(f"expected ')' but found {what}, unbalanced parenthesis", cline, ccol)
        return node

    node = expr()
    tok, line, col = peek()
    if tok is not None:
        raise ParseError(f"trailing input {tok!r}", line, col)
    return node


def format_formula(f: Formula) -> str:
    return str(f)
