r"""Textual grammar for terms.

    join:  \/     meet:  /\     abs: |e|     linear: + - *
    generator: d([1,0.5,-2])    zero: 0

Precedence: * tighter than unary -, tighter than binary + -, tighter than
/\, tighter than \/; parentheses override. A numeric literal is only a term
when it is 0 (constants are not positively homogeneous); other numbers act
as scale factors.
"""

from __future__ import annotations

import re

from .errors import ParseError
from .spaces import Space, Vector
from .terms import Gen, Join, Meet, Neg, Scale, Sum, Term, is_abs, zero_term

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)
  | (?P<join>\\/)
  | (?P<meet>/\\)
  | (?P<gen>d)
  | (?P<sym>[()\[\],+\-*|])
    """,
    re.VERBOSE,
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            if kind == "sym":
                kind = m.group()
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, space):
        self.text = text
        self.space = space
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    # Parser values are ('num', float) or ('term', Term).
    def as_term(self, value, pos):
        kind, payload = value
        if kind == "term":
            return payload
        if payload == 0.0:
            return zero_term(self.space)
        raise ParseError(
            f"constant {payload!r} is not a term (only 0 denotes the zero function)",
            pos,
        )

    def parse(self) -> Term:
        value = self.join()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected trailing input {tok[1]!r}", tok[2])
        return self.as_term(value, tok[2])

    def join(self):
        pos = self.peek()[2]
        value = self.meet()
        while self.peek()[0] == "join":
            self.next()
            rhs_pos = self.peek()[2]
            rhs = self.meet()
            value = (
                "term",
                Join(self.as_term(value, pos), self.as_term(rhs, rhs_pos)),
            )
        return value

    def meet(self):
        pos = self.peek()[2]
        value = self.add()
        while self.peek()[0] == "meet":
            self.next()
            rhs_pos = self.peek()[2]
            rhs = self.add()
            value = (
                "term",
                Meet(self.as_term(value, pos), self.as_term(rhs, rhs_pos)),
            )
        return value

    def add(self):
        pos = self.peek()[2]
        value = self.unary()
        while self.peek()[0] in ("+", "-"):
            op = self.next()[0]
            rhs_pos = self.peek()[2]
            rhs = self.unary()
            if value[0] == "num" and rhs[0] == "num":
                value = ("num", value[1] + rhs[1] if op == "+" else value[1] - rhs[1])
                continue
            left = self.as_term(value, pos)
            right = self.as_term(rhs, rhs_pos)
            value = ("term", Sum(left, right if op == "+" else Neg(right)))
        return value

    def unary(self):
        tok = self.peek()
        if tok[0] == "-":
            self.next()
            value = self.unary()
            if value[0] == "num":
                return ("num", -value[1])
            return ("term", Neg(value[1]))
        return self.product()

    def product(self):
        pos = self.peek()[2]
        value = self.atom()
        while self.peek()[0] == "*":
            self.next()
            rhs_pos = self.peek()[2]
            rhs = self.atom()
            if value[0] == "num" and rhs[0] == "num":
                value = ("num", value[1] * rhs[1])
            elif value[0] == "num":
                value = ("term", Scale(value[1], rhs[1]))
            elif rhs[0] == "num":
                value = ("term", Scale(rhs[1], value[1]))
            else:
                raise ParseError("cannot multiply two terms", rhs_pos)
        return value

    def atom(self):
        tok = self.next()
        kind, text, pos = tok
        if kind == "number":
            return ("num", float(text))
        if kind == "gen":
            self.expect("(")
            self.expect("[")
            coords = [self.number()]
            while self.peek()[0] == ",":
                self.next()
                coords.append(self.number())
            self.expect("]")
            self.expect(")")
            if len(coords) != self.space.dim:
                raise ParseError(
                    f"generator has {len(coords)} coordinates, space "
                    f"{self.space.tag()} needs {self.space.dim}",
                    pos,
                )
            return ("term", Gen(Vector(self.space, coords)))
        if kind == "|":
            inner_pos = self.peek()[2]
            inner = self.join()
            self.expect("|")
            t = self.as_term(inner, inner_pos)
            return ("term", Join(t, Neg(t)))
        if kind == "(":
            inner = self.join()
            self.expect(")")
            return inner
        raise ParseError(f"unexpected token {text!r}", pos)

    def number(self) -> float:
        sign = 1.0
        if self.peek()[0] == "-":
            self.next()
            sign = -1.0
        tok = self.expect("number")
        return sign * float(tok[1])


def parse_term(text: str, space: Space) -> Term:
    """Parse a term over the given space."""
    return _Parser(text, space).parse()


_JOIN, _MEET, _ADD, _UNARY, _SCALE, _ATOM = 1, 2, 3, 4, 5, 6


def _fmt(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def print_term(t: Term) -> str:
    """Render a term; parse(print(t)) rebuilds t up to associativity."""
    return _show(t, _JOIN)


def _show(t: Term, min_prec: int) -> str:
    inner = is_abs(t)
    if inner is not None:
        return f"|{_show(inner, _JOIN)}|"
    if isinstance(t, Gen):
        coords = ",".join(_fmt(v) for v in t.vector.coords)
        return f"d([{coords}])"
    if isinstance(t, Join):
        s = f"{_show(t.a, _JOIN)} \\/ {_show(t.b, _JOIN)}"
        prec = _JOIN
    elif isinstance(t, Meet):
        s = f"{_show(t.a, _MEET)} /\\ {_show(t.b, _MEET)}"
        prec = _MEET
    elif isinstance(t, Sum):
        if isinstance(t.b, Neg):
            s = f"{_show(t.a, _ADD)} - {_show(t.b.t, _ADD + 1)}"
        else:
            s = f"{_show(t.a, _ADD)} + {_show(t.b, _ADD + 1)}"
        prec = _ADD
    elif isinstance(t, Neg):
        s = f"-{_show(t.t, _ATOM)}"
        prec = _UNARY
    elif isinstance(t, Scale):
        # negative factors get parenthesized so the minus stays a literal
        # sign rather than a unary negation of the product
        factor = _fmt(t.c) if t.c >= 0 else f"({_fmt(t.c)})"
        s = f"{factor}*{_show(t.t, _ATOM)}"
        prec = _SCALE
    else:
        raise TypeError(f"not a term node: {t!r}")
    if prec < min_prec:
        return f"({s})"
    return s
