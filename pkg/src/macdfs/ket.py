"""Parser and printer for two-party ket expressions such as ``1/sqrt(2)(|01> - |10>)``.

Grammar (whitespace ignored)::

    expr  := sign? term (('+' | '-') term)*
    term  := coeff? '*'? (ket | '(' expr ')')
    ket   := '|' digit digit '>'
    coeff := real ('/' (real | sqrt))? | sqrt | '(' real (',' real)? ')'
    sqrt  := 'sqrt(' real ')'

A parenthesised pair of numbers is a complex coefficient; any other
parenthesised group is a sub-expression the preceding coefficient multiplies.
"""
from __future__ import annotations

import math
import re

import numpy as np

from .schmidt import PureState

_NUMBER = re.compile(r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?")


class KetSyntaxError(ValueError):
    def __init__(self, msg: str, text: str, pos: int):
        super().__init__(f"{msg} at position {pos}: {text!r}")
        self.pos = pos


class _Parser:
    def __init__(self, text: str, d: int):
        self.text = text
        self.d = d
        self.i = 0

    def error(self, msg: str):
        raise KetSyntaxError(msg, self.text, self.i)

    def skip(self):
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.i] if self.i < len(self.text) else ""

    def eat(self, s: str) -> bool:
        self.skip()
        if self.text.startswith(s, self.i):
            self.i += len(s)
            return True
        return False

    def expect(self, s: str):
        if not self.eat(s):
            self.error(f"expected {s!r}")

    def real(self, signed: bool = False) -> float:
        self.skip()
        sign = 1.0
        if signed and self.peek() in "+-":
            sign = -1.0 if self.text[self.i] == "-" else 1.0
            self.i += 1
            self.skip()
        m = _NUMBER.match(self.text, self.i)
        if not m:
            self.error("expected a number")
        self.i = m.end()
        return sign * float(m.group())

    def sqrt(self) -> float:
        self.expect("sqrt(")
        v = self.real()
        self.expect(")")
        return math.sqrt(v)

    def complex_paren(self) -> complex | None:
        """Try ``(re)`` or ``(re, im)``; rewind and return None if it is a sub-expression."""
        start = self.i
        self.expect("(")
        try:
            re_ = self.real(signed=True)
        except KetSyntaxError:
            self.i = start
            return None
        im = 0.0
        if self.eat(","):
            im = self.real(signed=True)
        if not self.eat(")"):
            self.i = start
            return None
        return complex(re_, im)

    def coeff(self) -> complex | None:
        c = self.peek()
        if c == "(":
            return self.complex_paren()
        if self.text.startswith("sqrt(", self.i):
            return complex(self.sqrt())
        if c.isdigit() or c == ".":
            v = self.real()
            if self.eat("/"):
                if self.text.startswith("sqrt(", self.i):
                    den = self.sqrt()
                else:
                    den = self.real()
                if den == 0:
                    self.error("division by zero")
                v /= den
            return complex(v)
        return None

    def ket(self) -> np.ndarray:
        self.expect("|")
        start = self.i
        while self.i < len(self.text) and self.text[self.i].isdigit():
            self.i += 1
        label = self.text[start:self.i]
        if len(label) != 2:
            self.i = start
            self.error("ket label must have exactly two digits")
        k, l = int(label[0]), int(label[1])
        if k >= self.d or l >= self.d:
            self.i = start
            self.error(f"digit out of range for d = {self.d}")
        self.expect(">")
        v = np.zeros(self.d * self.d, dtype=complex)
        v[k * self.d + l] = 1.0
        return v

    def term(self) -> np.ndarray:
        c = self.coeff()
        self.eat("*")
        if self.peek() == "|":
            v = self.ket()
        elif self.eat("("):
            v = self.expr()
            self.expect(")")
        else:
            self.error("expected a ket or a parenthesised expression")
        return (1.0 if c is None else c) * v

    def expr(self) -> np.ndarray:
        sign = 1.0
        if self.peek() in "+-":
            sign = -1.0 if self.text[self.i] == "-" else 1.0
            self.i += 1
        total = sign * self.term()
        while self.peek() in ("+", "-") and self.peek():
            sign = -1.0 if self.text[self.i] == "-" else 1.0
            self.i += 1
            total = total + sign * self.term()
        return total


def parse_ket(text: str, d: int) -> PureState:
    """Amplitudes of a ket expression; normalization is reported, not forced."""
    if not 1 <= d <= 10:
        raise ValueError("ket labels support local dimensions 1..10")
    if not text or not text.strip():
        raise KetSyntaxError("empty expression", text, 0)
    p = _Parser(text, d)
    amps = p.expr()
    if p.peek():
        p.error("unexpected trailing input")
    norm = np.linalg.norm(amps)
    return PureState(d, d, amps, unnormalized=abs(norm - 1.0) > 1e-12)


def _num(x: float) -> str:
    return repr(float(x))


def format_ket(state: PureState, tol: float = 0.0) -> str:
    """Ket expression that parses back to the same amplitudes."""
    if state.d1 != state.d2:
        raise ValueError("ket notation here is for equal local dimensions")
    d = state.d1
    terms = []
    for idx, a in enumerate(state.amps):
        if abs(a) <= tol or a == 0:
            continue
        k, l = divmod(idx, d)
        terms.append(f"({_num(a.real)},{_num(a.imag)})|{k}{l}>")
    return " + ".join(terms) if terms else "0|00>"
