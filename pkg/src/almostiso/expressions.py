"""Tiny arithmetic-expression parser for metric configuration files.

Grammar (whitespace-insensitive):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := unary (('^' | '**') factor)?        # right-associative power
    unary  := '-' unary | atom
    atom   := NUMBER | VARIABLE | FUNC '(' expr ')' | '(' expr ')' | 'pi'

Variables are ``x1 .. x9`` (chart coordinates); functions are ``sin``,
``cos``, ``exp``, ``sqrt``.  Compiled expressions evaluate vectorized over
point arrays of shape ``(..., n)``.  No host-language evaluation is
involved, so configurations are safe to load from untrusted files.
"""

from __future__ import annotations

import re
from typing import Callable

import numpy as np

from .errors import ExpressionError

__all__ = ["compile_expression"]

_FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "sqrt": np.sqrt}
_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[()+\-*/^]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if stripped == "":
                break
            bad_at = pos + (len(text[pos:]) - len(stripped))
            raise ExpressionError(f"unexpected character {text[bad_at]!r}", position=bad_at)
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.group("name") is not None:
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, dim: int):
        self.text = text
        self.dim = dim
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.take()
        if kind != "op" or val != op:
            raise ExpressionError(f"expected {op!r}", position=pos)

    def parse(self) -> Callable:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind is not None:
            raise ExpressionError(f"trailing input {val!r}", position=pos)
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                node = (lambda a, b: (lambda X: a(X) + b(X)))(node, rhs) if val == "+" \
                    else (lambda a, b: (lambda X: a(X) - b(X)))(node, rhs)
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                rhs = self.factor()
                node = (lambda a, b: (lambda X: a(X) * b(X)))(node, rhs) if val == "*" \
                    else (lambda a, b: (lambda X: a(X) / b(X)))(node, rhs)
            else:
                return node

    def factor(self):
        base = self.unary()
        kind, val, _ = self.peek()
        if kind == "op" and val in ("^", "**"):
            self.take()
            expo = self.factor()
            return (lambda a, b: (lambda X: a(X) ** b(X)))(base, expo)
        return base

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            inner = self.unary()
            return (lambda a: (lambda X: -a(X)))(inner)
        return self.atom()

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            const = float(val)
            return lambda X: np.full(np.asarray(X).shape[:-1], const)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "name":
            if val == "pi":
                return lambda X: np.full(np.asarray(X).shape[:-1], np.pi)
            if val in _FUNCTIONS:
                fn = _FUNCTIONS[val]
                self.expect_op("(")
                node = self.expr()
                self.expect_op(")")
                return (lambda f, a: (lambda X: f(a(X))))(fn, node)
            m = re.fullmatch(r"x([1-9])", val)
            if m:
                axis = int(m.group(1)) - 1
                if axis >= self.dim:
                    raise ExpressionError(
                        f"variable {val} exceeds chart dimension {self.dim}", position=pos
                    )
                return lambda X: np.asarray(X, dtype=float)[..., axis]
            raise ExpressionError(f"unknown name {val!r}", position=pos)
        raise ExpressionError("unexpected end of expression", position=pos)


def compile_expression(text: str, dim: int) -> Callable[[np.ndarray], np.ndarray]:
    """Compile ``text`` to a function of point arrays ``(..., dim)``."""
    if not isinstance(text, str) or not text.strip():
        raise ExpressionError("empty expression")
    return _Parser(text, dim).parse()
