"""Tiny arithmetic-expression compiler for custom level-set domains.

Grammar (whitespace-insensitive)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | NAME | FUNC "(" expr ")" | "(" expr ")"

Names are ``x1..xn``, ``t``, ``pi`` and ``e``; functions are ``abs``,
``log``, ``exp`` and ``sqrt``. ``^`` is right-associative.
"""

import math
import re

import numpy as np

FUNCTIONS = {"abs": np.abs, "log": np.log, "exp": np.exp, "sqrt": np.sqrt}
CONSTANTS = {"pi": math.pi, "e": math.e}

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


class ExpressionError(ValueError):
    pass


def _tokenize(text):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        num, name, op = m.groups()
        if num is not None:
            tokens.append(("num", float(num)))
        elif name is not None:
            tokens.append(("name", name))
        else:
            if op not in "+-*/^()":
                raise ExpressionError(f"unexpected character {op!r} in {text!r}")
            tokens.append(("op", op))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens, n):
        self.tokens = tokens
        self.i = 0
        self.n = n

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            raise ExpressionError(f"expected {value or kind}, got {tok[1]!r}")
        self.i += 1
        return tok

    def expr(self):
        node = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            node = (op, node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.unary()
            node = (op, node, rhs)
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return ("neg", self.unary())
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            return ("^", base, self.unary())
        return base

    def atom(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return ("const", val)
        if kind == "name":
            self.take()
            if val in FUNCTIONS:
                self.take("op", "(")
                arg = self.expr()
                self.take("op", ")")
                return ("call", val, arg)
            if val in CONSTANTS:
                return ("const", CONSTANTS[val])
            if val == "t":
                return ("var", self.n)
            m = re.fullmatch(r"x(\d+)", val)
            if m and 1 <= int(m.group(1)) <= self.n:
                return ("var", int(m.group(1)) - 1)
            raise ExpressionError(f"unknown name {val!r} (n={self.n})")
        if (kind, val) == ("op", "("):
            self.take()
            node = self.expr()
            self.take("op", ")")
            return node
        raise ExpressionError(f"unexpected token {val!r}")


def _evaluate(node, z):
    tag = node[0]
    if tag == "const":
        return node[1]
    if tag == "var":
        return z[..., node[1]]
    if tag == "neg":
        return -_evaluate(node[1], z)
    if tag == "call":
        return FUNCTIONS[node[1]](_evaluate(node[2], z))
    a = _evaluate(node[1], z)
    b = _evaluate(node[2], z)
    if tag == "+":
        return a + b
    if tag == "-":
        return a - b
    if tag == "*":
        return a * b
    if tag == "/":
        return a / b
    return np.power(a, b)


def compile_expression(text, n):
    """Compile ``text`` into ``f(x, t)`` over arrays of shape ``(..., n)``."""
    tokens = _tokenize(text)
    if not tokens:
        raise ExpressionError("empty expression")
    parser = _Parser(tokens, n)
    tree = parser.expr()
    if parser.i != len(tokens):
        raise ExpressionError(f"trailing input after position {parser.i} in {text!r}")

    def f(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        if x.shape[-1] != n:
            raise ValueError(f"expected {n} spatial coordinates, got {x.shape[-1]}")
        z = np.concatenate([x, t[..., None] * np.ones(x.shape[:-1] + (1,))], axis=-1)
        with np.errstate(all="ignore"):
            return np.asarray(_evaluate(tree, z), dtype=float) * np.ones(x.shape[:-1])

    f.source = text
    return f
