"""Tiny arithmetic-expression parser for potential functions V(x, y).

Grammar (recursive descent):

    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | 'x' | 'y' | FUNC '(' expr ')' | '(' expr ')'

with FUNC in {sin, cos, exp, log}.  Evaluation is vectorized over numpy
arrays of points.
"""

from __future__ import annotations

import numpy as np


class PotentialError(Exception):
    """Malformed potential expression."""


_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "log": np.log}


def _tokenize(src: str):
    tokens = []
    i = 0
    while i < len(src):
        c = src[i]
        if c.isspace():
            i += 1
        elif c in "+-*/^()":
            tokens.append(c)
            i += 1
        elif c.isdigit() or c == ".":
            j = i
            while j < len(src) and (src[j].isdigit() or src[j] in ".eE" or
                                    (src[j] in "+-" and src[j - 1] in "eE")):
                j += 1
            try:
                tokens.append(float(src[i:j]))
            except ValueError as exc:
                raise PotentialError(f"bad number {src[i:j]!r}") from exc
            i = j
        elif c.isalpha():
            j = i
            while j < len(src) and src[j].isalnum():
                j += 1
            tokens.append(src[i:j])
            i = j
        else:
            raise PotentialError(f"unexpected character {c!r}")
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None:
            raise PotentialError("unexpected end of expression")
        if expected is not None and tok != expected:
            raise PotentialError(f"expected {expected!r}, found {tok!r}")
        self.pos += 1
        return tok

    def expr(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            node = (op, node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.unary()
            node = (op, node, rhs)
        return node

    def unary(self):
        if self.peek() == "-":
            self.take()
            return ("neg", self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.take()
            return ("^", base, self.unary())
        return base

    def atom(self):
        tok = self.take()
        if isinstance(tok, float):
            return ("num", tok)
        if tok == "(":
            node = self.expr()
            self.take(")")
            return node
        if tok in ("x", "y"):
            return ("var", tok)
        if tok in _FUNCS:
            self.take("(")
            arg = self.expr()
            self.take(")")
            return ("call", tok, arg)
        raise PotentialError(f"unexpected token {tok!r}")


def _evaluate(node, x, y):
    kind = node[0]
    if kind == "num":
        return np.full_like(x, node[1])
    if kind == "var":
        return x if node[1] == "x" else y
    if kind == "neg":
        return -_evaluate(node[1], x, y)
    if kind == "call":
        return _FUNCS[node[1]](_evaluate(node[2], x, y))
    a = _evaluate(node[1], x, y)
    b = _evaluate(node[2], x, y)
    if kind == "+":
        return a + b
    if kind == "-":
        return a - b
    if kind == "*":
        return a * b
    if kind == "/":
        return a / b
    if kind == "^":
        return np.power(a, b)
    raise PotentialError(f"unknown node {kind!r}")


class Potential:
    """Callable positive potential parsed from an expression over x, y."""

    def __init__(self, expression: str):
        self.expression = expression
        tokens = _tokenize(expression)
        if not tokens:
            raise PotentialError("empty expression")
        parser = _Parser(tokens)
        self._ast = parser.expr()
        if parser.peek() is not None:
            raise PotentialError(f"trailing tokens at {parser.peek()!r}")

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        squeeze = pts.ndim == 1
        pts = np.atleast_2d(pts)
        out = _evaluate(self._ast, pts[:, 0], pts[:, 1])
        return float(out[0]) if squeeze else out

    def on_mesh(self, mesh):
        """Vertex samples, validated strictly positive."""
        vals = self(mesh.vertices)
        if not np.all(np.isfinite(vals)) or np.min(vals) <= 0:
            raise PotentialError(
                f"potential {self.expression!r} is not strictly positive on the mesh")
        return vals

    def __repr__(self):
        return f"Potential({self.expression!r})"
