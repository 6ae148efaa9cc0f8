"""Small expression language for chart fields, with exact symbolic derivatives.

Grammar (variables ``x1 .. xN``, 1-based)::

    expr  := term (("+" | "-") term)*
    term  := unary (("*" | "/") unary)*
    unary := ("-" | "+") unary | power
    power := atom ("^" unary)?
    atom  := NUMBER | VAR | FUNC "(" expr ")" | "(" expr ")"

FUNC is one of exp, sin, cos. Exponents must not depend on the variables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np


class ExprError(ValueError):
    pass


class Node:
    def eval(self, x):
        raise NotImplementedError

    def diff(self, i: int) -> "Node":
        raise NotImplementedError

    def free_vars(self) -> set:
        return set()


@dataclass(frozen=True)
class Const(Node):
    value: float

    def eval(self, x):
        return self.value

    def diff(self, i):
        return ZERO

    def __str__(self):
        return repr(self.value)


ZERO = Const(0.0)
ONE = Const(1.0)


@dataclass(frozen=True)
class Var(Node):
    index: int  # 0-based

    def eval(self, x):
        return x[self.index]

    def diff(self, i):
        return ONE if i == self.index else ZERO

    def free_vars(self):
        return {self.index}

    def __str__(self):
        return f"x{self.index + 1}"


@dataclass(frozen=True)
class Add(Node):
    a: Node
    b: Node

    def eval(self, x):
        return self.a.eval(x) + self.b.eval(x)

    def diff(self, i):
        return add(self.a.diff(i), self.b.diff(i))

    def free_vars(self):
        return self.a.free_vars() | self.b.free_vars()

    def __str__(self):
        return f"({self.a} + {self.b})"


@dataclass(frozen=True)
class Neg(Node):
    a: Node

    def eval(self, x):
        return -self.a.eval(x)

    def diff(self, i):
        return neg(self.a.diff(i))

    def free_vars(self):
        return self.a.free_vars()

    def __str__(self):
        return f"(-{self.a})"


@dataclass(frozen=True)
class Mul(Node):
    a: Node
    b: Node

    def eval(self, x):
        return self.a.eval(x) * self.b.eval(x)

    def diff(self, i):
        return add(mul(self.a.diff(i), self.b), mul(self.a, self.b.diff(i)))

    def free_vars(self):
        return self.a.free_vars() | self.b.free_vars()

    def __str__(self):
        return f"({self.a} * {self.b})"


@dataclass(frozen=True)
class Div(Node):
    a: Node
    b: Node

    def eval(self, x):
        return self.a.eval(x) / self.b.eval(x)

    def diff(self, i):
        num = add(mul(self.a.diff(i), self.b), neg(mul(self.a, self.b.diff(i))))
        return div(num, power(self.b, Const(2.0)))

    def free_vars(self):
        return self.a.free_vars() | self.b.free_vars()

    def __str__(self):
        return f"({self.a} / {self.b})"


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: Node  # constant

    def eval(self, x):
        return self.base.eval(x) ** self.exponent.eval(x)

    def diff(self, i):
        c = self.exponent.eval(None)
        return mul(mul(Const(c), power(self.base, Const(c - 1.0))), self.base.diff(i))

    def free_vars(self):
        return self.base.free_vars()

    def __str__(self):
        return f"({self.base} ^ {self.exponent})"


_FUNCS = {"exp": np.exp, "sin": np.sin, "cos": np.cos}


@dataclass(frozen=True)
class Func(Node):
    name: str
    arg: Node

    def eval(self, x):
        return _FUNCS[self.name](self.arg.eval(x))

    def diff(self, i):
        if self.name == "exp":
            outer = self
        elif self.name == "sin":
            outer = Func("cos", self.arg)
        else:
            outer = neg(Func("sin", self.arg))
        return mul(outer, self.arg.diff(i))

    def free_vars(self):
        return self.arg.free_vars()

    def __str__(self):
        return f"{self.name}({self.arg})"


# -- smart constructors with constant folding --------------------------------

def _const(n):
    return isinstance(n, Const)


def add(a, b):
    if _const(a) and _const(b):
        return Const(a.value + b.value)
    if _const(a) and a.value == 0:
        return b
    if _const(b) and b.value == 0:
        return a
    return Add(a, b)


def neg(a):
    if _const(a):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.a
    return Neg(a)


def mul(a, b):
    if _const(a) and _const(b):
        return Const(a.value * b.value)
    for u, v in ((a, b), (b, a)):
        if _const(u):
            if u.value == 0:
                return ZERO
            if u.value == 1:
                return v
    return Mul(a, b)


def div(a, b):
    if _const(b) and b.value == 0:
        raise ExprError("division by constant zero")
    if _const(a) and _const(b):
        return Const(a.value / b.value)
    if _const(a) and a.value == 0:
        return ZERO
    if _const(b) and b.value == 1:
        return a
    return Div(a, b)


def power(a, b):
    if b.free_vars():
        raise ExprError("exponents must be constant")
    c = b.eval(None)
    if c == 0:
        return ONE
    if c == 1:
        return a
    if _const(a):
        return Const(a.value ** c)
    return Pow(a, Const(c))


# -- parser -------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+(?:[eE][-+]?\d+)?)|([A-Za-z_]\w*)|(\S))")


def _tokenize(text):
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            break
        num, name, op = m.groups()
        if num is not None:
            out.append(("num", float(num)))
        elif name is not None:
            out.append(("name", name))
        else:
            if op not in "+-*/^()":
                raise ExprError(f"unexpected character {op!r} in {text!r}")
            out.append(("op", op))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text, nvars):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.nvars = nvars

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            raise ExprError(f"expected {value or kind} at token {self.pos} in {self.text!r}")
        self.pos += 1
        return tok

    def parse(self):
        if not self.tokens:
            raise ExprError("empty expression")
        node = self.expr()
        if self.pos != len(self.tokens):
            raise ExprError(f"trailing input in {self.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            node = add(node, rhs) if op == "+" else add(node, neg(rhs))
        return node

    def term(self):
        node = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.unary()
            node = mul(node, rhs) if op == "*" else div(node, rhs)
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return neg(self.unary())
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            return power(base, self.unary())
        return base

    def atom(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return Const(val)
        if kind == "name":
            self.take()
            if val in _FUNCS:
                self.take("op", "(")
                arg = self.expr()
                self.take("op", ")")
                return Func(val, arg) if not _const(arg) else Const(float(_FUNCS[val](arg.value)))
            m = re.fullmatch(r"x(\d+)", val)
            if m:
                k = int(m.group(1))
                if not 1 <= k <= self.nvars:
                    raise ExprError(f"variable {val} out of range x1..x{self.nvars}")
                return Var(k - 1)
            raise ExprError(f"unknown name {val!r}")
        if (kind, val) == ("op", "("):
            self.take()
            node = self.expr()
            self.take("op", ")")
            return node
        if kind is None:
            raise ExprError(f"unexpected end of expression in {self.text!r}")
        raise ExprError(f"unexpected token {val!r} in {self.text!r}")


def parse(text, nvars: int) -> Node:
    """Parse an expression over x1..x{nvars}; numbers are accepted as-is."""
    if isinstance(text, (int, float)):
        return Const(float(text))
    return _Parser(str(text), nvars).parse()


def gradient(node: Node, nvars: int) -> list:
    return [node.diff(i) for i in range(nvars)]


def to_source(node: Node) -> str:
    return str(node)


def evaluate(node: Node, x) -> float:
    return float(node.eval(np.asarray(x, dtype=float)))


__all__ = ["ExprError", "Node", "parse", "gradient", "evaluate", "to_source"]
