"""Infix expression grammar shared by densities and graph curves.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | '+' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Names are variables (``x1``..``x3``, ``y1``..``y3``, ``x`` for graph pieces),
the constant ``pi``, or the functions ``sin``, ``cos``, ``abs``.
``-x^2`` parses as ``-(x^2)`` and ``^`` is right associative.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import EvaluationError, ExpressionSyntaxError

FUNCTIONS = ("sin", "cos", "abs")
_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class Node:
    pos: int = field(compare=False)

    def source(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Num(Node):
    value: float = 0.0
    text: str = ""

    def source(self):
        return self.text or repr(self.value)


@dataclass(frozen=True)
class Var(Node):
    name: str = ""

    def source(self):
        return self.name


@dataclass(frozen=True)
class Neg(Node):
    arg: Node = None

    def source(self):
        return f"-({self.arg.source()})"


@dataclass(frozen=True)
class BinOp(Node):
    op: str = "+"
    left: Node = None
    right: Node = None

    def source(self):
        return f"({self.left.source()} {self.op} {self.right.source()})"


@dataclass(frozen=True)
class Call(Node):
    func: str = "sin"
    arg: Node = None

    def source(self):
        return f"{self.func}({self.arg.source()})"


def _tokenize(text: str):
    tokens = []
    i = 0
    while i < len(text):
        if text[i:].strip() == "":
            break
        m = _TOKEN.match(text, i)
        if m is None or m.end() == i:
            j = i + len(text[i:]) - len(text[i:].lstrip())
            raise ExpressionSyntaxError(f"unexpected character {text[j]!r}", text, j)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        i = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: frozenset[str]):
        self.text = text
        self.variables = variables
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value:
            found = text or "end of input"
            raise ExpressionSyntaxError(f"expected {value!r}, found {found!r}", self.text, pos)

    def parse(self) -> Node:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {text!r}", self.text, pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, pos = self.take()
            node = BinOp(pos, op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, pos = self.take()
            node = BinOp(pos, op, node, self.unary())
        return node

    def unary(self):
        kind, text, pos = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return Neg(pos, self.unary())
        if kind == "op" and text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        kind, text, pos = self.peek()
        if kind == "op" and text == "^":
            self.take()
            return BinOp(pos, "^", base, self.unary())
        return base

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Num(pos, float(text), text)
        if kind == "name":
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(pos, text, arg)
            if text == "pi":
                return Num(pos, math.pi, "pi")
            if text not in self.variables:
                raise ExpressionSyntaxError(f"unknown name {text!r}", self.text, pos)
            return Var(pos, text)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = text or "end of input"
        raise ExpressionSyntaxError(f"unexpected {found!r}", self.text, pos)


DENSITY_VARIABLES = frozenset(f"{c}{i}" for c in "xy" for i in (1, 2, 3))
GRAPH_VARIABLES = frozenset({"x", "x1"})


def parse(text: str, variables=DENSITY_VARIABLES) -> Node:
    """Parse ``text`` into an expression tree.

    Raises ExpressionSyntaxError carrying the column of the offending token.
    """
    return _Parser(text, frozenset(variables)).parse()


def variables_used(node: Node) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, (Neg, Call)):
        return variables_used(node.arg)
    if isinstance(node, BinOp):
        return variables_used(node.left) | variables_used(node.right)
    return set()


def sign_factors(node: Node) -> list[Node]:
    """Factors whose sign changes are the sign changes of ``node``.

    Products, quotients, negation and odd integer powers are split, so a
    double root made of two crossing factors is seen as two simple roots.
    Constant factors are dropped.
    """
    if isinstance(node, Neg):
        return sign_factors(node.arg)
    if isinstance(node, BinOp) and node.op in "*/":
        return sign_factors(node.left) + sign_factors(node.right)
    if isinstance(node, BinOp) and node.op == "^" and isinstance(node.right, Num):
        e = node.right.value
        if e == int(e) and e > 0:
            return sign_factors(node.left) if int(e) % 2 else []
    if isinstance(node, Num):
        return []
    return [node]


def abs_arguments(node: Node) -> list[Node]:
    """Sign-changing factors of every ``abs`` argument, outermost first."""
    out = []
    if isinstance(node, Call):
        if node.func == "abs":
            out.extend(sign_factors(node.arg))
        out.extend(abs_arguments(node.arg))
    elif isinstance(node, Neg):
        out.extend(abs_arguments(node.arg))
    elif isinstance(node, BinOp):
        out.extend(abs_arguments(node.left))
        out.extend(abs_arguments(node.right))
    return out


def _affine_y(node: Node):
    """y-coefficients of ``node`` if it is affine in the y variables, else None.

    x variables count as constants, so sin(2*pi*(y1 + x1)) is affine.
    """
    if isinstance(node, Num):
        return {}
    if isinstance(node, Var):
        return {node.name: 1.0} if node.name.startswith("y") else {}
    if isinstance(node, Neg):
        c = _affine_y(node.arg)
        return None if c is None else {k: -v for k, v in c.items()}
    if isinstance(node, BinOp):
        a, b = _affine_y(node.left), _affine_y(node.right)
        if a is None or b is None:
            return None
        if node.op in "+-":
            sign = 1.0 if node.op == "+" else -1.0
            out = dict(a)
            for k, v in b.items():
                out[k] = out.get(k, 0.0) + sign * v
            return out
        if node.op == "*" and (not a or not b):
            scale, coef = (node.left, b) if not a else (node.right, a)
            c = _constant(scale)
            return None if c is None else {k: c * v for k, v in coef.items()}
        if node.op == "/" and not b:
            c = _constant(node.right)
            return None if c is None or c == 0 else {k: v / c for k, v in a.items()}
        if not a and not b:
            return {}
    if isinstance(node, Call) and not (variables_used(node) & {"y1", "y2", "y3"}):
        return {}
    return None


def _constant(node: Node):
    if variables_used(node):
        return None
    return float(evaluate(node, {}))


def y_frequency(node: Node) -> float:
    """Upper bound on oscillation cycles per unit length in y along any line.

    Trigonometric calls of affine y arguments contribute |a| / (2 pi);
    sums take the maximum, products and integer powers add. Anything else
    that depends on y returns inf.
    """
    if not (variables_used(node) & {"y1", "y2", "y3"}):
        return 0.0
    if isinstance(node, Var):
        return 1.0
    if isinstance(node, Neg):
        return y_frequency(node.arg)
    if isinstance(node, Call):
        if node.func == "abs":
            return y_frequency(node.arg)
        c = _affine_y(node.arg)
        if c is None:
            return math.inf
        return math.sqrt(sum(v * v for v in c.values())) / (2 * math.pi)
    if node.op in "+-":
        return max(y_frequency(node.left), y_frequency(node.right))
    if node.op == "*":
        return y_frequency(node.left) + y_frequency(node.right)
    if node.op == "/":
        return y_frequency(node.left) if not (variables_used(node.right) & {"y1", "y2", "y3"}) else math.inf
    e = _constant(node.right)
    if e is not None and e == int(e) and e >= 0:
        return int(e) * y_frequency(node.left)
    return math.inf


def evaluate(node: Node, env: dict, text: str = ""):
    """Evaluate a tree on numpy arrays; ``env`` maps variable names to arrays."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -evaluate(node.arg, env, text)
    if isinstance(node, Call):
        arg = evaluate(node.arg, env, text)
        if node.func == "sin":
            return np.sin(arg)
        if node.func == "cos":
            return np.cos(arg)
        return np.abs(arg)
    a = evaluate(node.left, env, text)
    b = evaluate(node.right, env, text)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        if np.any(np.asarray(b) == 0):
            raise EvaluationError(
                f"division by zero in {node.right.source()!r}", text, node.pos
            )
        return a / b
    with np.errstate(invalid="ignore"):
        out = np.power(a, b)
    if np.any(np.isnan(out)) and not np.any(np.isnan(a)) and not np.any(np.isnan(b)):
        raise EvaluationError("power of a negative base with fractional exponent", text, node.pos)
    if np.any(np.isinf(out)) and np.all(np.isfinite(a)):
        raise EvaluationError("power evaluates to infinity (zero base, negative exponent)", text, node.pos)
    return out
