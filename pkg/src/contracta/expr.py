"""Small arithmetic expression language for maps, distances, phi and alpha.

Grammar (lowest to highest precedence)::

    sum     := product (('+' | '-') product)*
    product := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom ('^' unary)?
    atom    := NUMBER | NAME | NAME '(' args ')' | '(' sum ')'
             | 'piecewise' '(' clause (';' clause)* ')'
    clause  := sum CMP sum ':' sum      (conditional branch)
             | sum                      (default, last clause only)
    CMP     := '<=' | '<' | '>=' | '>' | '≤' | '≥'

``+ - * /`` are left-associative; ``^`` is right-associative and binds
tighter than unary minus, so ``-x^2`` is ``-(x^2)``.  Functions: ``abs``,
``exp``, ``min``, ``max`` (the last two variadic).  Piecewise clauses are
tried left to right; comparisons are exact on the computed values.

Expressions evaluate on Python floats or on numpy arrays (element-wise).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError, ExpressionSyntaxError

DEFAULT_VARIABLES = frozenset({"x", "y", "t", "k"})

FUNCTIONS = {
    "abs": (1, 1),
    "exp": (1, 1),
    "min": (1, None),
    "max": (1, None),
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><=|>=|≤|≥|[-+*/^(),:;<>])
    """,
    re.VERBOSE,
)

_CMP_CANON = {"≤": "<=", "≥": ">="}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, _CMP_CANON.get(m.group(), m.group()), pos))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Node:
    src: str


@dataclass(frozen=True)
class Num(Node):
    value: float


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class Neg(Node):
    operand: Node


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Call(Node):
    name: str
    args: tuple


@dataclass(frozen=True)
class Compare(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Piecewise(Node):
    clauses: tuple  # of (Compare, Node)
    default: Node


class _Parser:
    def __init__(self, text, variables):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.variables = variables

    @property
    def tok(self):
        return self.tokens[self.i]

    def fail(self, message, tok=None):
        tok = tok or self.tok
        raise ExpressionSyntaxError(message, self.text, tok.pos)

    def advance(self):
        tok = self.tok
        self.i += 1
        return tok

    def expect(self, text):
        if self.tok.text != text or self.tok.kind == "end":
            found = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
            self.fail(f"expected {text!r}, found {found}")
        return self.advance()

    def span(self, start_tok):
        end = self.tokens[self.i - 1]
        return self.text[start_tok.pos:end.pos + len(end.text)].strip()

    def parse(self):
        node = self.sum()
        if self.tok.kind != "end":
            self.fail(f"unexpected {self.tok.text!r}")
        return node

    def sum(self):
        start = self.tok
        node = self.product()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.advance().text
            right = self.product()
            node = BinOp(self.span(start), op, node, right)
        return node

    def product(self):
        start = self.tok
        node = self.unary()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = self.advance().text
            right = self.unary()
            node = BinOp(self.span(start), op, node, right)
        return node

    def unary(self):
        start = self.tok
        if self.tok.kind == "op" and self.tok.text in ("-", "+"):
            op = self.advance().text
            operand = self.unary()
            return Neg(self.span(start), operand) if op == "-" else operand
        return self.power()

    def power(self):
        start = self.tok
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            exponent = self.unary()
            return BinOp(self.span(start), "^", base, exponent)
        return base

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Num(tok.text, float(tok.text))
        if tok.kind == "name":
            self.advance()
            if tok.text == "piecewise":
                return self.piecewise(tok)
            if self.tok.text == "(" and self.tok.kind == "op":
                return self.call(tok)
            if tok.text in FUNCTIONS:
                self.fail(f"function '{tok.text}' needs arguments", tok)
            if tok.text not in self.variables:
                allowed = ", ".join(sorted(self.variables))
                self.fail(f"unknown variable '{tok.text}' (allowed: {allowed})", tok)
            return Var(tok.text, tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.sum()
            self.expect(")")
            return node
        if tok.kind == "end":
            self.fail("unexpected end of input")
        self.fail(f"unexpected {tok.text!r}")

    def call(self, name_tok):
        if name_tok.text not in FUNCTIONS:
            self.fail(f"unknown function '{name_tok.text}'", name_tok)
        lo, hi = FUNCTIONS[name_tok.text]
        self.expect("(")
        args = [self.sum()]
        while self.tok.text == ",":
            self.advance()
            args.append(self.sum())
        self.expect(")")
        if len(args) < lo or (hi is not None and len(args) > hi):
            self.fail(f"wrong number of arguments to '{name_tok.text}'", name_tok)
        return Call(self.span(name_tok), name_tok.text, tuple(args))

    def piecewise(self, start):
        self.expect("(")
        clauses = []
        default = None
        while True:
            left = self.sum()
            if self.tok.kind == "op" and self.tok.text in ("<", "<=", ">", ">="):
                if default is not None:
                    self.fail("default branch must be the last clause")
                op = self.advance().text
                right = self.sum()
                cond = Compare(f"{left.src} {op} {right.src}", op, left, right)
                self.expect(":")
                clauses.append((cond, self.sum()))
            else:
                if default is not None:
                    self.fail("piecewise has more than one default branch")
                default = left
            if self.tok.text == ";":
                self.advance()
                continue
            break
        self.expect(")")
        if default is None:
            self.fail("piecewise needs a final default branch")
        if not clauses:
            self.fail("piecewise needs at least one conditional clause")
        return Piecewise(self.span(start), tuple(clauses), default)


# --- evaluation ------------------------------------------------------------


def _check(value, node):
    if not np.all(np.isfinite(value)):
        raise EvaluationError("non-finite result", node.src)
    return value


def _eval(node, env):
    if isinstance(node, Num):
        return np.float64(node.value)
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise EvaluationError(f"unbound variable '{node.name}'", node.src) from None
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, BinOp):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        with np.errstate(all="ignore"):
            if node.op == "+":
                return _check(a + b, node)
            if node.op == "-":
                return _check(a - b, node)
            if node.op == "*":
                return _check(a * b, node)
            if node.op == "/":
                if np.any(b == 0):
                    raise EvaluationError("division by zero", node.src)
                return _check(a / b, node)
            if np.any((a == 0) & (b < 0)):
                raise EvaluationError("zero raised to a negative power", node.src)
            out = np.power(a, b)
            if np.any(np.isnan(out)):
                raise EvaluationError("negative base with non-integer exponent", node.src)
            return _check(out, node)
    if isinstance(node, Call):
        args = [_eval(a, env) for a in node.args]
        if node.name == "abs":
            return np.abs(args[0])
        if node.name == "exp":
            with np.errstate(all="ignore"):
                return _check(np.exp(args[0]), node)
        fn = np.minimum if node.name == "min" else np.maximum
        out = args[0]
        for a in args[1:]:
            out = fn(out, a)
        return out
    if isinstance(node, Compare):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        return {"<": np.less, "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal}[node.op](a, b)
    if isinstance(node, Piecewise):
        return _eval_piecewise(node, env)
    raise TypeError(f"unknown node {node!r}")


def _eval_piecewise(node, env):
    # env values are 1-d arrays of a common length here
    n = len(next(iter(env.values()))) if env else 1
    out = np.empty(n)
    remaining = np.ones(n, dtype=bool)
    for cond, branch in node.clauses:
        if not remaining.any():
            break
        sub = {k: v[remaining] for k, v in env.items()}
        hit = np.broadcast_to(_eval(cond, sub), (int(remaining.sum()),))
        idx = np.flatnonzero(remaining)[hit]
        if idx.size:
            out[idx] = _eval(branch, {k: v[idx] for k, v in env.items()})
            remaining[idx] = False
    if remaining.any():
        out[remaining] = _eval(node.default, {k: v[remaining] for k, v in env.items()})
    return out


class Expression:
    """A parsed expression, callable with keyword variable bindings.

    >>> Expression("abs(x - y)")(x=0.3, y=0.7)
    0.39999999999999997
    """

    def __init__(self, text: str, variables=DEFAULT_VARIABLES):
        self.text = text
        self.variables = frozenset(variables)
        self.root = _Parser(text, self.variables).parse()

    def free_variables(self) -> set[str]:
        found = set()

        def walk(node):
            if isinstance(node, Var):
                found.add(node.name)
            for child in vars(node).values():
                if isinstance(child, Node):
                    walk(child)
                elif isinstance(child, tuple):
                    for c in child:
                        for cc in (c if isinstance(c, tuple) else (c,)):
                            if isinstance(cc, Node):
                                walk(cc)

        walk(self.root)
        return found

    def __call__(self, **bindings):
        scalar = all(np.ndim(v) == 0 for v in bindings.values())
        arrays = np.broadcast_arrays(*[np.asarray(v, dtype=float) for v in bindings.values()])
        shape = arrays[0].shape if arrays else ()
        env = {k: a.reshape(-1) for k, a in zip(bindings, arrays)}
        size = int(np.prod(shape))
        value = np.broadcast_to(np.asarray(_eval(self.root, env), dtype=float), (size,))
        if scalar:
            return float(value[0])
        return value.reshape(shape).copy()

    def __repr__(self):
        return f"Expression({self.text!r})"

    def __eq__(self, other):
        return isinstance(other, Expression) and other.text == self.text

    def __hash__(self):
        return hash(self.text)


def eval_expression(expr: str, bindings: dict) -> float:
    """Parse ``expr`` and evaluate it under ``bindings`` (variable -> real)."""
    return Expression(expr)(**bindings)
