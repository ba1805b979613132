"""Small arithmetic expression language for CLI-supplied functions.

Grammar (precedence low to high, no implicit multiplication):

    sum     :=  product (('+' | '-') product)*
    product :=  unary (('*' | '/') unary)*
    unary   :=  '-' unary | power
    power   :=  primary ('^' power)?          -- right associative
    primary :=  NUMBER | IDENT | IDENT '(' args ')' | '(' sum ')'

Unary minus binds looser than '^', so -x^2 parses as -(x^2).  Known calls:
abs, sqrt, cbrt, root4, exp, ln, sin, cos, atan (one argument) and min,
max, pow (two).  Constants pi and e are always available; any other
identifier must be declared in ``allowed_vars``.

In expressions for f and g the variable t denotes the forcing-grid point
directly (the first argument at which the function is sampled); psi
expressions use the single variable L.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union


class ExprSyntaxError(ValueError):
    """Malformed source; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifierError(ExprSyntaxError):
    """Identifier that is neither a constant, a call, nor an allowed variable."""


class DomainError(ValueError):
    """Evaluation left the real domain (sqrt of a negative, ln of <= 0, ...)."""


class MissingBindingError(KeyError):
    """A variable was referenced without a binding."""


class _Node:
    def eval(self, bindings: Mapping[str, float]) -> float:
        return evaluate(self, bindings)


@dataclass(frozen=True)
class Lit(_Node):
    value: float


@dataclass(frozen=True)
class Var(_Node):
    name: str


@dataclass(frozen=True)
class Const(_Node):
    name: str


@dataclass(frozen=True)
class Unary(_Node):
    arg: "Expr"


@dataclass(frozen=True)
class Bin(_Node):
    op: str
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Call(_Node):
    name: str
    args: tuple["Expr", ...]


Expr = Union[Lit, Var, Const, Unary, Bin, Call]

_CONSTANTS = {"pi": math.pi, "e": math.e}
_ARITY = {
    "abs": 1,
    "sqrt": 1,
    "cbrt": 1,
    "root4": 1,
    "exp": 1,
    "ln": 1,
    "sin": 1,
    "cos": 1,
    "atan": 1,
    "min": 2,
    "max": 2,
    "pow": 2,
}

_TOKEN_RE = re.compile(
    r"(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)

_BIN_LBP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_UNARY_RBP = 25  # between */ (20) and ^ (40): -x^2 == -(x^2), -x*y == (-x)*y


@dataclass(frozen=True)
class _Token:
    kind: str  # num | ident | op | end
    text: str
    pos: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        if source[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", pos)
        if m.group("num") is not None:
            tokens.append(_Token("num", m.group("num"), pos))
        elif m.group("ident") is not None:
            tokens.append(_Token("ident", m.group("ident"), pos))
        else:
            tokens.append(_Token("op", m.group("op"), pos))
        pos = m.end()
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, source: str, allowed_vars: frozenset[str]) -> None:
        self.tokens = _tokenize(source)
        self.i = 0
        self.allowed = allowed_vars

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.cur
        self.i += 1
        return tok

    def expect_op(self, text: str) -> None:
        if self.cur.kind != "op" or self.cur.text != text:
            raise ExprSyntaxError(f"expected {text!r}", self.cur.pos)
        self.advance()

    def expression(self, rbp: int) -> Expr:
        left = self.nud(self.advance())
        while self.cur.kind == "op" and _BIN_LBP.get(self.cur.text, 0) > rbp:
            left = self.led(self.advance(), left)
        return left

    def nud(self, tok: _Token) -> Expr:
        if tok.kind == "num":
            return Lit(float(tok.text))
        if tok.kind == "ident":
            if self.cur.kind == "op" and self.cur.text == "(":
                return self.call(tok)
            if tok.text in _CONSTANTS:
                return Const(tok.text)
            if tok.text in self.allowed:
                return Var(tok.text)
            raise UnknownIdentifierError(
                f"unknown identifier {tok.text!r}", tok.pos
            )
        if tok.kind == "op" and tok.text == "-":
            return Unary(self.expression(_UNARY_RBP))
        if tok.kind == "op" and tok.text == "(":
            inner = self.expression(0)
            self.expect_op(")")
            return inner
        if tok.kind == "end":
            raise ExprSyntaxError("unexpected end of input", tok.pos)
        raise ExprSyntaxError(f"expected a value, got {tok.text!r}", tok.pos)

    def call(self, name_tok: _Token) -> Expr:
        name = name_tok.text
        if name not in _ARITY:
            raise UnknownIdentifierError(
                f"unknown function {name!r}", name_tok.pos
            )
        self.expect_op("(")
        args = [self.expression(0)]
        while self.cur.kind == "op" and self.cur.text == ",":
            self.advance()
            args.append(self.expression(0))
        self.expect_op(")")
        if len(args) != _ARITY[name]:
            raise ExprSyntaxError(
                f"{name} takes {_ARITY[name]} argument(s), got {len(args)}",
                name_tok.pos,
            )
        return Call(name, tuple(args))

    def led(self, tok: _Token, left: Expr) -> Expr:
        op = tok.text
        if op == "^":
            return Bin(op, left, self.expression(_BIN_LBP[op] - 1))
        return Bin(op, left, self.expression(_BIN_LBP[op]))


def parse(source: str, allowed_vars: set[str] | frozenset[str]) -> Expr:
    """Parse ``source`` into an AST; variables outside ``allowed_vars`` are
    rejected at parse time with their byte offset."""
    if not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    parser = _Parser(source, frozenset(allowed_vars))
    tree = parser.expression(0)
    if parser.cur.kind != "end":
        raise ExprSyntaxError(
            f"unexpected token {parser.cur.text!r}", parser.cur.pos
        )
    return tree


def _power(base: float, exponent: float) -> float:
    try:
        out = base**exponent
    except ZeroDivisionError as exc:
        raise DomainError(f"zero raised to negative power {exponent!r}") from exc
    except OverflowError:
        return math.inf
    if isinstance(out, complex):
        raise DomainError(
            f"negative base {base!r} with non-integer exponent {exponent!r}"
        )
    return out


def _call_value(name: str, args: list[float]) -> float:
    a = args[0]
    if name == "abs":
        return abs(a)
    if name == "sqrt":
        if a < 0.0:
            raise DomainError(f"sqrt of negative value {a!r}")
        return math.sqrt(a)
    if name == "cbrt":
        return math.copysign(abs(a) ** (1.0 / 3.0), a)
    if name == "root4":
        if a < 0.0:
            raise DomainError(f"root4 of negative value {a!r}")
        return a**0.25
    if name == "exp":
        try:
            return math.exp(a)
        except OverflowError:
            return math.inf
    if name == "ln":
        if a <= 0.0:
            raise DomainError(f"ln of nonpositive value {a!r}")
        return math.log(a)
    if name == "sin":
        return math.sin(a)
    if name == "cos":
        return math.cos(a)
    if name == "atan":
        return math.atan(a)
    if name == "min":
        return min(a, args[1])
    if name == "max":
        return max(a, args[1])
    if name == "pow":
        return _power(a, args[1])
    raise AssertionError(f"unhandled call {name!r}")


def evaluate(tree: Expr, bindings: Mapping[str, float]) -> float:
    """IEEE double evaluation; real-domain violations raise, never NaN."""
    if isinstance(tree, Lit):
        return tree.value
    if isinstance(tree, Const):
        return _CONSTANTS[tree.name]
    if isinstance(tree, Var):
        if tree.name not in bindings:
            raise MissingBindingError(tree.name)
        return float(bindings[tree.name])
    if isinstance(tree, Unary):
        return -evaluate(tree.arg, bindings)
    if isinstance(tree, Bin):
        lhs = evaluate(tree.lhs, bindings)
        rhs = evaluate(tree.rhs, bindings)
        if tree.op == "+":
            return lhs + rhs
        if tree.op == "-":
            return lhs - rhs
        if tree.op == "*":
            return lhs * rhs
        if tree.op == "/":
            if rhs == 0.0:
                raise DomainError("division by zero")
            return lhs / rhs
        if tree.op == "^":
            return _power(lhs, rhs)
        raise AssertionError(f"unhandled operator {tree.op!r}")
    if isinstance(tree, Call):
        return _call_value(tree.name, [evaluate(a, bindings) for a in tree.args])
    raise TypeError(f"not an expression node: {tree!r}")


def to_source(tree: Expr) -> str:
    """Parenthesized source; reparsing yields a structurally identical AST."""
    if isinstance(tree, Lit):
        return repr(tree.value)
    if isinstance(tree, (Var, Const)):
        return tree.name
    if isinstance(tree, Unary):
        return f"(-{to_source(tree.arg)})"
    if isinstance(tree, Bin):
        return f"({to_source(tree.lhs)} {tree.op} {to_source(tree.rhs)})"
    if isinstance(tree, Call):
        return f"{tree.name}({', '.join(to_source(a) for a in tree.args)})"
    raise TypeError(f"not an expression node: {tree!r}")


def variables(tree: Expr) -> set[str]:
    """Names of all variables referenced by the expression."""
    if isinstance(tree, Var):
        return {tree.name}
    if isinstance(tree, Unary):
        return variables(tree.arg)
    if isinstance(tree, Bin):
        return variables(tree.lhs) | variables(tree.rhs)
    if isinstance(tree, Call):
        out: set[str] = set()
        for a in tree.args:
            out |= variables(a)
        return out
    return set()
