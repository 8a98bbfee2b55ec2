"""Fixture expression language.

Grammar, loosest binding first::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | "x" | "pi" | "e" | NAME "(" expr ("," expr)* ")" | "(" expr ")"

so ``^`` binds tighter than unary minus and is right associative, and
``x^-2`` parses as x to the power -2.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, NamedTuple, Tuple

import numpy as np

from .constants import REPAIR_SAMPLE_EXPONENTS
from .errors import EvalError, ExpressionSyntaxError, UnknownFunction
from .function_core import ArrayLike, Evaluator

FUNCTIONS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "atan": np.arctan,
    "abs": np.abs,
    "sqrt": np.sqrt,
}
CONSTANTS = {"pi": math.pi, "e": math.e}

TOKEN_SPEC = [
    ("NUMBER", r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"),
    ("NAME", r"[A-Za-z_][A-Za-z_0-9]*"),
    ("OP", r"[-+*/^]"),
    ("LPAREN", r"\("),
    ("RPAREN", r"\)"),
    ("COMMA", r","),
    ("SPACE", r"\s+"),
    ("MISMATCH", r"."),
]
TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in TOKEN_SPEC))


class Token(NamedTuple):
    kind: str
    text: str
    position: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    for match in TOKEN_RE.finditer(text):
        kind = match.lastgroup
        if kind == "SPACE":
            continue
        if kind == "MISMATCH":
            raise ExpressionSyntaxError(f"unexpected character {match.group()!r}", match.start())
        tokens.append(Token(kind, match.group(), match.start()))
    tokens.append(Token("END", "", len(text)))
    return tokens


class Expression:
    def evaluate(self, x: ArrayLike) -> np.ndarray:
        raise NotImplementedError

    def to_text(self) -> str:
        raise NotImplementedError

    def uses_variable(self) -> bool:
        return any(child.uses_variable() for child in self.children())

    def children(self) -> Tuple["Expression", ...]:
        return ()

    def walk(self):
        yield self
        for child in self.children():
            yield from child.walk()

    def __str__(self) -> str:
        return self.to_text()


@dataclass(frozen=True)
class Number(Expression):
    value: float
    lexeme: str

    def evaluate(self, x: ArrayLike) -> np.ndarray:
        return np.full(np.shape(x), self.value, dtype=float)

    def to_text(self) -> str:
        return self.lexeme


@dataclass(frozen=True)
class Variable(Expression):
    def evaluate(self, x: ArrayLike) -> np.ndarray:
        return np.asarray(x, dtype=float)

    def to_text(self) -> str:
        return "x"

    def uses_variable(self) -> bool:
        return True


@dataclass(frozen=True)
class Constant(Expression):
    name: str

    def evaluate(self, x: ArrayLike) -> np.ndarray:
        return np.full(np.shape(x), CONSTANTS[self.name], dtype=float)

    def to_text(self) -> str:
        return self.name


@dataclass(frozen=True)
class Group(Expression):
    inner: Expression

    def evaluate(self, x: ArrayLike) -> np.ndarray:
        return self.inner.evaluate(x)

    def to_text(self) -> str:
        return f"({self.inner.to_text()})"

    def children(self) -> Tuple[Expression, ...]:
        return (self.inner,)


@dataclass(frozen=True)
class Negate(Expression):
    operand: Expression

    def evaluate(self, x: ArrayLike) -> np.ndarray:
        return -self.operand.evaluate(x)

    def to_text(self) -> str:
        return f"-{self.operand.to_text()}"

    def children(self) -> Tuple[Expression, ...]:
        return (self.operand,)


BINARY_OPS: Dict[str, Callable[[np.ndarray, np.ndarray], np.ndarray]] = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}


@dataclass(frozen=True)
class Binary(Expression):
    op: str
    left: Expression
    right: Expression

    def evaluate(self, x: ArrayLike) -> np.ndarray:
        with np.errstate(all="ignore"):
            return BINARY_OPS[self.op](self.left.evaluate(x), self.right.evaluate(x))

    def to_text(self) -> str:
        return f"{self.left.to_text()}{self.op}{self.right.to_text()}"

    def children(self) -> Tuple[Expression, ...]:
        return (self.left, self.right)


@dataclass(frozen=True)
class Call(Expression):
    name: str
    args: Tuple[Expression, ...]
    position: int = 0

    def evaluate(self, x: ArrayLike) -> np.ndarray:
        with np.errstate(all="ignore"):
            if self.name == "piecewise":
                return self._piecewise(x)
            return FUNCTIONS[self.name](self.args[0].evaluate(x))

    def breakpoints(self) -> List[float]:
        k = len(self.args) // 2
        return [float(arg.evaluate(0.0)) for arg in self.args[:k]]

    def branches(self) -> Tuple[Expression, ...]:
        return self.args[len(self.args) // 2:]

    def _piecewise(self, x: ArrayLike) -> np.ndarray:
        x_arr = np.asarray(x, dtype=float)
        index = np.searchsorted(np.array(self.breakpoints()), x_arr, side="right")
        out = np.full(x_arr.shape, np.nan)
        for i, branch in enumerate(self.branches()):
            mask = index == i
            if np.any(mask):
                out[mask] = np.broadcast_to(branch.evaluate(x_arr[mask]), out[mask].shape)
        return out

    def to_text(self) -> str:
        return f"{self.name}({','.join(arg.to_text() for arg in self.args)})"

    def children(self) -> Tuple[Expression, ...]:
        return self.args


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def expect(self, kind: str, what: str) -> Token:
        if self.current.kind != kind:
            self.fail(f"expected {what}")
        return self.advance()

    def fail(self, message: str) -> None:
        token = self.current
        found = "end of input" if token.kind == "END" else repr(token.text)
        raise ExpressionSyntaxError(f"{message}, found {found}", token.position)

    def parse(self) -> Expression:
        if self.current.kind == "END":
            raise ExpressionSyntaxError("empty expression", 0)
        node = self.expr()
        if self.current.kind != "END":
            self.fail("unexpected token")
        return node

    def expr(self) -> Expression:
        node = self.term()
        while self.current.kind == "OP" and self.current.text in "+-":
            op = self.advance().text
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expression:
        node = self.unary()
        while self.current.kind == "OP" and self.current.text in "*/":
            op = self.advance().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Expression:
        if self.current.kind == "OP" and self.current.text == "-":
            self.advance()
            return Negate(self.unary())
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        if self.current.kind == "OP" and self.current.text == "^":
            self.advance()
            return Binary("^", base, self.unary())
        return base

    def atom(self) -> Expression:
        token = self.current
        if token.kind == "NUMBER":
            self.advance()
            return Number(float(token.text), token.text)
        if token.kind == "LPAREN":
            self.advance()
            inner = self.expr()
            self.expect("RPAREN", "')'")
            return Group(inner)
        if token.kind == "NAME":
            self.advance()
            if self.current.kind == "LPAREN":
                return self.call(token)
            if token.text == "x":
                return Variable()
            if token.text in CONSTANTS:
                return Constant(token.text)
            raise UnknownFunction(f"unknown name {token.text!r} at position {token.position}")
        self.fail("expected a number, 'x', a call or '('")
        raise AssertionError("unreachable")

    def call(self, name: Token) -> Expression:
        if name.text not in FUNCTIONS and name.text != "piecewise":
            raise UnknownFunction(f"unknown function {name.text!r} at position {name.position}")
        self.expect("LPAREN", "'('")
        args = [self.expr()]
        while self.current.kind == "COMMA":
            self.advance()
            args.append(self.expr())
        self.expect("RPAREN", "')'")
        if name.text == "piecewise":
            return self._piecewise(name, args)
        if len(args) != 1:
            raise ExpressionSyntaxError(f"{name.text} takes one argument, got {len(args)}", name.position)
        return Call(name.text, (args[0],), name.position)

    def _piecewise(self, name: Token, args: List[Expression]) -> Expression:
        if len(args) < 3 or len(args) % 2 == 0:
            raise ExpressionSyntaxError("piecewise needs k breakpoints and k+1 branches", name.position)
        k = len(args) // 2
        if any(arg.uses_variable() for arg in args[:k]):
            raise ExpressionSyntaxError("piecewise breakpoints must be constant", name.position)
        node = Call("piecewise", tuple(args), name.position)
        points = node.breakpoints()
        if any(not math.isfinite(p) for p in points) or any(a >= b for a, b in zip(points, points[1:])):
            raise ExpressionSyntaxError("piecewise breakpoints must be finite and strictly increasing", name.position)
        return node


def parse_expression(text: str) -> Expression:
    return Parser(text).parse()


def check_piecewise_continuity(expr: Expression, tol: float = 1e-9) -> None:
    """Raises when adjacent piecewise branches disagree at a breakpoint."""
    for node in expr.walk():
        if not (isinstance(node, Call) and node.name == "piecewise"):
            continue
        branches = node.branches()
        for i, point in enumerate(node.breakpoints()):
            at = np.array([point])
            with np.errstate(all="ignore"):
                left = float(branches[i].evaluate(at)[0])
                right = float(branches[i + 1].evaluate(at)[0])
            if not abs(left - right) <= tol * max(1.0, abs(left), abs(right)):
                raise ExpressionSyntaxError(
                    f"piecewise branches disagree at x={point!r} ({left!r} vs {right!r})", node.position
                )


def repair_removable(evaluator: Evaluator, agreement: float = 1e-12) -> Evaluator:
    """Replaces non-finite values at finite x by an agreeing two-sided limit."""
    exponents = np.array(list(REPAIR_SAMPLE_EXPONENTS), dtype=float)

    def repaired(x: ArrayLike) -> np.ndarray:
        x_arr = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            values = np.array(np.broadcast_to(np.asarray(evaluator(x_arr), dtype=float), x_arr.shape))
        bad = ~np.isfinite(values) & np.isfinite(x_arr)
        if not bad.any():
            return values
        for point in np.unique(x_arr[bad]):
            step = 2.0**-exponents * max(1.0, abs(point))
            with np.errstate(all="ignore"):
                left = np.asarray(evaluator(point - step), dtype=float)
                right = np.asarray(evaluator(point + step), dtype=float)
            left, right = np.broadcast_to(left, step.shape), np.broadcast_to(right, step.shape)
            ok = np.isfinite(left) & np.isfinite(right) & (
                np.abs(left - right) <= agreement * np.maximum(1.0, np.abs(left))
            )
            if not ok.any():
                raise EvalError(f"expression is not finite at x={float(point)!r}", witness=float(point))
            deepest = np.flatnonzero(ok)[-1]
            values[x_arr == point] = 0.5 * (left[deepest] + right[deepest])
        return values

    return repaired


def compile_expression(text: str, continuous: bool = True) -> Evaluator:
    """Parses, checks piecewise continuity and returns a repaired vectorized evaluator.

    Integrands may jump, so `continuous=False` skips the breakpoint check.
    """
    expr = parse_expression(text)
    if continuous:
        check_piecewise_continuity(expr)
    evaluate = expr.evaluate

    def evaluator(x: ArrayLike) -> np.ndarray:
        return np.broadcast_to(evaluate(np.asarray(x, dtype=float)), np.shape(x))

    return repair_removable(evaluator)
