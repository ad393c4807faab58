"""
Coefficient expressions in one variable `x`.

Grammar (whitespace insignificant):

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' unary)?
    atom  := number | 'x' | 'pi' | 'e' | ident '(' expr ')' | '(' expr ')'

`^` is right-associative and binds tighter than unary minus, so `-x^2`
is -(x^2) and `2^-1` is 0.5. Expressions evaluate on floats (through
`math`) or on numpy arrays (through the matching ufuncs).
"""
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import List, NamedTuple, Union

import numpy as np

from ..errors import ExpressionDomainError, ExpressionSyntaxError, UnknownIdentifierError

Value = Union[float, np.ndarray]

FUNCTIONS = {
    "sin": (math.sin, np.sin),
    "cos": (math.cos, np.cos),
    "tan": (math.tan, np.tan),
    "exp": (math.exp, np.exp),
    "log": (math.log, np.log),
    "sqrt": (math.sqrt, np.sqrt),
    "abs": (abs, np.abs),
}
CONSTANTS = {"pi": math.pi, "e": math.e}


def _is_array(x: Value) -> bool:
    return isinstance(x, np.ndarray)


def _check_finite(node: "ExprAST", value: Value) -> Value:
    finite = np.all(np.isfinite(value)) if _is_array(value) else math.isfinite(value)
    if not finite:
        raise ExpressionDomainError(node.unparse(), "non-finite result")
    return value


# --- AST nodes ---
class ExprAST:
    def evaluate(self, x: Value) -> Value:
        raise NotImplementedError

    def unparse(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.unparse()


@dataclass(frozen=True)
class Number(ExprAST):
    value: float

    def evaluate(self, x: Value) -> Value:
        return np.full_like(x, self.value, dtype=float) if _is_array(x) else self.value

    def unparse(self) -> str:
        return repr(self.value)


@dataclass(frozen=True)
class Variable(ExprAST):
    def evaluate(self, x: Value) -> Value:
        return np.asarray(x, dtype=float) if _is_array(x) else float(x)

    def unparse(self) -> str:
        return "x"


@dataclass(frozen=True)
class Constant(ExprAST):
    name: str

    def evaluate(self, x: Value) -> Value:
        value = CONSTANTS[self.name]
        return np.full_like(x, value, dtype=float) if _is_array(x) else value

    def unparse(self) -> str:
        return self.name


@dataclass(frozen=True)
class Neg(ExprAST):
    operand: ExprAST

    def evaluate(self, x: Value) -> Value:
        return -self.operand.evaluate(x)

    def unparse(self) -> str:
        return f"(-{self.operand.unparse()})"


@dataclass(frozen=True)
class BinOp(ExprAST):
    op: str
    left: ExprAST
    right: ExprAST

    def evaluate(self, x: Value) -> Value:
        lhs = self.left.evaluate(x)
        rhs = self.right.evaluate(x)
        if self.op == "+":
            return _check_finite(self, lhs + rhs)
        if self.op == "-":
            return _check_finite(self, lhs - rhs)
        if self.op == "*":
            return _check_finite(self, lhs * rhs)
        if self.op == "/":
            if np.any(np.asarray(rhs) == 0.0):
                raise ExpressionDomainError(self.unparse(), "division by zero")
            return _check_finite(self, lhs / rhs)
        # "^"
        if _is_array(lhs) or _is_array(rhs):
            with np.errstate(all="ignore"):
                return _check_finite(self, np.power(lhs, rhs))
        try:
            return _check_finite(self, math.pow(lhs, rhs))
        except (ValueError, OverflowError, ZeroDivisionError) as e:
            raise ExpressionDomainError(self.unparse(), str(e)) from e

    def unparse(self) -> str:
        return f"({self.left.unparse()} {self.op} {self.right.unparse()})"


@dataclass(frozen=True)
class Call(ExprAST):
    func: str
    arg: ExprAST

    def evaluate(self, x: Value) -> Value:
        arg = self.arg.evaluate(x)
        if self.func == "log" and np.any(np.asarray(arg) <= 0.0):
            raise ExpressionDomainError(self.unparse(), "logarithm of a non-positive value")
        if self.func == "sqrt" and np.any(np.asarray(arg) < 0.0):
            raise ExpressionDomainError(self.unparse(), "square root of a negative value")
        scalar_fn, array_fn = FUNCTIONS[self.func]
        if _is_array(arg):
            with np.errstate(all="ignore"):
                return _check_finite(self, array_fn(arg))
        try:
            return _check_finite(self, float(scalar_fn(arg)))
        except (ValueError, OverflowError) as e:
            raise ExpressionDomainError(self.unparse(), str(e)) from e

    def unparse(self) -> str:
        return f"{self.func}({self.arg.unparse()})"


# --- tokenizer ---
class Token(NamedTuple):
    kind: str
    text: str
    offset: int


_TOKEN_RE = re.compile(
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r"|(?P<ws>\s+)"
    r"|(?P<bad>.)"
)


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


def tokenize(source: str) -> List[Token]:
    tokens = []
    for m in _TOKEN_RE.finditer(source):
        kind = m.lastgroup
        if kind == "ws":
            continue
        offset = _byte_offset(source, m.start())
        if kind == "bad":
            raise ExpressionSyntaxError(source, offset, "a number, identifier, operator or parenthesis")
        tokens.append(Token(kind, m.group(), offset))
    tokens.append(Token("end", "", _byte_offset(source, len(source))))
    return tokens


# --- parser ---
class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def _fail(self, expected: str):
        raise ExpressionSyntaxError(self.source, self.current.offset, expected)

    def _accept(self, text: str) -> bool:
        if self.current.kind == "op" and self.current.text == text:
            self.pos += 1
            return True
        return False

    def _expect(self, text: str):
        if not self._accept(text):
            self._fail(repr(text))

    def parse(self) -> ExprAST:
        node = self.expr()
        if self.current.kind != "end":
            self._fail("an operator or end of input")
        return node

    def expr(self) -> ExprAST:
        node = self.term()
        while self.current.kind == "op" and self.current.text in "+-":
            op = self.current.text
            self.pos += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> ExprAST:
        node = self.unary()
        while self.current.kind == "op" and self.current.text in "*/":
            op = self.current.text
            self.pos += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> ExprAST:
        if self._accept("-"):
            return Neg(self.unary())
        return self.power()

    def power(self) -> ExprAST:
        base = self.atom()
        if self._accept("^"):
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> ExprAST:
        token = self.current
        if token.kind == "number":
            value = float(token.text)
            if not math.isfinite(value):
                raise ExpressionSyntaxError(self.source, token.offset, "a finite number")
            self.pos += 1
            return Number(value)
        if token.kind == "ident":
            self.pos += 1
            if token.text == "x":
                return Variable()
            if token.text in CONSTANTS:
                return Constant(token.text)
            if token.text in FUNCTIONS:
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                return Call(token.text, arg)
            raise UnknownIdentifierError(token.text, token.offset)
        if self._accept("("):
            node = self.expr()
            self._expect(")")
            return node
        self._fail("a number, 'x', a constant, a function call or '('")


@lru_cache(maxsize=256)
def parse_expression(source: str) -> ExprAST:
    if not source or not source.strip():
        raise ExpressionSyntaxError(source or "", 0, "a non-empty expression")
    return _Parser(source).parse()


def eval_expression(ast: ExprAST, x: Value) -> Value:
    return ast.evaluate(x)


def unparse(ast: ExprAST) -> str:
    return ast.unparse()
