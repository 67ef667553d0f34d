"""Small arithmetic expression language for user-defined operators and metrics.

Grammar (EBNF), whitespace-insensitive::

    expression = term , { ("+" | "-") , term } ;
    term       = unary , { ("*" | "/") , unary } ;
    unary      = "-" , unary | power ;
    power      = atom , [ "^" , unary ] ;            (* right-associative *)
    atom       = number | variable | call | "(" , expression , ")" ;
    call       = ("abs"|"min"|"max"|"sqrt"|"exp"|"log") , "(" , expression ,
                 { "," , expression } , ")" ;

``^`` binds tighter than unary minus, so ``-x1^2`` parses as ``-(x1^2)``.
Variables are context-dependent: ``x1..xk`` for operator bodies, ``u1..um``
and ``v1..vm`` for custom metrics, ``t`` for gauge functions.

Evaluation is IEEE double precision and vectorizes over numpy arrays bound
in the environment. Undefined operations (division by zero, log of a
non-positive value, sqrt of a negative) raise NumericEvalError instead of
propagating NaN.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import NumericEvalError, UsageError


class DslSyntaxError(UsageError):
    """Parse failure, carrying 1-based line and column of the offending token."""

    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


_FUNCTIONS = {"abs": 1, "sqrt": 1, "exp": 1, "log": 1, "min": None, "max": None}

_NUMBER_RE = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


# --- AST -------------------------------------------------------------------

class Expr:
    """Base class for expression nodes."""


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str
    args: tuple


# --- tokenizer -------------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    kind: str  # num | ident | op | lparen | rparen | comma | end
    text: str
    line: int
    column: int


def _tokenize(source):
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        start_col = col
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            match = _NUMBER_RE.match(source, i)
            text = match.group(0)
            tokens.append(_Token("num", text, line, start_col))
            col += len(text)
            i = match.end()
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token("ident", source[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch in "+-*/^":
            tokens.append(_Token("op", ch, line, start_col))
        elif ch == "(":
            tokens.append(_Token("lparen", ch, line, start_col))
        elif ch == ")":
            tokens.append(_Token("rparen", ch, line, start_col))
        elif ch == ",":
            tokens.append(_Token("comma", ch, line, start_col))
        else:
            raise DslSyntaxError(f"unexpected character {ch!r}", line, start_col)
        col += 1
        i += 1
    tokens.append(_Token("end", "", line, col))
    return tokens


# --- parser ----------------------------------------------------------------

class _Parser:
    def __init__(self, tokens, variables):
        self.tokens = tokens
        self.pos = 0
        self.variables = frozenset(variables)

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        raise DslSyntaxError(message, tok.line, tok.column)

    def parse_expression(self):
        node = self.parse_term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.parse_term())
        return node

    def parse_term(self):
        node = self.parse_unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.parse_unary())
        return node

    def parse_unary(self):
        if self.peek().kind == "op" and self.peek().text == "-":
            self.advance()
            return Neg(self.parse_unary())
        return self.parse_power()

    def parse_power(self):
        base = self.parse_atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            return BinOp("^", base, self.parse_unary())
        return base

    def parse_atom(self):
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "lparen":
            self.advance()
            node = self.parse_expression()
            if self.peek().kind != "rparen":
                self.fail("expected ')'")
            self.advance()
            return node
        if tok.kind == "ident":
            self.advance()
            if tok.text in _FUNCTIONS:
                if self.peek().kind != "lparen":
                    self.fail(f"function {tok.text!r} requires arguments")
                self.advance()
                args = [self.parse_expression()]
                while self.peek().kind == "comma":
                    self.advance()
                    args.append(self.parse_expression())
                if self.peek().kind != "rparen":
                    self.fail("expected ')'")
                self.advance()
                arity = _FUNCTIONS[tok.text]
                if arity is not None and len(args) != arity:
                    self.fail(f"{tok.text} takes {arity} argument(s), got {len(args)}", tok)
                if arity is None and len(args) < 2:
                    self.fail(f"{tok.text} takes at least 2 arguments", tok)
                return Call(tok.text, tuple(args))
            if tok.text in self.variables:
                return Var(tok.text)
            self.fail(f"unknown identifier {tok.text!r}", tok)
        if tok.kind == "end":
            self.fail("unexpected end of input")
        self.fail(f"unexpected token {tok.text!r}")


def operator_variables(arity):
    """Variable names available in an operator body of the given arity."""
    return [f"x{i}" for i in range(1, arity + 1)]


def metric_variables(dimension):
    """Variable names available in a custom metric of the given dimension."""
    return [f"u{i}" for i in range(1, dimension + 1)] + \
           [f"v{i}" for i in range(1, dimension + 1)]


def parse(source, variables):
    """Parse ``source`` into an Expr; ``variables`` lists the legal names."""
    if not source or not source.strip():
        raise UsageError("empty expression")
    tokens = _tokenize(source)
    parser = _Parser(tokens, variables)
    node = parser.parse_expression()
    if parser.peek().kind != "end":
        parser.fail(f"trailing input {parser.peek().text!r}")
    return node


# --- evaluation ------------------------------------------------------------

def _check_finite(value, what):
    if not np.all(np.isfinite(value)):
        raise NumericEvalError(f"non-finite result in {what}")
    return value


def evaluate(expr, env):
    """Evaluate an Expr under ``env`` (name -> float or ndarray)."""
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        try:
            return env[expr.name]
        except KeyError:
            raise UsageError(f"variable {expr.name!r} missing from environment") from None
    if isinstance(expr, Neg):
        return -evaluate(expr.operand, env)
    if isinstance(expr, BinOp):
        left = evaluate(expr.left, env)
        right = evaluate(expr.right, env)
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        if expr.op == "/":
            if np.any(right == 0):
                raise NumericEvalError("division by zero")
            return left / right
        if expr.op == "^":
            with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
                out = np.power(np.asarray(left, dtype=float), np.asarray(right, dtype=float))
            _check_finite(out, "power")
            return float(out) if out.ndim == 0 else out
        raise AssertionError(expr.op)
    if isinstance(expr, Call):
        args = [evaluate(a, env) for a in expr.args]
        if expr.func == "abs":
            return np.abs(args[0])
        if expr.func == "sqrt":
            if np.any(np.asarray(args[0]) < 0):
                raise NumericEvalError("sqrt of a negative value")
            return np.sqrt(args[0])
        if expr.func == "exp":
            with np.errstate(over="ignore"):
                return _check_finite(np.exp(args[0]), "exp")
        if expr.func == "log":
            if np.any(np.asarray(args[0]) <= 0):
                raise NumericEvalError("log of a non-positive value")
            return np.log(args[0])
        if expr.func == "min":
            out = args[0]
            for a in args[1:]:
                out = np.minimum(out, a)
            return out
        if expr.func == "max":
            out = args[0]
            for a in args[1:]:
                out = np.maximum(out, a)
            return out
        raise AssertionError(expr.func)
    raise AssertionError(type(expr))


def variables_of(expr):
    """Set of variable names appearing in the expression."""
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, Neg):
        return variables_of(expr.operand)
    if isinstance(expr, BinOp):
        return variables_of(expr.left) | variables_of(expr.right)
    if isinstance(expr, Call):
        out = set()
        for a in expr.args:
            out |= variables_of(a)
        return out
    return set()


def format_expr(expr):
    """Canonical fully-parenthesized rendering; parses back to an equivalent Expr."""
    if isinstance(expr, Num):
        v = expr.value
        if v == int(v) and abs(v) < 1e16:
            return str(int(v))
        return repr(v)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Neg):
        inner = format_expr(expr.operand)
        if isinstance(expr.operand, (Num, Var)):
            return f"-{inner}"
        return f"-{inner}" if inner.startswith("(") else f"-({inner})"
    if isinstance(expr, BinOp):
        left = format_expr(expr.left)
        right = format_expr(expr.right)
        if expr.op == "^":
            return f"({left}^{right})"
        return f"({left} {expr.op} {right})"
    if isinstance(expr, Call):
        return f"{expr.func}({', '.join(format_expr(a) for a in expr.args)})"
    raise AssertionError(type(expr))
