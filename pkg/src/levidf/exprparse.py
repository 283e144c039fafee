"""Expression language for boundary distance functions and chart maps.

Grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' ['-'] number)?
    atom   := number | var | func '(' expr ')' | '(' expr ')'
    func   := re | im | conj | abs2 | exp | log | sqrt
    var    := 'z' digit

``^`` binds tighter than unary minus, so ``-z1^2`` is ``-(z1^2)``, and its
exponent must be a real literal.  Chart expressions may additionally use the
real transverse parameter ``t`` and the imaginary unit ``i``.

Values are complex throughout evaluation, stored as :class:`~levidf.hyperdual.Cplx`
pairs, so non-holomorphic operations such as ``conj`` and ``abs2`` are exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence, Union

from . import hyperdual as hd
from .hyperdual import Cplx, DifferentiationDomainError, Jet2

__all__ = [
    "ParseError",
    "EvalError",
    "Const",
    "Var",
    "Param",
    "ImagUnit",
    "Unary",
    "Binary",
    "Pow",
    "Expr",
    "FUNCTIONS",
    "parse",
    "pretty",
    "evaluate",
    "eval_value",
    "eval_jet",
    "variables",
]

FUNCTIONS = ("re", "im", "conj", "abs2", "exp", "log", "sqrt")


class ParseError(ValueError):
    """Malformed expression text, with a 1-based position."""

    def __init__(self, kind: str, message: str, line: int, column: int, expected: Sequence[str] = ()):
        self.kind = kind
        self.line = line
        self.column = column
        self.expected = tuple(sorted(set(expected)))
        text = f"{kind} at line {line}, column {column}: {message}"
        if self.expected:
            text += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(text)


class EvalError(DifferentiationDomainError):
    """A domain error raised while evaluating a particular AST node."""

    def __init__(self, cause: DifferentiationDomainError, node: "Expr"):
        self.cause = cause
        self.node = node
        super().__init__(cause.op, cause.value, f"at line {node.line}, column {node.column}")


@dataclass(frozen=True)
class Const:
    value: float
    line: int = 0
    column: int = 0


@dataclass(frozen=True)
class Var:
    index: int  # 1-based
    line: int = 0
    column: int = 0


@dataclass(frozen=True)
class Param:
    """The real transverse chart parameter ``t``."""

    line: int = 0
    column: int = 0


@dataclass(frozen=True)
class ImagUnit:
    line: int = 0
    column: int = 0


@dataclass(frozen=True)
class Unary:
    op: str  # one of FUNCTIONS or "neg"
    arg: "Expr"
    line: int = 0
    column: int = 0


@dataclass(frozen=True)
class Binary:
    op: str  # + - * /
    left: "Expr"
    right: "Expr"
    line: int = 0
    column: int = 0


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: float
    line: int = 0
    column: int = 0


Expr = Union[Const, Var, Param, ImagUnit, Unary, Binary, Pow]


# lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # num, ident, op, eof
    text: str
    line: int
    column: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError("lexical error", f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "ws":
            for k, ch in enumerate(text):
                if ch == "\n":
                    line += 1
                    line_start = pos + k + 1
        else:
            tokens.append(_Token(kind, text, line, col))
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


_ATOM_START = ("number", "variable", "function", "(", "-")


class _Parser:
    def __init__(self, source: str, dimension: int, chart: bool):
        self.tokens = _tokenize(source)
        self.i = 0
        self.dimension = dimension
        self.chart = chart

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, message: str, expected=()) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        return ParseError("syntax error", f"{message}, found {found}", t.line, t.column, expected)

    def expect(self, text: str) -> _Token:
        if self.tok.kind == "op" and self.tok.text == text:
            return self.advance()
        raise self.error(f"expected {text!r}", [text])

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok.kind != "eof":
            raise self.error("unexpected token", ["+", "-", "*", "/", "^", "end of input"])
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance()
            node = Binary(op.text, node, self.term(), op.line, op.column)
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance()
            node = Binary(op.text, node, self.unary(), op.line, op.column)
        return node

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            op = self.advance()
            return Unary("neg", self.unary(), op.line, op.column)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            op = self.advance()
            sign = 1.0
            if self.tok.kind == "op" and self.tok.text == "-":
                self.advance()
                sign = -1.0
            if self.tok.kind != "num":
                raise self.error("exponent must be a real literal", ["number"])
            return Pow(base, sign * float(self.advance().text), op.line, op.column)
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Const(float(t.text), t.line, t.column)
        if t.kind == "op" and t.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if t.kind == "ident":
            self.advance()
            return self.identifier(t)
        raise self.error("expected an operand", _ATOM_START)

    def identifier(self, t: _Token) -> Expr:
        name = t.text
        if name in FUNCTIONS:
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Unary(name, arg, t.line, t.column)
        if re.fullmatch(r"z\d", name):
            k = int(name[1])
            if not 1 <= k <= self.dimension:
                raise ParseError(
                    "variable index out of range",
                    f"{name} exceeds dimension {self.dimension}",
                    t.line,
                    t.column,
                )
            return Var(k, t.line, t.column)
        if self.chart and name == "t":
            return Param(t.line, t.column)
        if self.chart and name == "i":
            return ImagUnit(t.line, t.column)
        known = [f"z{k}" for k in range(1, min(self.dimension, 9) + 1)] + list(FUNCTIONS)
        if self.chart:
            known += ["t", "i"]
        raise ParseError("unknown identifier", repr(name), t.line, t.column, known)


def parse(source: str, dimension: int, *, chart: bool = False) -> Expr:
    """Parse ``source`` into an AST over variables ``z1..z{dimension}``.

    With ``chart=True`` the identifiers ``t`` and ``i`` are also accepted.
    Every failure surfaces as :class:`ParseError`.
    """
    if not isinstance(source, str):
        raise ParseError("lexical error", "source is not text", 1, 1)
    if not isinstance(dimension, int) or not 1 <= dimension <= 9:
        if not (chart and dimension == 0):
            raise ParseError("syntax error", f"dimension must be in 1..9, got {dimension!r}", 1, 1)
    try:
        return _Parser(source, dimension, chart).parse()
    except RecursionError:
        raise ParseError("syntax error", "expression nested too deeply", 1, 1) from None


def _fmt_number(x: float) -> str:
    s = repr(float(x))
    if s.endswith(".0"):
        s = s[:-2]
    if s in ("inf", "nan", "-inf"):
        raise ValueError(f"cannot print non-finite literal {s}")
    return s


def pretty(node: Expr) -> str:
    """Canonical text form; every compound node is parenthesised."""
    if isinstance(node, Const):
        return _fmt_number(node.value)
    if isinstance(node, Var):
        return f"z{node.index}"
    if isinstance(node, Param):
        return "t"
    if isinstance(node, ImagUnit):
        return "i"
    if isinstance(node, Unary):
        if node.op == "neg":
            return f"(-{pretty(node.arg)})"
        return f"{node.op}({pretty(node.arg)})"
    if isinstance(node, Binary):
        return f"({pretty(node.left)} {node.op} {pretty(node.right)})"
    if isinstance(node, Pow):
        e = node.exponent
        return f"({pretty(node.base)}^{_fmt_number(e)})"
    raise TypeError(f"not an expression node: {node!r}")


def variables(node: Expr) -> set[int]:
    """1-based indices of the complex variables referenced by ``node``."""
    if isinstance(node, Var):
        return {node.index}
    if isinstance(node, Unary):
        return variables(node.arg)
    if isinstance(node, Binary):
        return variables(node.left) | variables(node.right)
    if isinstance(node, Pow):
        return variables(node.base)
    return set()


def evaluate(node: Expr, coords: Sequence[Cplx], t=None) -> Cplx:
    """Evaluate over any scalar algebra (floats, jets, tangents).

    ``coords[k-1]`` is the value of ``zk``; ``t`` is the chart parameter.
    """
    try:
        return _eval(node, coords, t)
    except EvalError:
        raise
    except DifferentiationDomainError as exc:
        # attribute the failure to the root when no inner node claimed it
        raise EvalError(exc, node) from exc


def _eval(node: Expr, coords, t) -> Cplx:
    if isinstance(node, Const):
        return Cplx(node.value)
    if isinstance(node, Var):
        return coords[node.index - 1]
    if isinstance(node, Param):
        if t is None:
            raise ValueError("expression uses t but no chart parameter was given")
        return Cplx(t)
    if isinstance(node, ImagUnit):
        return Cplx(0.0, 1.0)
    if isinstance(node, Binary):
        a = _eval(node.left, coords, t)
        b = _eval(node.right, coords, t)
        try:
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            return a / b
        except EvalError:
            raise
        except DifferentiationDomainError as exc:
            raise EvalError(exc, node) from exc
    if isinstance(node, Pow):
        a = _eval(node.base, coords, t)
        try:
            return hd.pow_real(a, node.exponent)
        except DifferentiationDomainError as exc:
            raise EvalError(exc, node) from exc
    if isinstance(node, Unary):
        a = _eval(node.arg, coords, t)
        op = node.op
        try:
            if op == "neg":
                return -a
            if op == "re":
                return Cplx(a.re)
            if op == "im":
                return Cplx(a.imag())
            if op == "conj":
                return a.conj()
            if op == "abs2":
                return Cplx(a.abs2())
            if op == "exp":
                return hd.exp(a)
            if op == "log":
                return hd.log(a)
            return hd.sqrt(a)
        except EvalError:
            raise
        except DifferentiationDomainError as exc:
            raise EvalError(exc, node) from exc
    raise TypeError(f"not an expression node: {node!r}")


def _coords(point) -> list[Cplx]:
    return [Cplx(float(w.real), float(w.imag)) for w in (complex(p) for p in point)]


def eval_value(node: Expr, point, t: float | None = None) -> complex:
    """Plain numeric evaluation (no derivatives)."""
    out = evaluate(node, _coords(point), t)
    return complex(float(out.re), float(out.imag()))


def eval_jet(node: Expr, point) -> Jet2:
    """Jet2 of the real part of ``node`` in the ``2n`` real coordinates of ``point``."""
    return hd.jet(lambda zs: evaluate(node, zs), point)
