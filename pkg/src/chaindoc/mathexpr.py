"""Math-panel expression language: parse, evaluate, format.

Grammar (whitespace between tokens is ignored)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := primary ("^" unary)?
    primary := NUMBER | IDENT | IDENT "(" [expr ("," expr)*] ")" | "(" expr ")"

``^`` is right-associative and binds tighter than unary minus, so
``-2^2 == -4`` and ``2^3^2 == 512``. Numbers accept scientific notation and
the engineering suffixes ``k M m u n p`` (``4.7k == 4700``). There is no
implicit multiplication: ``2x`` is a syntax error.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Union

from .errors import ExprError

SUFFIXES = {"k": 1e3, "M": 1e6, "m": 1e-3, "u": 1e-6, "n": 1e-9, "p": 1e-12}

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?", re.ASCII)
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_IDENT_CHAR = re.compile(r"[A-Za-z0-9_]")
_DIGITS = "0123456789"


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Expr = Union[Num, Var, Neg, BinOp, Call]


# --------------------------------------------------------------------------
# numbers


def parse_number(text: str) -> float:
    """Parse a literal such as ``1k``, ``-2.2u`` or ``1e-3`` (no expressions)."""
    sign = -1.0 if text[:1] == "-" else 1.0
    if text[:1] in "+-" and text:
        text = text[1:]
    m = _NUMBER.fullmatch(text[:-1]) if text and text[-1] in SUFFIXES else None
    if m is not None:
        return sign * float(text[:-1]) * SUFFIXES[text[-1]]
    if _NUMBER.fullmatch(text):
        return sign * float(text)
    raise ValueError(f"not a number: {text!r}")


def format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


# --------------------------------------------------------------------------
# tokenizer / parser


@dataclass(frozen=True)
class _Tok:
    kind: str  # num, ident, op, end
    text: str
    pos: int
    value: float = 0.0


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _DIGITS or (c == "." and i + 1 < n and text[i + 1] in _DIGITS):
            m = _NUMBER.match(text, i)
            j = m.end()
            value = float(m.group())
            if j < n and text[j] in SUFFIXES and not (j + 1 < n and _IDENT_CHAR.match(text[j + 1])):
                value *= SUFFIXES[text[j]]
                j += 1
            if j < n and _IDENT_CHAR.match(text[j]):
                raise ExprError("syntax_error", f"unexpected {text[j]!r} after number", position=j)
            toks.append(_Tok("num", text[i:j], i, value))
            i = j
            continue
        m = _IDENT.match(text, i)
        if m:
            toks.append(_Tok("ident", m.group(), i))
            i = m.end()
            continue
        if c in "+-*/^(),":
            toks.append(_Tok("op", c, i))
            i += 1
            continue
        raise ExprError("syntax_error", f"unexpected character {c!r}", position=i)
    toks.append(_Tok("end", "", n))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def accept(self, op: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == op:
            self.i += 1
            return True
        return False

    def expect(self, op: str):
        if not self.accept(op):
            self.fail(f"expected {op!r}")

    def fail(self, msg: str):
        tok = self.tok
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExprError("syntax_error", f"{msg}, found {found}", position=tok.pos)

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.accept("-"):
            return Neg(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.accept("^"):
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(tok.value)
        if tok.kind == "ident":
            self.i += 1
            if self.accept("("):
                args = []
                if not self.accept(")"):
                    args.append(self.expr())
                    while self.accept(","):
                        args.append(self.expr())
                    self.expect(")")
                return Call(tok.text, tuple(args))
            return Var(tok.text)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        self.fail("expected a number, name or '('")


def parse_expr(text: str) -> Expr:
    """Parse ``text`` into an expression tree; raises ``ExprError(syntax_error)``."""
    p = _Parser(text)
    try:
        node = p.expr()
    except RecursionError:
        raise ExprError("syntax_error", "expression nested too deeply", position=0) from None
    if p.tok.kind != "end":
        p.fail("expected operator or end of input")
    return node


# --------------------------------------------------------------------------
# environment and evaluation


def _checked(fn: Callable[[float], float], lo: float = -math.inf, hi: float = math.inf, lo_open=False):
    def wrapped(x):
        if x < lo or x > hi or (lo_open and x == lo):
            raise ValueError
        return fn(x)

    return wrapped


def _minmax(f):
    def wrapped(*args):
        if not args:
            raise TypeError
        return f(args)

    return wrapped


def _pow(a, b):
    if a == 0 and b < 0:
        raise ZeroDivisionError
    r = a ** b
    if isinstance(r, complex):
        raise ValueError
    return r


# name -> (callable, arity or None for variadic)
FUNCTIONS: dict[str, tuple[Callable, int | None]] = {
    "sin": (math.sin, 1),
    "cos": (math.cos, 1),
    "tan": (math.tan, 1),
    "asin": (_checked(math.asin, -1.0, 1.0), 1),
    "acos": (_checked(math.acos, -1.0, 1.0), 1),
    "atan": (math.atan, 1),
    "exp": (math.exp, 1),
    "ln": (_checked(math.log, 0.0, lo_open=True), 1),
    "log10": (_checked(math.log10, 0.0, lo_open=True), 1),
    "sqrt": (_checked(math.sqrt, 0.0), 1),
    "abs": (abs, 1),
    "min": (_minmax(min), None),
    "max": (_minmax(max), None),
    "pow": (_pow, 2),
}

CONSTANTS = {"pi": math.pi, "e": math.e}


class ShadowedConstantWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Environment:
    """Variable bindings on top of the built-in constants ``pi`` and ``e``."""

    bindings: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name in self.bindings:
            if name in FUNCTIONS:
                raise ExprError("shadowed_function", f"cannot bind function name {name!r}")
            if name in CONSTANTS:
                warnings.warn(f"binding {name!r} overrides the built-in constant", ShadowedConstantWarning, stacklevel=3)
        object.__setattr__(self, "bindings", dict(self.bindings))

    def bind(self, **values: float) -> "Environment":
        return Environment({**self.bindings, **values})

    def lookup(self, name: str) -> float:
        if name in self.bindings:
            return self.bindings[name]
        if name in CONSTANTS:
            return CONSTANTS[name]
        raise ExprError("unknown_identifier", name, name=name)


def _binop(op: str, a: float, b: float) -> float:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise ZeroDivisionError
        return a / b
    return _pow(a, b)


def _eval(node: Expr, env: Environment) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return float(env.lookup(node.name))
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, BinOp):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        try:
            return _binop(node.op, a, b)
        except ZeroDivisionError:
            raise ExprError("division_by_zero", f"{format_expr(node)}") from None
        except ValueError:
            raise ExprError("domain_error", f"{format_expr(node)}") from None
        except OverflowError:
            raise ExprError("overflow", f"{format_expr(node)}") from None
    if isinstance(node, Call):
        if node.name not in FUNCTIONS:
            raise ExprError("unknown_function", node.name, name=node.name)
        fn, arity = FUNCTIONS[node.name]
        if (arity is not None and len(node.args) != arity) or (arity is None and not node.args):
            raise ExprError("arity_error", f"{node.name}() takes {arity or 'at least 1'} argument(s), got {len(node.args)}")
        args = [_eval(a, env) for a in node.args]
        try:
            return float(fn(*args))
        except ZeroDivisionError:
            raise ExprError("division_by_zero", format_expr(node)) from None
        except ValueError:
            raise ExprError("domain_error", format_expr(node)) from None
        except OverflowError:
            raise ExprError("overflow", format_expr(node)) from None
    raise TypeError(f"not an expression node: {node!r}")


def eval_expr(tree: Expr, env: Environment | None = None) -> float:
    """Evaluate ``tree``; operands are evaluated left to right.

    Never returns NaN or infinity: such results raise ``ExprError``.
    """
    env = env if env is not None else Environment()
    try:
        result = _eval(tree, env)
    except RecursionError:
        raise ExprError("overflow", "expression nested too deeply") from None
    if math.isnan(result):
        raise ExprError("domain_error", "result is not a number")
    if math.isinf(result):
        raise ExprError("overflow", "result is infinite")
    return result


def evaluate(text: str, env: Environment | Mapping[str, float] | None = None) -> float:
    if env is not None and not isinstance(env, Environment):
        env = Environment(env)
    return eval_expr(parse_expr(text), env)


def free_names(tree: Expr) -> list[str]:
    """Variable names referenced by ``tree`` in first-occurrence order."""
    out: list[str] = []

    def walk(node):
        if isinstance(node, Var):
            if node.name not in out:
                out.append(node.name)
        elif isinstance(node, Neg):
            walk(node.operand)
        elif isinstance(node, BinOp):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Call):
            for a in node.args:
                walk(a)

    walk(tree)
    return out


# --------------------------------------------------------------------------
# formatting

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}
_ATOM = 5


def _prec(node: Expr) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    return _ATOM


def _wrap(node: Expr, parens: bool) -> str:
    s = format_expr(node)
    return f"({s})" if parens else s


def format_expr(tree: Expr) -> str:
    """Canonical infix text with the fewest parentheses that re-parse to ``tree``."""
    if isinstance(tree, Num):
        if not math.isfinite(tree.value) or tree.value < 0:
            raise ValueError(f"number literal must be finite and non-negative: {tree.value!r}")
        return format_number(tree.value)
    if isinstance(tree, Var):
        return tree.name
    if isinstance(tree, Call):
        return f"{tree.name}({', '.join(format_expr(a) for a in tree.args)})"
    if isinstance(tree, Neg):
        return "-" + _wrap(tree.operand, _prec(tree.operand) < _PREC["neg"])
    p = _PREC[tree.op]
    if tree.op == "^":
        left = _wrap(tree.left, _prec(tree.left) <= p)
        right = _wrap(tree.right, _prec(tree.right) < _PREC["neg"])
        return f"{left}^{right}"
    left = _wrap(tree.left, _prec(tree.left) < p)
    right = _wrap(tree.right, _prec(tree.right) <= p)
    if tree.op in "+-":
        return f"{left} {tree.op} {right}"
    return f"{left}{tree.op}{right}"
