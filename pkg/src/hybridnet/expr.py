"""Scalar expression language used by scenario files.

Grammar, lowest binding first::

    expr    := expr "or" expr | expr "and" expr | "not" expr
             | sum (("<" | "<=" | "=" | "==" | ">=" | ">") sum)?
    sum     := sum ("+" | "-") term | term
    term    := term ("*" | "/") unary | unary
    unary   := ("-" | "+") unary | power
    power   := atom ("^" unary)?              right associative
    atom    := NUMBER | STRING | NAME | NAME "(" args ")" | "(" expr ("," expr)* ")"

Names are coordinates ``x0, x1, ...`` (and ``y0, ...`` for the target side
of a jump relation), parameters, node pattern variables, ``true``,
``false``, ``pi`` and ``inf``.  Functions: ``sqrt log exp sin cos abs sign
min max pow piecewise``.  A parenthesised list with commas is a tuple, used
for product nodes.

Comparisons take a tolerance at evaluation time: ``a <= b`` holds when
``a <= b + tol`` and ``a = b`` when ``|a - b| <= tol``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence

REAL, BOOL, NODE = "real", "bool", "node"

FUNCTIONS: dict[str, tuple[int, int]] = {
    "sqrt": (1, 1),
    "log": (1, 1),
    "exp": (1, 1),
    "sin": (1, 1),
    "cos": (1, 1),
    "abs": (1, 1),
    "sign": (1, 1),
    "floor": (1, 1),
    "pow": (2, 2),
    "min": (1, 64),
    "max": (1, 64),
    "piecewise": (3, 3),
}
CONSTANTS = {"pi": math.pi, "inf": math.inf}
KEYWORDS = {"and", "or", "not", "true", "false"}
COMPARISONS = {"<", "<=", "=", "==", ">=", ">"}


class ExprError(ValueError):
    """Syntax, type or evaluation error with a 1-based line and column."""

    def __init__(self, message: str, line: int = 1, col: int = 1) -> None:
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


# --------------------------------------------------------------------------- tokens


@dataclass(frozen=True)
class Token:
    kind: str  # num, name, str, op, end
    text: str
    line: int
    col: int


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<str>"[^"\n]*")
  | (?P<op><=|>=|==|->|[-+*/^()<>=,:\[\]])
    """,
    re.VERBOSE,
)


def tokenize(text: str, line: int = 1, col: int = 1) -> list[Token]:
    """Split one line of text; ``line`` and ``col`` locate its first character."""
    out: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprError(f"unexpected character {text[pos]!r}", line, col + pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), line, col + pos))
        pos = m.end()
    out.append(Token("end", "", line, col + len(text)))
    return out


# --------------------------------------------------------------------------- syntax tree


@dataclass(frozen=True)
class Expr:
    line: int = field(default=1, compare=False, kw_only=True)
    col: int = field(default=1, compare=False, kw_only=True)

    def __str__(self) -> str:
        return unparse(self)


@dataclass(frozen=True)
class Num(Expr):
    text: str


@dataclass(frozen=True)
class Name(Expr):
    name: str


@dataclass(frozen=True)
class Str(Expr):
    value: str


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # "-", "+", "not"
    operand: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class TupleExpr(Expr):
    items: tuple[Expr, ...]


_INFIX = {
    "or": 10,
    "and": 20,
    **{op: 40 for op in COMPARISONS},
    "+": 50,
    "-": 50,
    "*": 60,
    "/": 60,
    "^": 80,
}
_UNARY_BP = 70
_NOT_BP = 30


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _INFIX[e.op]
    if isinstance(e, Unary):
        return _NOT_BP if e.op == "not" else _UNARY_BP
    return 100


# --------------------------------------------------------------------------- parser


class Parser:
    """Pratt parser over a token list; stops at the first token it cannot use."""

    def __init__(self, tokens: Sequence[Token]) -> None:
        self.tokens = list(tokens)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "end":
            self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "name") and t.text == text

    def accept(self, text: str) -> "Token | None":
        return self.advance() if self.at(text) else None

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.advance()

    def error(self, message: str, tok: "Token | None" = None) -> None:
        t = tok or self.tok
        found = "end of line" if t.kind == "end" else repr(t.text)
        raise ExprError(f"{message}, found {found}", t.line, t.col)

    def expect_end(self) -> None:
        if self.tok.kind != "end":
            self.error("unexpected trailing input")

    def expression(self, bp: int = 0) -> Expr:
        t = self.advance()
        left = self._prefix(t)
        while True:
            t = self.tok
            op = t.text if t.kind in ("op", "name") else None
            if op not in _INFIX:
                break
            lbp = _INFIX[op]
            if lbp <= bp:
                break
            self.advance()
            if op == "^":
                right = self.expression(_UNARY_BP - 1)  # right assoc, allows x^-1
            elif op in COMPARISONS:
                right = self.expression(lbp)
                if self.tok.text in COMPARISONS and self.tok.kind == "op":
                    self.error("comparisons do not chain")
            else:
                right = self.expression(lbp)
            left = Binary("==" if op == "=" else op, left, right, line=t.line, col=t.col)
        return left

    def _prefix(self, t: Token) -> Expr:
        pos = dict(line=t.line, col=t.col)
        if t.kind == "num":
            return Num(t.text, **pos)
        if t.kind == "str":
            return Str(t.text[1:-1], **pos)
        if t.kind == "name":
            if t.text == "not":
                return Unary("not", self.expression(_NOT_BP), **pos)
            if t.text in ("and", "or"):
                self.error("expected an operand", t)
            if self.at("(") and t.text in FUNCTIONS:
                self.advance()
                args = self._args(")")
                return Call(t.text, tuple(args), **pos)
            return Name(t.text, **pos)
        if t.kind == "op" and t.text in ("-", "+"):
            return Unary(t.text, self.expression(_UNARY_BP), **pos)
        if t.kind == "op" and t.text == "(":
            items = self._args(")")
            if len(items) == 1:
                return items[0]
            return TupleExpr(tuple(items), **pos)
        self.error("expected an expression", t)
        raise AssertionError  # unreachable

    def _args(self, close: str) -> list[Expr]:
        items: list[Expr] = []
        if self.accept(close):
            return items
        while True:
            items.append(self.expression())
            if self.accept(close):
                return items
            self.expect(",")

    def expression_list(self) -> list[Expr]:
        """Comma-separated expressions up to a token that cannot continue them."""
        items = [self.expression()]
        while self.accept(","):
            items.append(self.expression())
        return items


def parse(text: str, line: int = 1, col: int = 1) -> Expr:
    p = Parser(tokenize(text, line, col))
    e = p.expression()
    p.expect_end()
    return e


def parse_list(text: str, line: int = 1, col: int = 1) -> list[Expr]:
    p = Parser(tokenize(text, line, col))
    if p.tok.kind == "end":
        return []
    items = p.expression_list()
    p.expect_end()
    return items


# --------------------------------------------------------------------------- printing


def unparse(e: Expr) -> str:
    """Canonical text with the fewest parentheses that preserve the tree."""
    if isinstance(e, Num):
        return e.text
    if isinstance(e, Name):
        return e.name
    if isinstance(e, Str):
        return f'"{e.value}"'
    if isinstance(e, Call):
        return f"{e.fn}(" + ", ".join(unparse(a) for a in e.args) + ")"
    if isinstance(e, TupleExpr):
        return "(" + ", ".join(unparse(a) for a in e.items) + ")"
    if isinstance(e, Unary):
        inner = unparse(e.operand)
        if _prec(e.operand) < _prec(e):
            inner = f"({inner})"
        return f"not {inner}" if e.op == "not" else f"{e.op}{inner}"
    if isinstance(e, Binary):
        p = _INFIX[e.op]
        left, right = unparse(e.left), unparse(e.right)
        lp, rp = _prec(e.left), _prec(e.right)
        if e.op == "^":
            left_paren, right_paren = lp <= p, rp < _UNARY_BP
        elif e.op in COMPARISONS:
            left_paren, right_paren = lp <= p, rp <= p
        else:
            left_paren, right_paren = lp < p, rp <= p
        if left_paren:
            left = f"({left})"
        if right_paren:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression: {e!r}")


# --------------------------------------------------------------------------- types


@dataclass(frozen=True)
class Scope:
    """Names visible to an expression.

    ``coords`` maps a coordinate prefix (``"x"``, ``"y"``) to its dimension;
    ``values`` holds constants (parameters, pattern variables).
    """

    coords: Mapping[str, int] = field(default_factory=dict)
    values: Mapping[str, Any] = field(default_factory=dict)

    def with_values(self, **values: Any) -> "Scope":
        return Scope(self.coords, {**self.values, **values})

    def lookup(self, name: str) -> "tuple[str, Any] | None":
        if name in self.values:
            return ("value", self.values[name])
        m = re.fullmatch(r"([a-z])(\d+)", name)
        if m and m.group(1) in self.coords:
            k = int(m.group(2))
            if k < self.coords[m.group(1)]:
                return ("coord", (m.group(1), k))
        if name in CONSTANTS:
            return ("value", CONSTANTS[name])
        if name in ("true", "false"):
            return ("value", name == "true")
        return None


def _value_type(v: Any) -> str:
    if isinstance(v, bool):
        return BOOL
    if isinstance(v, (int, float, Fraction)):
        return REAL
    return NODE


def check_type(e: Expr, scope: Scope) -> str:
    """Type of ``e`` in ``scope``.

    Raises:
        ExprError: with the position of the offending sub-expression.
    """
    def fail(msg: str, at: Expr = e) -> None:
        raise ExprError(msg, at.line, at.col)

    if isinstance(e, Num):
        return REAL
    if isinstance(e, Str):
        return NODE
    if isinstance(e, Name):
        hit = scope.lookup(e.name)
        if hit is None:
            fail(f"unknown identifier {e.name!r}")
        return REAL if hit[0] == "coord" else _value_type(hit[1])
    if isinstance(e, TupleExpr):
        for a in e.items:
            if check_type(a, scope) == BOOL:
                fail("tuple entries must be reals or nodes", a)
        return NODE
    if isinstance(e, Unary):
        t = check_type(e.operand, scope)
        want = BOOL if e.op == "not" else REAL
        if t != want:
            fail(f"operand of {e.op!r} must be {want}", e.operand)
        return want
    if isinstance(e, Binary):
        lt, rt = check_type(e.left, scope), check_type(e.right, scope)
        if e.op in ("and", "or"):
            for side, t in ((e.left, lt), (e.right, rt)):
                if t != BOOL:
                    fail(f"operand of {e.op!r} must be bool", side)
            return BOOL
        for side, t in ((e.left, lt), (e.right, rt)):
            if t != REAL:
                fail(f"operand of {e.op!r} must be real", side)
        return BOOL if e.op in COMPARISONS else REAL
    if isinstance(e, Call):
        lo, hi = FUNCTIONS[e.fn]
        if not lo <= len(e.args) <= hi:
            fail(f"{e.fn} takes {lo if lo == hi else f'{lo} to {hi}'} arguments, got {len(e.args)}")
        types = [check_type(a, scope) for a in e.args]
        if e.fn == "piecewise":
            if types[0] != BOOL:
                fail("piecewise condition must be bool", e.args[0])
            if types[1] != types[2] or types[1] == NODE:
                fail("piecewise branches must both be real or both be bool", e.args[1])
            return types[1]
        for a, t in zip(e.args, types):
            if t != REAL:
                fail(f"argument of {e.fn} must be real", a)
        return REAL
    raise TypeError(f"not an expression: {e!r}")


# --------------------------------------------------------------------------- evaluation


class EvalError(ExprError):
    pass


def _num(text: str, exact: bool) -> Any:
    if exact:
        return Fraction(text)
    return float(text)


def _is_exact(v: Any) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


def _as_float(v: Any) -> float:
    return float(v)


def _pow(a: Any, b: Any) -> Any:
    if _is_exact(a) and _is_exact(b) and Fraction(b).denominator == 1:
        k = int(b)
        if a == 0 and k < 0:
            raise ZeroDivisionError
        return Fraction(a) ** k
    fa, fb = float(a), float(b)
    if fa < 0 and not fb.is_integer():
        raise ValueError("negative base with fractional exponent")
    if fa == 0 and fb < 0:
        raise ZeroDivisionError
    return fa**fb


def _compare(op: str, a: Any, b: Any, tol: float) -> bool:
    if op == "<":
        return a < b + tol if tol > 0 else a < b
    if op == "<=":
        return a <= b + tol
    if op == ">":
        return a > b - tol if tol > 0 else a > b
    if op == ">=":
        return a >= b - tol
    return abs(a - b) <= tol


Compiled = Callable[[Mapping[str, Sequence[float]], float], Any]


def compile_expr(e: Expr, scope: Scope, exact: bool = False) -> Compiled:
    """Closure ``fn(coords, tol)`` evaluating ``e``.

    ``coords`` maps each coordinate prefix to a vector.  With ``exact``,
    numeric literals are fractions and rational arithmetic stays exact;
    transcendental functions still return floats.

    Raises:
        ExprError: for unknown names or type errors (at compile time).
        EvalError: at call time, for division by zero and domain errors.
    """
    check_type(e, scope)
    return _compile(e, scope, exact)


def _guard(fn: Callable[..., Any], e: Expr, what: str) -> Callable[..., Any]:
    def run(*args: Any) -> Any:
        try:
            return fn(*args)
        except ZeroDivisionError:
            raise EvalError("division by zero", e.line, e.col) from None
        except (ValueError, OverflowError) as exc:
            raise EvalError(f"{what} outside its domain ({exc})", e.line, e.col) from None

    return run


def _log(a: Any) -> float:
    if a <= 0:
        raise ValueError("log of a non-positive number")
    return math.log(a)


def _sqrt(a: Any) -> Any:
    if a < 0:
        raise ValueError("sqrt of a negative number")
    if isinstance(a, Fraction):
        n, d = math.isqrt(a.numerator), math.isqrt(a.denominator)
        if n * n == a.numerator and d * d == a.denominator:
            return Fraction(n, d)
    return math.sqrt(a)


def _sign(a: Any) -> Any:
    return (a > 0) - (a < 0)


_UNARY_FNS: dict[str, Callable[[Any], Any]] = {
    "sqrt": _sqrt,
    "log": _log,
    "exp": lambda a: math.exp(a),
    "sin": lambda a: math.sin(a),
    "cos": lambda a: math.cos(a),
    "abs": abs,
    "sign": _sign,
    "floor": lambda a: math.floor(a) if isinstance(a, Fraction) else float(math.floor(a)),
}


def _compile(e: Expr, scope: Scope, exact: bool) -> Compiled:
    if isinstance(e, Num):
        v = _num(e.text, exact)
        return lambda c, tol: v
    if isinstance(e, Str):
        s = e.value
        return lambda c, tol: s
    if isinstance(e, Name):
        kind, ref = scope.lookup(e.name)  # type: ignore[misc]
        if kind == "value":
            v = Fraction(ref) if exact and isinstance(ref, int) and not isinstance(ref, bool) else ref
            return lambda c, tol: v
        prefix, k = ref
        return lambda c, tol: c[prefix][k]
    if isinstance(e, TupleExpr):
        parts = [_compile(a, scope, exact) for a in e.items]
        return lambda c, tol: tuple(_node_atom(p(c, tol)) for p in parts)
    if isinstance(e, Unary):
        f = _compile(e.operand, scope, exact)
        if e.op == "not":
            return lambda c, tol: not f(c, tol)
        if e.op == "-":
            return lambda c, tol: -f(c, tol)
        return f
    if isinstance(e, Binary):
        a, b = _compile(e.left, scope, exact), _compile(e.right, scope, exact)
        op = e.op
        if op == "and":
            return lambda c, tol: a(c, tol) and b(c, tol)
        if op == "or":
            return lambda c, tol: a(c, tol) or b(c, tol)
        if op in COMPARISONS:
            return lambda c, tol: _compare(op, a(c, tol), b(c, tol), tol)
        if op == "+":
            return lambda c, tol: a(c, tol) + b(c, tol)
        if op == "-":
            return lambda c, tol: a(c, tol) - b(c, tol)
        if op == "*":
            return lambda c, tol: a(c, tol) * b(c, tol)
        if op == "/":
            div = _guard(lambda x, y: x / y, e, "division")
            return lambda c, tol: div(a(c, tol), b(c, tol))
        if op == "^":
            pw = _guard(_pow, e, "power")
            return lambda c, tol: pw(a(c, tol), b(c, tol))
    if isinstance(e, Call):
        args = [_compile(x, scope, exact) for x in e.args]
        if e.fn == "piecewise":
            cond, then, other = args
            return lambda c, tol: then(c, tol) if cond(c, tol) else other(c, tol)
        if e.fn in ("min", "max"):
            agg = min if e.fn == "min" else max
            return lambda c, tol: agg(f(c, tol) for f in args)
        if e.fn == "pow":
            pw = _guard(_pow, e, "pow")
            return lambda c, tol: pw(args[0](c, tol), args[1](c, tol))
        fn = _guard(_UNARY_FNS[e.fn], e, e.fn)
        (arg,) = args
        return lambda c, tol: fn(arg(c, tol))
    raise TypeError(f"not an expression: {e!r}")


def _node_atom(v: Any) -> Any:
    """Reals that are whole numbers become ints so they can name nodes."""
    if isinstance(v, bool) or isinstance(v, (str, tuple)):
        return v
    if isinstance(v, Fraction) and v.denominator == 1:
        return int(v)
    if isinstance(v, float) and v.is_integer():
        return int(v)
    return v


def node_value(e: Expr, scope: Scope) -> Any:
    """Evaluate a node expression: a string, an integer or a tuple of nodes."""
    if check_type(e, scope) == BOOL:
        raise ExprError("a node cannot be a boolean", e.line, e.col)
    v = _node_atom(_compile(e, scope, exact=True)({}, 0.0))
    if isinstance(v, (Fraction, float)):
        raise ExprError(f"node value {v} is not an integer", e.line, e.col)
    return v


def evaluate(e: Expr, scope: Scope = Scope(), coords: "Mapping[str, Sequence[float]] | None" = None, tol: float = 0.0, exact: bool = False) -> Any:
    return compile_expr(e, scope, exact)(coords or {}, tol)


# --------------------------------------------------------------------------- patterns


def match_pattern(pattern: Expr, node: Any, bindings: "dict[str, Any] | None" = None) -> "dict[str, Any] | None":
    """Match a node against a pattern of names, literals and tuples.

    Names bind (``_`` matches anything), numbers and strings must be equal,
    tuples match tuples of the same length.  Returns the bindings or ``None``.
    """
    out = dict(bindings or {})
    if isinstance(pattern, Name):
        if pattern.name == "_":
            return out
        if pattern.name in out and out[pattern.name] != node:
            return None
        out[pattern.name] = node
        return out
    if isinstance(pattern, Num):
        v = Fraction(pattern.text)
        return out if not isinstance(node, (str, tuple, bool)) and Fraction(node) == v else None
    if isinstance(pattern, Str):
        return out if node == pattern.value else None
    if isinstance(pattern, Unary) and pattern.op == "-" and isinstance(pattern.operand, Num):
        v = -Fraction(pattern.operand.text)
        return out if not isinstance(node, (str, tuple, bool)) and Fraction(node) == v else None
    if isinstance(pattern, TupleExpr):
        if not isinstance(node, tuple) or len(node) != len(pattern.items):
            return None
        for p, n in zip(pattern.items, node):
            out = match_pattern(p, n, out)
            if out is None:
                return None
        return out
    raise ExprError("patterns may only contain names, numbers, strings and tuples", pattern.line, pattern.col)


def pattern_names(pattern: Expr) -> list[str]:
    if isinstance(pattern, Name):
        return [] if pattern.name == "_" else [pattern.name]
    if isinstance(pattern, TupleExpr):
        return [n for p in pattern.items for n in pattern_names(p)]
    return []


# --------------------------------------------------------------------------- derivatives


def _n(v: str) -> Num:
    return Num(v)


def _simp_add(a: Expr, b: Expr) -> Expr:
    if a == _n("0"):
        return b
    if b == _n("0"):
        return a
    return Binary("+", a, b)


def _simp_sub(a: Expr, b: Expr) -> Expr:
    if b == _n("0"):
        return a
    if a == _n("0"):
        return Unary("-", b)
    return Binary("-", a, b)


def _simp_mul(a: Expr, b: Expr) -> Expr:
    if a == _n("0") or b == _n("0"):
        return _n("0")
    if a == _n("1"):
        return b
    if b == _n("1"):
        return a
    return Binary("*", a, b)


def _simp_div(a: Expr, b: Expr) -> Expr:
    if a == _n("0"):
        return _n("0")
    if b == _n("1"):
        return a
    return Binary("/", a, b)


def _depends(e: Expr, var: str) -> bool:
    if isinstance(e, Name):
        return e.name == var
    if isinstance(e, Unary):
        return _depends(e.operand, var)
    if isinstance(e, Binary):
        return _depends(e.left, var) or _depends(e.right, var)
    if isinstance(e, Call):
        return any(_depends(a, var) for a in e.args)
    if isinstance(e, TupleExpr):
        return any(_depends(a, var) for a in e.items)
    return False


def derivative(e: Expr, var: str) -> Expr:
    """Symbolic partial derivative of a real expression.

    ``abs`` and ``sign`` use their derivatives away from zero and
    ``min``/``max`` that of the active argument.  Comparisons are treated as
    locally constant.
    """
    if not _depends(e, var):
        return _n("0")
    if isinstance(e, Name):
        return _n("1")
    if isinstance(e, Unary):
        d = derivative(e.operand, var)
        return d if e.op == "+" else _simp_sub(_n("0"), d)
    if isinstance(e, Binary):
        a, b = e.left, e.right
        da, db = derivative(a, var), derivative(b, var)
        if e.op == "+":
            return _simp_add(da, db)
        if e.op == "-":
            return _simp_sub(da, db)
        if e.op == "*":
            return _simp_add(_simp_mul(da, b), _simp_mul(a, db))
        if e.op == "/":
            return _simp_div(_simp_sub(_simp_mul(da, b), _simp_mul(a, db)), Binary("^", b, _n("2")))
        if e.op == "^":
            if not _depends(b, var):
                return _simp_mul(_simp_mul(b, Binary("^", a, Binary("-", b, _n("1")))), da)
            # d(a^b) = a^b * (b' log a + b a' / a)
            return _simp_mul(
                e, _simp_add(_simp_mul(db, Call("log", (a,))), _simp_div(_simp_mul(b, da), a))
            )
    if isinstance(e, Call):
        args = e.args
        if e.fn == "piecewise":
            return Call("piecewise", (args[0], derivative(args[1], var), derivative(args[2], var)))
        if e.fn in ("min", "max"):
            if len(args) == 1:
                return derivative(args[0], var)
            head, rest = args[0], Call(e.fn, args[1:])
            cmp = "<=" if e.fn == "min" else ">="
            return Call("piecewise", (Binary(cmp, head, rest), derivative(head, var), derivative(rest, var)))
        if e.fn == "pow":
            return derivative(Binary("^", args[0], args[1]), var)
        (a,) = args
        da = derivative(a, var)
        outer = {
            "sqrt": lambda: _simp_div(_n("1"), Binary("*", _n("2"), Call("sqrt", (a,)))),
            "log": lambda: _simp_div(_n("1"), a),
            "exp": lambda: Call("exp", (a,)),
            "sin": lambda: Call("cos", (a,)),
            "cos": lambda: Unary("-", Call("sin", (a,))),
            "abs": lambda: Call("sign", (a,)),
            "sign": lambda: _n("0"),
            "floor": lambda: _n("0"),
        }[e.fn]()
        return _simp_mul(outer, da)
    raise ExprError("cannot differentiate this expression", e.line, e.col)


__all__ = [
    "BOOL",
    "Binary",
    "Call",
    "EvalError",
    "Expr",
    "ExprError",
    "NODE",
    "Name",
    "Num",
    "Parser",
    "REAL",
    "Scope",
    "Str",
    "Token",
    "TupleExpr",
    "Unary",
    "check_type",
    "compile_expr",
    "derivative",
    "evaluate",
    "match_pattern",
    "node_value",
    "parse",
    "parse_list",
    "pattern_names",
    "tokenize",
    "unparse",
]
