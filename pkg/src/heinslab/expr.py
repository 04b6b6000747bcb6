"""Holomorphic expression language.

Expressions are parsed from a small grammar whose every primitive is
holomorphic: complex literals, variables, ``+ - * /``, non-negative integer
powers, unary negation and the entire functions ``exp``, ``sin``, ``cos``.
Anything else (``conj``, ``abs``, ``re``, ``im``, comparisons, branch-cut
functions such as ``log`` and ``sqrt``) is rejected at parse time, so a
validated :class:`Expression` is holomorphic away from the poles introduced
by division.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' uint)?
    atom   := number | number 'i' | ident | ident '(' expr ')' | '(' expr ')'

Unary minus binds looser than ``^`` so ``-z^2`` means ``-(z^2)``.

Parsed trees are compiled to plain Python functions over ``complex`` for
speed; the generated source only ever contains names and literals emitted
by this module.
"""

from __future__ import annotations

import cmath
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, HeinslabError, NumericOverflow

__all__ = [
    "Const", "Var", "BinOp", "Pow", "Neg", "Call", "Node",
    "ParseError", "ExpressionSyntaxError", "HolomorphyError", "UnknownFunction",
    "Expression", "HolomorphicMap",
    "parse_expression", "symbolic_partial", "to_source", "evaluate",
]


# ---------------------------------------------------------------- AST nodes


@dataclass(frozen=True)
class Const:
    value: complex


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Call:
    func: str  # one of FUNCTIONS
    arg: "Node"


Node = Union[Const, Var, BinOp, Pow, Neg, Call]

FUNCTIONS = {"exp": cmath.exp, "sin": cmath.sin, "cos": cmath.cos}
# elementwise versions for evaluating on arrays of points
ARRAY_FUNCTIONS = {"exp": np.exp, "sin": np.sin, "cos": np.cos}

# Names that would smuggle in non-holomorphic behaviour.
_NON_HOLOMORPHIC = {
    "conj", "conjugate", "abs", "re", "im", "real", "imag", "arg", "angle",
    "Re", "Im", "norm", "floor", "ceil", "round", "min", "max", "sign",
}
_BRANCH_CUT = {"log", "ln", "sqrt", "pow", "asin", "acos", "atan", "arcsin", "arccos", "arctan"}


# ------------------------------------------------------------------ errors


class ParseError(HeinslabError, ValueError):
    def __init__(self, msg, pos=None, source=None):
        if pos is not None:
            msg = f"{msg} (at position {pos})"
        super().__init__(msg)
        self.pos = pos
        self.source = source


class ExpressionSyntaxError(ParseError):
    def __init__(self, msg, pos, expected=(), source=None):
        if expected:
            msg = f"{msg}; expected one of {', '.join(sorted(expected))}"
        super().__init__(msg, pos, source)
        self.expected = frozenset(expected)


class HolomorphyError(ParseError):
    """A non-holomorphic construct was found in the source."""


class UnknownFunction(ParseError):
    def __init__(self, name, pos, source=None):
        super().__init__(f"unknown function '{name}'", pos, source)
        self.name = name


# ------------------------------------------------------------------- lexer

_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class _Token:
    kind: str  # num, imag, ident, op, (, ), eof
    text: str
    pos: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        ch = source[pos]
        if ch.isspace():
            pos += 1
            continue
        m = _NUMBER.match(source, pos)
        if m:
            end = m.end()
            if end < n and source[end] == "i" and not (
                end + 1 < n and (source[end + 1].isalnum() or source[end + 1] == "_")
            ):
                tokens.append(_Token("imag", m.group(0), pos))
                pos = end + 1
            else:
                tokens.append(_Token("num", m.group(0), pos))
                pos = end
            continue
        m = _IDENT.match(source, pos)
        if m:
            tokens.append(_Token("ident", m.group(0), pos))
            pos = m.end()
            continue
        if ch in "+-*/^":
            if source.startswith("**", pos):
                raise ExpressionSyntaxError("'**' is not an operator", pos, {"^"}, source)
            tokens.append(_Token("op", ch, pos))
        elif ch in "()":
            tokens.append(_Token(ch, ch, pos))
        elif ch in "|<>=!":
            raise HolomorphyError(f"'{ch}' (modulus or comparison) is not holomorphic", pos, source)
        else:
            raise ExpressionSyntaxError(f"unexpected character {ch!r}", pos, source=source)
        pos += 1
    tokens.append(_Token("eof", "", n))
    return tokens


# ------------------------------------------------------------------ parser


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def _fail(self, expected):
        tok = self.tok
        what = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ExpressionSyntaxError(f"unexpected {what}", tok.pos, expected, self.source)

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "eof":
            self._fail({"+", "-", "*", "/", "^", "end of input"})
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.i += 1
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.i += 1
            tok = self.tok
            if tok.kind != "num" or not tok.text.isdigit():
                if tok.kind in ("num", "imag") or (tok.kind == "op" and tok.text == "-"):
                    raise ExpressionSyntaxError(
                        "exponent must be a non-negative integer literal", tok.pos,
                        {"unsigned integer"}, self.source)
                self._fail({"unsigned integer"})
            self.i += 1
            return Pow(base, int(tok.text))
        return base

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Const(complex(float(tok.text), 0.0))
        if tok.kind == "imag":
            self.i += 1
            return Const(complex(0.0, float(tok.text)))
        if tok.kind == "(":
            self.i += 1
            node = self.expr()
            if self.tok.kind != ")":
                self._fail({")"})
            self.i += 1
            return node
        if tok.kind == "ident":
            name = tok.text
            if name in _NON_HOLOMORPHIC:
                raise HolomorphyError(f"'{name}' is not holomorphic", tok.pos, self.source)
            if name in _BRANCH_CUT:
                raise HolomorphyError(
                    f"'{name}' has a branch cut and is not supported", tok.pos, self.source)
            self.i += 1
            if self.tok.kind == "(":
                if name not in FUNCTIONS:
                    raise UnknownFunction(name, tok.pos, self.source)
                self.i += 1
                arg = self.expr()
                if self.tok.kind != ")":
                    self._fail({")"})
                self.i += 1
                return Call(name, arg)
            if name in FUNCTIONS:
                self._fail({"("})
            return Var(name)
        self._fail({"number", "identifier", "("})


# -------------------------------------------------------------- expression


def _collect_vars(node: Node, out: dict) -> None:
    if isinstance(node, Var):
        out.setdefault(node.name, None)
    elif isinstance(node, BinOp):
        _collect_vars(node.left, out)
        _collect_vars(node.right, out)
    elif isinstance(node, Pow):
        _collect_vars(node.base, out)
    elif isinstance(node, Neg):
        _collect_vars(node.operand, out)
    elif isinstance(node, Call):
        _collect_vars(node.arg, out)


def _validate(node: Node) -> None:
    if isinstance(node, Const):
        if not cmath.isfinite(node.value):
            raise HolomorphyError("non-finite literal")
    elif isinstance(node, Var):
        pass
    elif isinstance(node, BinOp):
        if node.op not in ("+", "-", "*", "/"):
            raise HolomorphyError(f"operator {node.op!r} is not allowed")
        _validate(node.left)
        _validate(node.right)
    elif isinstance(node, Pow):
        if not isinstance(node.exponent, int) or isinstance(node.exponent, bool) or node.exponent < 0:
            raise HolomorphyError("powers must have a non-negative integer exponent")
        _validate(node.base)
    elif isinstance(node, Neg):
        _validate(node.operand)
    elif isinstance(node, Call):
        if node.func not in FUNCTIONS:
            raise UnknownFunction(node.func, None)
        _validate(node.arg)
    else:
        raise HolomorphyError(f"unsupported node {type(node).__name__}")


@dataclass(frozen=True)
class Expression:
    """A validated holomorphic expression tree."""

    ast: Node
    free_vars: tuple[str, ...] = field(default=())

    def __post_init__(self):
        _validate(self.ast)
        found = {}
        _collect_vars(self.ast, found)
        object.__setattr__(self, "free_vars", tuple(found))

    def __str__(self):
        return to_source(self.ast)

    def compile(self, order: Sequence[str]) -> Callable[..., complex]:
        """Compile to a function of the variables listed in ``order``."""
        missing = set(self.free_vars) - set(order)
        if missing:
            raise DimensionMismatch(f"variables {sorted(missing)} not in argument list")
        fn = _compile([self.ast], order)
        return lambda *args: fn(*args)[0]

    def evaluate(self, env: Mapping[str, complex]) -> complex:
        fn = _compile([self.ast], self.free_vars)
        try:
            value = fn(*(complex(env[v]) for v in self.free_vars))[0]
        except KeyError as exc:
            raise DimensionMismatch(f"no value for variable {exc.args[0]!r}") from None
        except (ZeroDivisionError, OverflowError) as exc:
            raise NumericOverflow(str(exc)) from None
        if not cmath.isfinite(value):
            raise NumericOverflow(f"{self} evaluated to {value}")
        return value

    def partial(self, var: str) -> "Expression":
        return symbolic_partial(self, var)


def parse_expression(source: str) -> Expression:
    """Parse ``source`` into a validated :class:`Expression`."""
    return Expression(_Parser(source).parse())


# ---------------------------------------------------------- pretty printing


def _format_real(x: float) -> str:
    s = repr(float(x))
    if s in ("inf", "-inf", "nan"):
        raise NumericOverflow(f"cannot print non-finite literal {s}")
    return s


def _format_const(c: complex) -> str:
    re_, im_ = c.real, c.imag
    if im_ == 0.0:
        s = _format_real(abs(re_))
        return f"(-{s})" if re_ < 0 else s
    if re_ == 0.0:
        s = _format_real(abs(im_)) + "i"
        return f"(-{s})" if im_ < 0 else s
    sign = "-" if im_ < 0 else "+"
    return f"({_format_const(complex(re_, 0.0))}{sign}{_format_real(abs(im_))}i)"


def to_source(node: Node) -> str:
    """Fully parenthesised source text that reparses to an equivalent tree."""
    if isinstance(node, Const):
        return _format_const(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Pow):
        return f"({to_source(node.base)})^{node.exponent}"
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    raise TypeError(node)


# --------------------------------------------------------------- compiling


def _python_source(node: Node, names: Mapping[str, str], consts: list) -> str:
    if isinstance(node, Const):
        consts.append(node.value)
        return f"_k{len(consts) - 1}"
    if isinstance(node, Var):
        return names[node.name]
    if isinstance(node, BinOp):
        return f"({_python_source(node.left, names, consts)} {node.op} {_python_source(node.right, names, consts)})"
    if isinstance(node, Pow):
        if node.exponent == 0:
            consts.append(1 + 0j)
            return f"_k{len(consts) - 1}"
        return f"({_python_source(node.base, names, consts)} ** {node.exponent})"
    if isinstance(node, Neg):
        return f"(-{_python_source(node.operand, names, consts)})"
    if isinstance(node, Call):
        return f"_{node.func}({_python_source(node.arg, names, consts)})"
    raise TypeError(node)


def _compile(nodes: Sequence[Node], order: Sequence[str],
             functions: dict = FUNCTIONS) -> Callable[..., tuple]:
    names = {v: f"_a{i}" for i, v in enumerate(order)}
    consts: list = []
    body = ", ".join(_python_source(n, names, consts) for n in nodes)
    args = ", ".join(names[v] for v in order)
    src = f"def _f({args}):\n    return ({body},)\n"
    namespace = {f"_{k}": fn for k, fn in functions.items()}
    namespace.update({f"_k{i}": c for i, c in enumerate(consts)})
    namespace["__builtins__"] = {}
    exec(compile(src, "<heinslab-expr>", "exec"), namespace)
    return namespace["_f"]


# ------------------------------------------------------------ differentiation

_ZERO = Const(0j)
_ONE = Const(1 + 0j)


def _is_const(node, value=None):
    return isinstance(node, Const) and (value is None or node.value == value)


def _fold(value: complex, fallback: Node) -> Node:
    return Const(value) if cmath.isfinite(value) else fallback


def _add(a, b):
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    if _is_const(a) and _is_const(b):
        return _fold(a.value + b.value, BinOp("+", a, b))
    return BinOp("+", a, b)


def _sub(a, b):
    if _is_const(b, 0):
        return a
    if _is_const(a, 0):
        return _neg(b)
    if _is_const(a) and _is_const(b):
        return _fold(a.value - b.value, BinOp("-", a, b))
    return BinOp("-", a, b)


def _mul(a, b):
    if _is_const(a, 0) or _is_const(b, 0):
        return _ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    if _is_const(a) and _is_const(b):
        return _fold(a.value * b.value, BinOp("*", a, b))
    return BinOp("*", a, b)


def _div(a, b):
    if _is_const(a, 0):
        return _ZERO
    if _is_const(b, 1):
        return a
    return BinOp("/", a, b)


def _neg(a):
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def _pow(a, k):
    if k == 0:
        return _ONE
    if k == 1:
        return a
    return Pow(a, k)


def _diff(node: Node, var: str) -> Node:
    if isinstance(node, Const):
        return _ZERO
    if isinstance(node, Var):
        return _ONE if node.name == var else _ZERO
    if isinstance(node, Neg):
        return _neg(_diff(node.operand, var))
    if isinstance(node, BinOp):
        a, b = node.left, node.right
        da, db = _diff(a, var), _diff(b, var)
        if node.op == "+":
            return _add(da, db)
        if node.op == "-":
            return _sub(da, db)
        if node.op == "*":
            return _add(_mul(da, b), _mul(a, db))
        # quotient rule: (a'b - ab') / b^2
        return _div(_sub(_mul(da, b), _mul(a, db)), _pow(b, 2))
    if isinstance(node, Pow):
        k = node.exponent
        if k == 0:
            return _ZERO
        inner = _diff(node.base, var)
        return _mul(_mul(Const(complex(k)), _pow(node.base, k - 1)), inner)
    if isinstance(node, Call):
        inner = _diff(node.arg, var)
        if _is_const(inner, 0):
            return _ZERO
        if node.func == "exp":
            outer = node
        elif node.func == "sin":
            outer = Call("cos", node.arg)
        else:
            outer = _neg(Call("sin", node.arg))
        return _mul(outer, inner)
    raise TypeError(node)


def symbolic_partial(expr: Expression, var: str) -> Expression:
    """Exact holomorphic partial derivative of ``expr`` with respect to ``var``."""
    return Expression(_diff(expr.ast, var))


def _substitute(node: Node, values: Mapping[str, complex]) -> Node:
    if isinstance(node, Var):
        return Const(complex(values[node.name])) if node.name in values else node
    if isinstance(node, BinOp):
        return BinOp(node.op, _substitute(node.left, values), _substitute(node.right, values))
    if isinstance(node, Pow):
        return Pow(_substitute(node.base, values), node.exponent)
    if isinstance(node, Neg):
        return Neg(_substitute(node.operand, values))
    if isinstance(node, Call):
        return Call(node.func, _substitute(node.arg, values))
    return node


# ------------------------------------------------------------ holomorphic map


def _as_expression(e) -> Expression:
    if isinstance(e, Expression):
        return e
    if isinstance(e, str):
        return parse_expression(e)
    raise TypeError(f"cannot build an expression from {type(e).__name__}")


@dataclass(frozen=True)
class HolomorphicMap:
    """A map ``(z, y) -> f_y(z)`` from C^n x C^m to C^n given componentwise.

    ``space_vars`` name the n coordinates of z, ``param_vars`` the m
    coordinates of y (possibly none).
    """

    components: tuple[Expression, ...]
    space_vars: tuple[str, ...]
    param_vars: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(_as_expression(c) for c in self.components))
        object.__setattr__(self, "space_vars", tuple(self.space_vars))
        object.__setattr__(self, "param_vars", tuple(self.param_vars))
        if len(self.components) != len(self.space_vars):
            raise DimensionMismatch(
                f"{len(self.components)} components for {len(self.space_vars)} space variables")
        if not self.space_vars:
            raise DimensionMismatch("a map needs at least one space variable")
        all_vars = self.space_vars + self.param_vars
        if len(set(all_vars)) != len(all_vars):
            raise ValueError(f"duplicate variable names in {all_vars}")
        for name in all_vars:
            if name in FUNCTIONS or name in _NON_HOLOMORPHIC or name in _BRANCH_CUT:
                raise ValueError(f"{name!r} is reserved and cannot name a variable")
        declared = set(all_vars)
        for comp in self.components:
            extra = set(comp.free_vars) - declared
            if extra:
                raise DimensionMismatch(
                    f"component {comp} uses undeclared variables {sorted(extra)}")

    @classmethod
    def from_strings(cls, components: Iterable[str], space_vars=None, param_vars=()):
        comps = [parse_expression(c) if isinstance(c, str) else c for c in components]
        if space_vars is None:
            space_vars = [f"z{i + 1}" for i in range(len(comps))]
        return cls(tuple(comps), tuple(space_vars), tuple(param_vars))

    @property
    def n(self) -> int:
        return len(self.space_vars)

    @property
    def m(self) -> int:
        return len(self.param_vars)

    @property
    def variables(self) -> tuple[str, ...]:
        return self.space_vars + self.param_vars

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.components) + ")"

    # compiled kernels; cached on first use
    @cached_property
    def _fn(self):
        return _compile([c.ast for c in self.components], self.variables)

    @cached_property
    def _jac_space_fn(self):
        nodes = [symbolic_partial(c, v).ast for c in self.components for v in self.space_vars]
        return _compile(nodes, self.variables)

    @cached_property
    def _jac_space_array_fn(self):
        nodes = [symbolic_partial(c, v).ast for c in self.components for v in self.space_vars]
        return _compile(nodes, self.variables, ARRAY_FUNCTIONS)

    @cached_property
    def _jac_param_fn(self):
        if not self.param_vars:
            return lambda *args: ()
        nodes = [symbolic_partial(c, v).ast for c in self.components for v in self.param_vars]
        return _compile(nodes, self.variables)

    def _check_shapes(self, z, y):
        if len(z) != self.n:
            raise DimensionMismatch(f"expected {self.n} space coordinates, got {len(z)}")
        if len(y) != self.m:
            raise DimensionMismatch(f"expected {self.m} parameters, got {len(y)}")

    def call(self, z: Sequence[complex], y: Sequence[complex] = ()) -> tuple:
        """Fast unchecked evaluation returning a tuple of complex.

        Division by zero and overflow surface as :class:`NumericOverflow`;
        non-finite results are not screened here.
        """
        try:
            return self._fn(*z, *y)
        except (ZeroDivisionError, OverflowError) as exc:
            raise NumericOverflow(f"{self} failed at z={tuple(z)}, y={tuple(y)}: {exc}") from None

    def evaluate(self, z, y=()) -> np.ndarray:
        z = [complex(v) for v in np.atleast_1d(np.asarray(z, dtype=complex))]
        y = [complex(v) for v in np.atleast_1d(np.asarray(y, dtype=complex))] if len(y) else []
        self._check_shapes(z, y)
        out = np.array(self.call(z, y), dtype=complex)
        if not np.all(np.isfinite(out)):
            raise NumericOverflow(f"{self} is not finite at z={z}, y={y}")
        return out

    def jacobian_values(self, z, y=(), wrt: str = "space") -> np.ndarray:
        z = [complex(v) for v in z]
        y = [complex(v) for v in y]
        self._check_shapes(z, y)
        if wrt == "space":
            fn, cols = self._jac_space_fn, self.n
        elif wrt == "params":
            fn, cols = self._jac_param_fn, self.m
        else:
            raise ValueError(f"wrt must be 'space' or 'params', not {wrt!r}")
        try:
            flat = fn(*z, *y)
        except (ZeroDivisionError, OverflowError) as exc:
            raise NumericOverflow(str(exc)) from None
        out = np.array(flat, dtype=complex).reshape(self.n, cols)
        if not np.all(np.isfinite(out)):
            raise NumericOverflow(f"Jacobian of {self} is not finite at z={z}, y={y}")
        return out

    def jacobian_space_batch(self, zs, y=()) -> np.ndarray:
        """Space Jacobians at every row of ``zs`` (shape ``(k, n)``), as ``(k, n, n)``."""
        zs = np.asarray(zs, dtype=complex).reshape(-1, self.n)
        y = [complex(v) for v in y]
        self._check_shapes(zs[0] if len(zs) else [0j] * self.n, y)
        k = len(zs)
        with np.errstate(all="ignore"):
            flat = self._jac_space_array_fn(*zs.T, *y)
        out = np.empty((self.n * self.n, k), dtype=complex)
        for i, entry in enumerate(flat):
            out[i] = entry
        if not np.all(np.isfinite(out)):
            raise NumericOverflow(f"Jacobian of {self} is not finite on the given points")
        return out.T.reshape(k, self.n, self.n)

    def specialize(self, y: Sequence[complex]) -> "HolomorphicMap":
        """The map ``f_y`` with the parameters frozen to the values ``y``."""
        if len(y) != self.m:
            raise DimensionMismatch(f"expected {self.m} parameters, got {len(y)}")
        values = dict(zip(self.param_vars, (complex(v) for v in y)))
        comps = tuple(Expression(_substitute(c.ast, values)) for c in self.components)
        return HolomorphicMap(comps, self.space_vars, ())

    def __sub__(self, other: "HolomorphicMap") -> "HolomorphicMap":
        if (other.space_vars, other.param_vars) != (self.space_vars, self.param_vars):
            raise DimensionMismatch("maps must share their variables to be subtracted")
        comps = tuple(Expression(BinOp("-", a.ast, b.ast))
                      for a, b in zip(self.components, other.components))
        return HolomorphicMap(comps, self.space_vars, self.param_vars)


def evaluate(map: HolomorphicMap, z, y=()) -> np.ndarray:
    """Componentwise evaluation of ``map`` at ``(z, y)``."""
    return map.evaluate(z, y)
