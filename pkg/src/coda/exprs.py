"""Expression language for guards, actions, invariants and gluing predicates.

First order, finite and side-effect free: booleans, bounded integers,
naturals and enumerated carrier-set elements.  Values at runtime are plain
Python ``bool``, ``int`` and ``str`` (carrier element name).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from .diagnostics import CodaError, KernelError

DEFAULT_INT_BOUND = 2**31 - 1


@dataclass(frozen=True)
class ValueType:
    kind: str  # "bool" | "nat" | "int" | "set"
    set_name: Optional[str] = None

    def __str__(self):
        if self.kind == "set":
            return self.set_name
        return self.kind.upper()

    @property
    def numeric(self):
        return self.kind in ("nat", "int")


BOOL = ValueType("bool")
NAT = ValueType("nat")
INT = ValueType("int")


def set_ref(name: str) -> ValueType:
    return ValueType("set", name)


# ---------------------------------------------------------------------------
# AST


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Lit(Expr):
    value: object  # bool | int | str (carrier element)


@dataclass(frozen=True)
class Name(Expr):
    """Possibly-dotted reference: variable, constant, carrier element,
    parameter, or a qualified ``Component.var`` / ``abs.Component.var``."""

    parts: Tuple[str, ...]

    @property
    def text(self):
        return ".".join(self.parts)


@dataclass(frozen=True)
class StateTest(Expr):
    """``in(S)`` — the active configuration includes state S.
    ``side`` is "" for the local model, "abs" inside gluing predicates."""

    state: str
    side: str = ""


@dataclass(frozen=True)
class Recv(Expr):
    """Most recent value available on a connector, never from the future."""

    connector: str


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # "not" | "neg"
    operand: Expr


@dataclass(frozen=True)
class Bin(Expr):
    op: str  # => or and = != < <= > >= + - *
    left: Expr
    right: Expr


@dataclass(frozen=True)
class MinMax(Expr):
    op: str  # "min" | "max"
    args: Tuple[Expr, ...]


# ---------------------------------------------------------------------------
# Typing


class ExprTypeError(CodaError):
    def __init__(self, message, path="expr"):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.reason = message


class Scope:
    """Name resolution context for typing one expression.

    Lookups go parameter > component variable > constant > carrier element.
    ``connectors`` only lists connectors on which recv() is legal here.
    """

    def __init__(self, vars=None, consts=None, elements=None, states=None,
                 abs_states=None, connectors=None, params=None):
        self.vars = dict(vars or {})        # dotted name -> ValueType
        self.consts = dict(consts or {})    # name -> ValueType
        self.elements = dict(elements or {})  # element -> carrier set name
        self.states = set(states or ())
        self.abs_states = set(abs_states or ())
        self.connectors = dict(connectors or {})  # name -> ValueType
        self.params = dict(params or {})


def type_of(expr: Expr, scope: Scope, path="expr") -> ValueType:
    """Deterministic type assignment; raises ExprTypeError with the
    offending sub-expression path."""
    if isinstance(expr, Lit):
        if isinstance(expr.value, bool):
            return BOOL
        if isinstance(expr.value, int):
            return NAT if expr.value >= 0 else INT
        if isinstance(expr.value, str):
            carrier = scope.elements.get(expr.value)
            if carrier is None:
                raise ExprTypeError(f"unknown element literal '{expr.value}'", path)
            return set_ref(carrier)
        raise ExprTypeError(f"unsupported literal {expr.value!r}", path)

    if isinstance(expr, Name):
        text = expr.text
        if len(expr.parts) == 1:
            n = expr.parts[0]
            if n in scope.params:
                return scope.params[n]
            if n in scope.vars:
                return scope.vars[n]
            if n in scope.consts:
                return scope.consts[n]
            if n in scope.elements:
                return set_ref(scope.elements[n])
        elif text in scope.vars:
            return scope.vars[text]
        raise ExprTypeError(f"unresolved name '{text}'", path)

    if isinstance(expr, StateTest):
        pool = scope.abs_states if expr.side == "abs" else scope.states
        if expr.state not in pool:
            raise ExprTypeError(f"unknown state '{expr.state}'"
                                + (" on abstract side" if expr.side else ""), path)
        return BOOL

    if isinstance(expr, Recv):
        ty = scope.connectors.get(expr.connector)
        if ty is None:
            raise ExprTypeError(
                f"recv({expr.connector}) not legal here (connector unknown or "
                "not targeting this component)", path)
        return ty

    if isinstance(expr, Unary):
        ty = type_of(expr.operand, scope, path + f".{expr.op}")
        if expr.op == "not":
            if ty != BOOL:
                raise ExprTypeError(f"'not' needs BOOL, got {ty}", path)
            return BOOL
        if ty.numeric:
            return INT
        raise ExprTypeError(f"unary '-' needs a number, got {ty}", path)

    if isinstance(expr, Bin):
        lt = type_of(expr.left, scope, path + ".lhs")
        rt = type_of(expr.right, scope, path + ".rhs")
        op = expr.op
        if op in ("and", "or", "=>"):
            if lt != BOOL or rt != BOOL:
                raise ExprTypeError(f"'{op}' needs BOOL operands, got {lt}, {rt}", path)
            return BOOL
        if op in ("=", "!="):
            if lt.numeric and rt.numeric:
                return BOOL
            if lt == rt:
                return BOOL
            raise ExprTypeError(f"cannot compare {lt} with {rt}", path)
        if op in ("<", "<=", ">", ">="):
            if lt.numeric and rt.numeric:
                return BOOL
            raise ExprTypeError(f"'{op}' needs numbers, got {lt}, {rt}", path)
        if op in ("+", "*"):
            if lt.numeric and rt.numeric:
                return NAT if lt == NAT and rt == NAT else INT
            raise ExprTypeError(f"'{op}' needs numbers, got {lt}, {rt}", path)
        if op == "-":
            if lt.numeric and rt.numeric:
                return INT
            raise ExprTypeError(f"'-' needs numbers, got {lt}, {rt}", path)
        raise ExprTypeError(f"unknown operator '{op}'", path)

    if isinstance(expr, MinMax):
        if not expr.args:
            raise ExprTypeError(f"{expr.op}() needs at least one argument", path)
        tys = [type_of(a, scope, path + f".{expr.op}[{i}]")
               for i, a in enumerate(expr.args)]
        if not all(t.numeric for t in tys):
            raise ExprTypeError(f"{expr.op}() needs numbers", path)
        return NAT if all(t == NAT for t in tys) else INT

    raise ExprTypeError(f"unknown expression node {type(expr).__name__}", path)


# ---------------------------------------------------------------------------
# Evaluation


class RecvUnavailable(KernelError):
    """A recv() term had no past or current entry; guards using it are false."""


class GuardEvalError(KernelError):
    """Ill-typed evaluation at runtime; impossible after validation."""


class ArithmeticOverflow(KernelError):
    pass


class Env:
    """Evaluation context: value lookups plus runtime channel/state access."""

    def __init__(self, lookup, recv=None, in_state=None, int_bound=DEFAULT_INT_BOUND):
        self._lookup = lookup          # (parts tuple) -> value, KeyError if absent
        self._recv = recv              # connector -> value, RecvUnavailable if none
        self._in_state = in_state      # (state, side) -> bool
        self.int_bound = int_bound

    def lookup(self, parts):
        return self._lookup(parts)

    def recv(self, connector):
        if self._recv is None:
            raise GuardEvalError("recv() not available in this context")
        return self._recv(connector)

    def in_state(self, state, side):
        if self._in_state is None:
            raise GuardEvalError("in() not available in this context")
        return self._in_state(state, side)


def _check_bound(value, env):
    if isinstance(value, int) and not isinstance(value, bool):
        if abs(value) > env.int_bound:
            raise ArithmeticOverflow(f"value {value} exceeds bound {env.int_bound}")
    return value


def eval_expr(expr: Expr, env: Env):
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Name):
        try:
            return env.lookup(expr.parts)
        except KeyError:
            raise GuardEvalError(f"unresolved name '{expr.text}' at runtime")
    if isinstance(expr, StateTest):
        return env.in_state(expr.state, expr.side)
    if isinstance(expr, Recv):
        return env.recv(expr.connector)
    if isinstance(expr, Unary):
        v = eval_expr(expr.operand, env)
        if expr.op == "not":
            return not v
        return _check_bound(-v, env)
    if isinstance(expr, Bin):
        op = expr.op
        if op == "and":  # short circuit: an unreached recv() cannot poison
            return bool(eval_expr(expr.left, env)) and bool(eval_expr(expr.right, env))
        if op == "or":
            return bool(eval_expr(expr.left, env)) or bool(eval_expr(expr.right, env))
        if op == "=>":
            return (not eval_expr(expr.left, env)) or bool(eval_expr(expr.right, env))
        l = eval_expr(expr.left, env)
        r = eval_expr(expr.right, env)
        if op == "=":
            return l == r
        if op == "!=":
            return l != r
        if op == "<":
            return l < r
        if op == "<=":
            return l <= r
        if op == ">":
            return l > r
        if op == ">=":
            return l >= r
        if op == "+":
            return _check_bound(l + r, env)
        if op == "-":
            return _check_bound(l - r, env)
        if op == "*":
            return _check_bound(l * r, env)
        raise GuardEvalError(f"unknown operator '{op}'")
    if isinstance(expr, MinMax):
        vals = [eval_expr(a, env) for a in expr.args]
        return min(vals) if expr.op == "min" else max(vals)
    raise GuardEvalError(f"unknown expression node {type(expr).__name__}")


def eval_guard(expr: Expr, env: Env) -> bool:
    """A guard whose recv() has no available value is simply false."""
    try:
        return bool(eval_expr(expr, env))
    except RecvUnavailable:
        return False


def value_matches_type(value, ty: ValueType, elements) -> bool:
    """elements: mapping element name -> carrier set name."""
    if ty == BOOL:
        return isinstance(value, bool)
    if ty == NAT:
        return isinstance(value, int) and not isinstance(value, bool) and value >= 0
    if ty == INT:
        return isinstance(value, int) and not isinstance(value, bool)
    if ty.kind == "set":
        return isinstance(value, str) and elements.get(value) == ty.set_name
    return False


# ---------------------------------------------------------------------------
# Canonical text (round-trips through the parser)

_PREC = {"=>": 1, "or": 2, "and": 3,
         "=": 5, "!=": 5, "<": 5, "<=": 5, ">": 5, ">=": 5,
         "+": 6, "-": 6, "*": 7}


def to_text(expr: Expr) -> str:
    return _render(expr, 0)


def _render(expr, parent_prec):
    if isinstance(expr, Lit):
        if isinstance(expr.value, bool):
            return "true" if expr.value else "false"
        return str(expr.value)
    if isinstance(expr, Name):
        return expr.text
    if isinstance(expr, StateTest):
        fn = "in_abs" if expr.side == "abs" else "in"
        return f"{fn}({expr.state})"
    if isinstance(expr, Recv):
        return f"recv({expr.connector})"
    if isinstance(expr, Unary):
        if expr.op == "not":
            text = f"not {_render(expr.operand, 4)}"
            return f"({text})" if parent_prec >= 4 else text
        return f"-{_render(expr.operand, 8)}"
    if isinstance(expr, Bin):
        prec = _PREC[expr.op]
        # left-associative chains render without parens on the left;
        # comparisons are non-associative and implication is right-associative
        left_assoc = expr.op in ("or", "and", "+", "-", "*")
        left = _render(expr.left, prec - 1 if left_assoc else prec)
        right = _render(expr.right, prec)
        text = f"{left} {expr.op} {right}"
        if prec <= parent_prec:
            return f"({text})"
        return text
    if isinstance(expr, MinMax):
        return f"{expr.op}({', '.join(_render(a, 0) for a in expr.args)})"
    raise ValueError(f"cannot render {expr!r}")


def conjoin(exprs):
    """Conjunction of a list, true when empty."""
    exprs = list(exprs)
    if not exprs:
        return Lit(True)
    out = exprs[0]
    for e in exprs[1:]:
        out = Bin("and", out, e)
    return out
