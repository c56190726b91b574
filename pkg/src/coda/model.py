"""In-memory object model for .coda component models.

Everything here is an immutable dataclass; after `coda.validate.validate`
returns a model it is safe to share freely between threads and sessions.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

from .diagnostics import SourceSpan
from .exprs import Expr, ValueType

OPERATION_KINDS = ("P", "S", "E", "T", "M")

WAKE_DEFAULT = "DEFAULT"  # the only wake kind accepted in v1

INITIAL = "@initial"   # pseudo source of initial transitions
INACTIVE = "@inactive"  # configuration of a machine whose initial has not fired


@dataclass(frozen=True)
class CarrierSet:
    name: str
    elements: Tuple[str, ...]
    span: SourceSpan = field(default_factory=SourceSpan, compare=False)


@dataclass(frozen=True)
class Constant:
    name: str
    value_type: ValueType
    value: object
    span: SourceSpan = field(default_factory=SourceSpan, compare=False)


@dataclass(frozen=True)
class Context:
    name: str
    sets: Tuple[CarrierSet, ...] = ()
    constants: Tuple[Constant, ...] = ()
    axioms: Tuple[Expr, ...] = ()
    span: SourceSpan = field(default_factory=SourceSpan, compare=False)


@dataclass(frozen=True)
class Connector:
    """Typed point-to-point asynchronous channel from source to target."""

    name: str
    value_type: ValueType
    source: str
    target: str
    span: SourceSpan = field(default_factory=SourceSpan, compare=False)


@dataclass(frozen=True)
class Param:
    name: str
    value_type: ValueType
    # inclusive range for numeric parameters that must enumerate finitely
    low: Optional[int] = None
    high: Optional[int] = None


@dataclass(frozen=True)
class Action:
    """One of assign / port_send / self_wake / call."""

    op: str  # "assign" | "send" | "wake" | "call"
    target: str = ""          # variable, connector, or method name
    value: Optional[Expr] = None
    delay: Optional[Expr] = None
    wake_kind: str = WAKE_DEFAULT
    span: SourceSpan = field(default_factory=SourceSpan, compare=False)


@dataclass(frozen=True)
class Operation:
    name: str
    owner: str
    kind: str  # P S E T M
    wake_connectors: Tuple[str, ...] = ()
    params: Tuple[Param, ...] = ()
    guards: Tuple[Expr, ...] = ()
    actions: Tuple[Action, ...] = ()
    synchronised: bool = True  # always True for P/S/M; choice for T; False for E
    span: SourceSpan = field(default_factory=SourceSpan, compare=False)


@dataclass(frozen=True)
class Transition:
    name: str
    source: str  # state name or INITIAL
    target: str
    operation: Optional[str] = None  # linked operation, same component
    guards: Tuple[Expr, ...] = ()
    actions: Tuple[Action, ...] = ()
    synchronised: bool = True
    span: SourceSpan = field(default_factory=SourceSpan, compare=False)


@dataclass(frozen=True)
class State:
    name: str
    substates: Tuple["State", ...] = ()
    invariants: Tuple[Expr, ...] = ()
    span: SourceSpan = field(default_factory=SourceSpan, compare=False)


@dataclass(frozen=True)
class StateMachine:
    name: str
    owner: str
    mode: str  # "sync" | "async"
    states: Tuple[State, ...] = ()
    transitions: Tuple[Transition, ...] = ()
    span: SourceSpan = field(default_factory=SourceSpan, compare=False)

    def all_states(self):
        out = []

        def walk(states):
            for s in states:
                out.append(s)
                walk(s.substates)

        walk(self.states)
        return out

    def leaves_under(self, name):
        """Leaf state names reachable by descending from `name` ('' = all)."""
        found = []

        def walk(s, inside):
            inside = inside or s.name == name or name == ""
            if not s.substates:
                if inside:
                    found.append(s.name)
            else:
                for c in s.substates:
                    walk(c, inside)

        for s in self.states:
            walk(s, False)
        return found

    def parent_map(self):
        parents = {}

        def walk(s, parent):
            parents[s.name] = parent
            for c in s.substates:
                walk(c, s.name)

        for s in self.states:
            walk(s, None)
        return parents

    def ancestors(self, leaf):
        """leaf plus all enclosing superstates, innermost first."""
        parents = self.parent_map()
        out = []
        cur = leaf
        while cur is not None:
            out.append(cur)
            cur = parents.get(cur)
        return out

    def initial_for(self, region_owner):
        """The initial transition of a region; '' names the root region."""
        for t in self.transitions:
            if t.source == INITIAL and self._region_of(t.target) == region_owner:
                return t
        return None

    def _region_of(self, state_name):
        parents = self.parent_map()
        return parents.get(state_name) or ""


@dataclass(frozen=True)
class Variable:
    name: str
    value_type: ValueType
    initial: Expr
    span: SourceSpan = field(default_factory=SourceSpan, compare=False)


@dataclass(frozen=True)
class Component:
    name: str
    variables: Tuple[Variable, ...] = ()
    operations: Tuple[Operation, ...] = ()
    machines: Tuple[StateMachine, ...] = ()
    variant: Optional[Expr] = None
    span: SourceSpan = field(default_factory=SourceSpan, compare=False)


@dataclass(frozen=True)
class RefinesClause:
    """Inline refinement declaration inside a concrete model file."""

    abstract_path: str
    glue: Tuple[Expr, ...] = ()
    event_map: Tuple[Tuple[str, str], ...] = ()   # concrete op -> abstract op | "new"
    state_map: Tuple[Tuple[str, str], ...] = ()   # concrete state -> abstract state
    span: SourceSpan = field(default_factory=SourceSpan, compare=False)


@dataclass(frozen=True)
class Model:
    name: str
    contexts: Tuple[Context, ...] = ()
    connectors: Tuple[Connector, ...] = ()
    components: Tuple[Component, ...] = ()
    refines: Optional[RefinesClause] = None
    span: SourceSpan = field(default_factory=SourceSpan, compare=False)

    # -- convenience lookups (plain scans; hot paths use kernel.ModelIndex) --

    def component(self, name) -> Optional[Component]:
        for c in self.components:
            if c.name == name:
                return c
        return None

    def connector(self, name) -> Optional[Connector]:
        for c in self.connectors:
            if c.name == name:
                return c
        return None

    def carrier_sets(self):
        return [s for ctx in self.contexts for s in ctx.sets]

    def constants(self):
        return [c for ctx in self.contexts for c in ctx.constants]

    def elements(self):
        """element name -> carrier set name, across all contexts."""
        return {e: s.name for s in self.carrier_sets() for e in s.elements}


__all__ = [
    "OPERATION_KINDS", "WAKE_DEFAULT", "INITIAL", "INACTIVE",
    "CarrierSet", "Constant", "Context", "Connector", "Param", "Action",
    "Operation", "Transition", "State", "StateMachine", "Variable",
    "Component", "RefinesClause", "Model", "ValueType", "replace",
]
