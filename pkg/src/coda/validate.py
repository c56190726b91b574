"""Whole-model validation: name resolution, typing, kind constraints.

`diagnose` always returns the complete list of findings (never just the
first); `validate` raises ModelError when any of them is an error.
"""

from __future__ import annotations

from .diagnostics import Diagnostic, ModelError
from .exprs import (BOOL, DEFAULT_INT_BOUND, Env, ExprTypeError, Scope,
                    eval_expr, type_of, value_matches_type)
from .model import (INITIAL, Model, Operation, WAKE_DEFAULT)


def validate(model: Model, int_bound=DEFAULT_INT_BOUND) -> Model:
    diags = diagnose(model, int_bound=int_bound)
    if any(d.severity == "error" for d in diags):
        raise ModelError(diags)
    return model


def assignable(src, dst) -> bool:
    # numeric narrowing (INT value into a NAT slot) is checked at runtime
    return src == dst or (src.numeric and dst.numeric)


# ---------------------------------------------------------------------------
# scope builders (shared with the kernel and the refinement checker)


def _all_states(model):
    return [s.name for comp in model.components
            for m in comp.machines for s in m.all_states()]


def _const_types(model):
    return {c.name: c.value_type for c in model.constants()}


def guard_scope(model: Model, comp, op: Operation = None) -> Scope:
    """Guards see own variables, constants, elements, state tests and
    recv() on connectors targeting the owner."""
    return Scope(
        vars={v.name: v.value_type for v in comp.variables},
        consts=_const_types(model),
        elements=model.elements(),
        states=_all_states(model),
        connectors={c.name: c.value_type for c in model.connectors
                    if c.target == comp.name},
        params={p.name: p.value_type for p in op.params} if op else {},
    )


def action_scope(model: Model, comp, op: Operation = None) -> Scope:
    """Action expressions: as guards but recv() is not legal."""
    sc = guard_scope(model, comp, op)
    sc.connectors = {}
    return sc


def invariant_scope(model: Model, comp) -> Scope:
    """State invariants may read any component's variables (qualified)."""
    vars = {v.name: v.value_type for v in comp.variables}
    for other in model.components:
        for v in other.variables:
            vars[f"{other.name}.{v.name}"] = v.value_type
    return Scope(vars=vars, consts=_const_types(model),
                 elements=model.elements(), states=_all_states(model))


def static_env(model: Model, int_bound=DEFAULT_INT_BOUND) -> Env:
    """Evaluation over constants and carrier elements only."""
    consts = {c.name: c.value for c in model.constants()}
    elements = model.elements()

    def lookup(parts):
        if len(parts) == 1:
            n = parts[0]
            if n in consts:
                return consts[n]
            if n in elements:
                return n
        raise KeyError(parts)

    return Env(lookup, int_bound=int_bound)


# ---------------------------------------------------------------------------


class _Collector:
    def __init__(self):
        self.diags = []

    def error(self, code, message, span):
        self.diags.append(Diagnostic("error", code, message, span))

    def warn(self, code, message, span):
        self.diags.append(Diagnostic("warning", code, message, span))


def diagnose(model: Model, int_bound=DEFAULT_INT_BOUND):
    out = _Collector()
    _check_contexts(model, out, int_bound)
    _check_connectors(model, out)
    _check_components(model, out, int_bound)
    return out.diags


def _check_type_exists(model, ty, span, out):
    if ty.kind == "set" and not any(s.name == ty.set_name
                                    for s in model.carrier_sets()):
        out.error("unresolved-name", f"unknown type '{ty.set_name}'", span)
        return False
    return True


def _check_contexts(model, out, int_bound):
    seen = {}
    for ctx in model.contexts:
        for s in ctx.sets:
            if s.name in seen:
                out.error("duplicate", f"name '{s.name}' already declared", s.span)
            seen[s.name] = "set"
            if not s.elements:
                out.error("bad-set", f"carrier set '{s.name}' is empty", s.span)
            for e in s.elements:
                if e in seen:
                    out.error("duplicate", f"name '{e}' already declared", s.span)
                seen[e] = "element"
        for c in ctx.constants:
            if c.name in seen:
                out.error("duplicate", f"name '{c.name}' already declared", c.span)
            seen[c.name] = "constant"
            if _check_type_exists(model, c.value_type, c.span, out):
                if not value_matches_type(c.value, c.value_type, model.elements()):
                    out.error("type-mismatch",
                              f"constant '{c.name}' value {c.value!r} is not a "
                              f"{c.value_type}", c.span)
        sc = Scope(consts=_const_types(model), elements=model.elements())
        env = static_env(model, int_bound)
        for ax in ctx.axioms:
            try:
                ty = type_of(ax, sc)
                if ty != BOOL:
                    out.error("type-mismatch", f"axiom must be BOOL, got {ty}",
                              ctx.span)
                elif not eval_expr(ax, env):
                    out.error("axiom-violated", "axiom evaluates to false", ctx.span)
            except ExprTypeError as e:
                out.error("type-mismatch", str(e), ctx.span)


def _check_connectors(model, out):
    seen = set()
    for c in model.connectors:
        if c.name in seen:
            out.error("duplicate", f"connector '{c.name}' already declared", c.span)
        seen.add(c.name)
        _check_type_exists(model, c.value_type, c.span, out)
        if model.component(c.source) is None:
            out.error("unresolved-name", f"unknown source component '{c.source}'",
                      c.span)
        if model.component(c.target) is None:
            out.error("unresolved-name", f"unknown target component '{c.target}'",
                      c.span)
        if c.source == c.target:
            out.error("bad-connector",
                      f"connector '{c.name}' must join two distinct components",
                      c.span)


def _check_components(model, out, int_bound):
    comp_names = set()
    state_owner = {}
    for comp in model.components:
        if comp.name in comp_names:
            out.error("duplicate", f"component '{comp.name}' already declared",
                      comp.span)
        comp_names.add(comp.name)
        for m in comp.machines:
            for s in m.all_states():
                if s.name in state_owner:
                    out.error("duplicate",
                              f"state '{s.name}' already declared in machine "
                              f"'{state_owner[s.name]}' (state names are global)",
                              s.span)
                state_owner[s.name] = m.name

    for comp in model.components:
        _check_component(model, comp, out, int_bound)


def _enumerable(model, p):
    if p.value_type == BOOL or p.value_type.kind == "set":
        return True
    return p.low is not None and p.high is not None


def _recv_bound_params(op):
    """Parameters pinned by a  recv(c) = p  guard on a wake connector."""
    bound = set()
    from .exprs import Bin, Name, Recv
    for g in op.guards:
        if isinstance(g, Bin) and g.op == "=":
            sides = (g.left, g.right)
            for a, b in (sides, sides[::-1]):
                if isinstance(a, Recv) and isinstance(b, Name) and len(b.parts) == 1:
                    if a.connector in op.wake_connectors:
                        bound.add(b.parts[0])
    return bound


def _check_component(model, comp, out, int_bound):
    elements = model.elements()
    consts = {c.name for c in model.constants()}
    local = {}
    for v in comp.variables:
        if v.name in local or v.name in consts or v.name in elements:
            out.error("duplicate", f"name '{v.name}' already declared", v.span)
        local[v.name] = "var"
    for op in comp.operations:
        if op.name in local:
            out.error("duplicate", f"name '{op.name}' already declared", op.span)
        local[op.name] = "operation"
    for m in comp.machines:
        if m.name in local:
            out.error("duplicate", f"name '{m.name}' already declared", m.span)
        local[m.name] = "machine"

    env = static_env(model, int_bound)
    init_scope = Scope(consts=_const_types(model), elements=elements)
    for v in comp.variables:
        if not _check_type_exists(model, v.value_type, v.span, out):
            continue
        try:
            ty = type_of(v.initial, init_scope)
            if not assignable(ty, v.value_type):
                out.error("type-mismatch",
                          f"initial value of '{v.name}' has type {ty}, "
                          f"declared {v.value_type}", v.span)
            else:
                val = eval_expr(v.initial, env)
                if not value_matches_type(val, v.value_type, elements):
                    out.error("type-mismatch",
                              f"initial value {val!r} outside {v.value_type}",
                              v.span)
        except ExprTypeError as e:
            out.error("type-mismatch", f"initial value of '{v.name}': {e}", v.span)

    if comp.variant is not None:
        vsc = Scope(vars={v.name: v.value_type for v in comp.variables},
                    consts=_const_types(model), elements=elements)
        try:
            ty = type_of(comp.variant, vsc)
            if not ty.numeric:
                out.error("bad-variant", f"variant must be numeric, got {ty}",
                          comp.span)
        except ExprTypeError as e:
            out.error("bad-variant", f"variant: {e}", comp.span)

    links = {}  # op name -> [(machine, transition)]
    for m in comp.machines:
        _check_machine(model, comp, m, out)
        for t in m.transitions:
            if t.operation:
                links.setdefault(t.operation, []).append((m, t))

    for op in comp.operations:
        _check_operation(model, comp, op, links.get(op.name, ()), out)

    # a self-wake with no self-wake operation can never be consumed
    wakes = any(a.op == "wake" for op in comp.operations for a in op.actions) or \
        any(a.op == "wake" for m in comp.machines for t in m.transitions
            for a in t.actions)
    if wakes and not any(op.kind == "S" for op in comp.operations):
        out.warn("no-receiver",
                 f"component '{comp.name}' schedules self-wakes but has no "
                 "kind-S operation; time cannot advance past a wake", comp.span)


def _check_machine(model, comp, m, out):
    if m.mode not in ("sync", "async"):
        out.error("bad-machine", f"unknown machine mode '{m.mode}'", m.span)
    names = set()
    for s in m.all_states():
        if s.name in names:
            out.error("duplicate", f"state '{s.name}' repeated in machine", s.span)
        names.add(s.name)
    parents = m.parent_map()

    inv_sc = invariant_scope(model, comp)
    for s in m.all_states():
        for inv in s.invariants:
            try:
                ty = type_of(inv, inv_sc)
                if ty != BOOL:
                    out.error("type-mismatch",
                              f"state invariant on '{s.name}' must be BOOL", s.span)
            except ExprTypeError as e:
                out.error("type-mismatch",
                          f"state invariant on '{s.name}': {e}", s.span)

    initials = {}
    targeted_supers = set()
    ops_by_name = {o.name: o for o in comp.operations}
    tnames = set()
    for t in m.transitions:
        if t.name in tnames:
            out.error("duplicate", f"transition '{t.name}' repeated", t.span)
        tnames.add(t.name)
        if t.source != INITIAL and t.source not in names:
            out.error("unresolved-name",
                      f"transition '{t.name}': unknown source '{t.source}'", t.span)
        if t.target not in names:
            out.error("unresolved-name",
                      f"transition '{t.name}': unknown target '{t.target}'", t.span)
            continue
        if t.source == INITIAL:
            region = parents.get(t.target) or ""
            if region in initials:
                out.error("bad-initial",
                          f"region '{region or m.name}' has two initial "
                          "transitions", t.span)
            initials[region] = t
            if t.operation:
                linked = ops_by_name.get(t.operation)
                if linked and linked.kind != "M":
                    out.error("kind-constraint",
                              "an initial transition may only be linked to a "
                              f"method operation, '{t.operation}' is kind "
                              f"{linked.kind}", t.span)
        else:
            sub = _find_state(m.states, t.target)
            if sub is not None and sub.substates:
                targeted_supers.add(t.target)
        if t.operation and t.operation not in ops_by_name:
            out.error("unresolved-name",
                      f"transition '{t.name}' links unknown operation "
                      f"'{t.operation}'", t.span)
        if not t.synchronised and comp.variant is None:
            out.error("variant-required",
                      f"unsynchronised transition '{t.name}' needs a declared "
                      "variant on its component", t.span)
        if m.mode == "sync" and not t.synchronised:
            out.error("kind-constraint",
                      f"transition '{t.name}' of synchronous machine '{m.name}' "
                      "cannot be unsynchronised", t.span)
        tg_sc = guard_scope(model, comp, None)
        for g in t.guards:
            try:
                ty = type_of(g, tg_sc)
                if ty != BOOL:
                    out.error("type-mismatch",
                              f"transition guard must be BOOL, got {ty}", t.span)
            except ExprTypeError as e:
                out.error("type-mismatch", f"transition '{t.name}': {e}", t.span)
        _check_actions(model, comp, None, t.actions, t.span, out)

    if m.states and "" not in initials:
        out.error("bad-initial",
                  f"machine '{m.name}' has no initial transition", m.span)
    for sup in targeted_supers:
        sub = _find_state(m.states, sup)
        region_initial = initials.get(sup)
        if region_initial is None:
            out.error("bad-initial",
                      f"state '{sup}' is a transition target but its region has "
                      "no initial transition", sub.span)


def _find_state(states, name):
    for s in states:
        if s.name == name:
            return s
        found = _find_state(s.substates, name)
        if found is not None:
            return found
    return None


def _check_operation(model, comp, op, linked, out):
    if op.kind not in ("P", "S", "E", "T", "M"):
        out.error("kind-constraint", f"unknown kind '{op.kind}'", op.span)
        return

    if op.kind == "P":
        if not op.wake_connectors:
            out.error("kind-constraint",
                      f"port-wake '{op.name}' must name at least one connector",
                      op.span)
        for cn in op.wake_connectors:
            conn = model.connector(cn)
            if conn is None:
                out.error("unresolved-name",
                          f"'{op.name}' wakes unknown connector '{cn}'", op.span)
            elif conn.target != comp.name:
                out.error("illegal-action-placement",
                          f"'{op.name}' wakes connector '{cn}' whose target is "
                          f"'{conn.target}', not '{comp.name}'", op.span)
    elif op.wake_connectors:
        out.error("kind-constraint",
                  f"only port-wake operations take a wakes clause", op.span)

    if op.kind in ("P", "S", "M") and not op.synchronised:
        out.error("kind-constraint",
                  f"kind-{op.kind} operation '{op.name}' is always synchronised",
                  op.span)
    if op.kind == "E" and op.synchronised:
        out.error("kind-constraint",
                  f"environment operation '{op.name}' is not clock-synchronised",
                  op.span)
    if op.kind == "T" and not op.synchronised and comp.variant is None:
        out.error("variant-required",
                  f"unsynchronised operation '{op.name}' needs a declared "
                  "variant on its component", op.span)

    for machine, t in linked:
        if op.kind == "E" and machine.mode == "sync":
            out.error("kind-constraint",
                      f"environment operation '{op.name}' may not drive a "
                      f"transition of synchronous machine '{machine.name}'",
                      op.span)
        if machine.mode == "sync" and op.kind == "T" and not op.synchronised:
            out.error("kind-constraint",
                      f"unsynchronised operation '{op.name}' may not drive "
                      f"synchronous machine '{machine.name}'", op.span)
    if op.kind == "T" and not linked:
        out.warn("unlinked-transition-op",
                 f"kind-T operation '{op.name}' is linked to no transition and "
                 "can never fire", op.span)

    seen_params = set()
    recv_bound = _recv_bound_params(op)
    sc = guard_scope(model, comp, op)
    for p in op.params:
        if p.name in seen_params or p.name in sc.vars or p.name in sc.consts \
                or p.name in sc.elements:
            out.error("duplicate", f"parameter '{p.name}' shadows another name",
                      op.span)
        seen_params.add(p.name)
        if not _check_type_exists(model, p.value_type, op.span, out):
            continue
        if p.low is not None and p.high is not None and p.low > p.high:
            out.error("bad-param", f"parameter '{p.name}' has an empty range",
                      op.span)
        if p.value_type.numeric and not _enumerable(model, p) \
                and p.name not in recv_bound:
            out.error("bad-param",
                      f"numeric parameter '{p.name}' of '{op.name}' needs a "
                      "range or a recv() binding guard to stay finite", op.span)

    for g in op.guards:
        try:
            ty = type_of(g, sc)
            if ty != BOOL:
                out.error("type-mismatch",
                          f"guard of '{op.name}' must be BOOL, got {ty}", op.span)
        except ExprTypeError as e:
            out.error("type-mismatch", f"guard of '{op.name}': {e}", op.span)

    _check_actions(model, comp, op, op.actions, op.span, out)


def _check_actions(model, comp, op, actions, span, out):
    sc = action_scope(model, comp, op)
    vars_by_name = {v.name: v for v in comp.variables}
    for a in actions:
        if a.op == "assign":
            v = vars_by_name.get(a.target)
            if v is None:
                out.error("unresolved-name",
                          f"assignment to unknown variable '{a.target}'", a.span)
                continue
            try:
                ty = type_of(a.value, sc)
                if not assignable(ty, v.value_type):
                    out.error("type-mismatch",
                              f"cannot assign {ty} to '{a.target}': "
                              f"{v.value_type}", a.span)
            except ExprTypeError as e:
                out.error("type-mismatch", f"assignment to '{a.target}': {e}",
                          a.span)
        elif a.op == "send":
            conn = model.connector(a.target)
            if conn is None:
                out.error("unresolved-name",
                          f"port_send on unknown connector '{a.target}'", a.span)
                continue
            if conn.source != comp.name:
                out.error("illegal-action-placement",
                          f"port_send on '{a.target}' from '{comp.name}' but the "
                          f"connector's source is '{conn.source}'", a.span)
            try:
                ty = type_of(a.value, sc)
                if not assignable(ty, conn.value_type):
                    out.error("type-mismatch",
                              f"value of type {ty} sent on '{a.target}': "
                              f"{conn.value_type}", a.span)
            except ExprTypeError as e:
                out.error("type-mismatch", f"port_send on '{a.target}': {e}",
                          a.span)
            _check_delay(a, sc, out)
            if not any(o.kind == "P" and a.target in o.wake_connectors
                       for o in (model.component(conn.target).operations
                                 if model.component(conn.target) else ())):
                out.warn("no-receiver",
                         f"'{conn.target}' has no port-wake on '{a.target}'; a "
                         "delivery there will block the clock", a.span)
        elif a.op == "wake":
            if a.wake_kind != WAKE_DEFAULT:
                out.error("kind-constraint",
                          f"unsupported wake kind '{a.wake_kind}'", a.span)
            _check_delay(a, sc, out)
        elif a.op == "call":
            target = None
            for o in comp.operations:
                if o.name == a.target:
                    target = o
            if target is None:
                out.error("unresolved-name",
                          f"call of unknown operation '{a.target}'", a.span)
            elif target.kind != "M":
                out.error("illegal-action-placement",
                          f"call target '{a.target}' must be kind M, is "
                          f"{target.kind}", a.span)
            elif op is not None and target.owner != op.owner:
                out.error("illegal-action-placement",
                          f"call target '{a.target}' belongs to another "
                          "component", a.span)
        else:
            out.error("bad-action", f"unknown action '{a.op}'", a.span)


def _check_delay(a, sc, out):
    try:
        ty = type_of(a.delay, sc)
        if not ty.numeric:
            out.error("type-mismatch", f"delay must be a number, got {ty}", a.span)
    except ExprTypeError as e:
        out.error("type-mismatch", f"delay: {e}", a.span)
