"""Event-B text emission.

Each model becomes one context and one machine in plain mathematical
notation (Camille-style layout, Unicode operators, one construct per line).
Connectors and wake queues become partial maps over ℕ, operations become
events carrying their translation guards and actions, and a tick event
advances the clock under one dom-exclusion guard per connector and per
component.  Output is byte-deterministic.

Received values are bound through local event parameters: an operation
parameter p pinned by `recv(c) = p` emits as `ANY p` with the
most-recent-entry equality among its guards, rather than inlining the
lookup at every use site.
"""

from __future__ import annotations

from .exprs import (Bin, Expr, Lit, MinMax, Name, Recv, StateTest, Unary)
from .kernel import ModelIndex, index_of
from .model import INITIAL, Model, WAKE_DEFAULT

_B_OPS = {"and": "∧", "or": "∨", "=>": "⇒", "=": "=", "!=": "≠",
          "<": "<", "<=": "≤", ">": ">", ">=": "≥",
          "+": "+", "-": "−", "*": "∗"}
_PREC = {"⇒": 1, "∨": 2, "∧": 3, "=": 5, "≠": 5, "<": 5, "≤": 5, ">": 5,
         "≥": 5, "+": 6, "−": 6, "∗": 7}


def _type_text(ty):
    if ty.kind == "bool":
        return "BOOL"
    if ty.kind == "nat":
        return "ℕ"
    if ty.kind == "int":
        return "ℤ"
    return ty.set_name


def _lit(value):
    if isinstance(value, bool):
        return "TRUE" if value else "FALSE"
    return str(value)


class _Renderer:
    """Rewrites expressions over the emitted variable encoding: component
    variables are prefixed, state tests become enumeration membership, and
    recv() becomes the most-recent-entry lookup."""

    def __init__(self, index: ModelIndex, comp=None, abs_suffix="_abs"):
        self.index = index
        self.comp = comp
        self.abs_suffix = abs_suffix
        self.abs_index = None  # set for gluing rendering

    def var_name(self, comp, var):
        return f"{comp}_{var}"

    def machine_var(self, qualname, side=""):
        name = qualname.split(".", 1)[1]
        return name + (self.abs_suffix if side == "abs" else "")

    def render(self, e: Expr, prec=0, predicate=True) -> str:
        # `predicate` marks positions where Event-B expects a predicate, not
        # a BOOL term: bare boolean terms are wrapped as  term = TRUE  there
        if isinstance(e, Lit):
            if predicate and isinstance(e.value, bool):
                return "⊤" if e.value else "⊥"
            return _lit(e.value)
        if isinstance(e, Name):
            text = self._name(e)
            return f"{text} = TRUE" if predicate else text
        if isinstance(e, StateTest):
            index = self.abs_index if e.side == "abs" and self.abs_index \
                else self.index
            qn = index.machine_of_state[e.state]
            var = self.machine_var(qn, e.side)
            leaves = index.machines[qn].leaves_under(e.state)
            if len(leaves) == 1:
                return f"{var} = {leaves[0]}"
            return f"{var} ∈ {{{', '.join(leaves)}}}"
        if isinstance(e, Recv):
            c = e.connector
            text = f"{c}(max({{ t · t ∈ dom({c}) ∧ t ≤ current_time ∣ t }}))"
            return f"{text} = TRUE" if predicate else text
        if isinstance(e, Unary):
            if e.op == "not":
                if isinstance(e.operand, (Name, Recv)):
                    return f"{self.render(e.operand, 8, False)} = FALSE"
                return f"¬ ({self.render(e.operand, 0)})"
            return f"−{self.render(e.operand, 8, False)}"
        if isinstance(e, Bin):
            op = _B_OPS[e.op]
            p = _PREC[op]
            operands_are_predicates = e.op in ("and", "or", "=>")
            left = self.render(e.left, p - 1 if e.op != "=>" else p,
                               operands_are_predicates)
            right = self.render(e.right, p, operands_are_predicates)
            text = f"{left} {op} {right}"
            return f"({text})" if p <= prec else text
        if isinstance(e, MinMax):
            args = ", ".join(self.render(a, 0, False) for a in e.args)
            return f"{e.op}({{{args}}})"
        raise ValueError(f"cannot emit {e!r}")

    def _name(self, e: Name):
        parts = e.parts
        if parts[0] == "abs" and len(parts) == 3:
            return self.var_name(parts[1], parts[2]) + self.abs_suffix
        if len(parts) == 2:
            return self.var_name(parts[0], parts[1])
        n = parts[0]
        if self.comp is not None and any(v.name == n
                                         for v in self.comp.variables):
            return self.var_name(self.comp.name, n)
        return n  # constant, carrier element or event parameter


def _group_flag(key):
    kind = key[0]
    if kind == "P":
        return f"{key[1]}_{'_'.join(key[2])}_flag"
    if kind == "S":
        return f"{key[1]}_wake_flag"
    if kind == "SM":
        return f"{key[1].replace('.', '_')}_flag"
    return f"{key[1]}_{key[2].replace('.', '_')}_flag"


def emit_context(model: Model) -> str:
    index = index_of(model)
    out = [f"CONTEXT {model.name}_ctx"]
    out.append("SETS")
    for s in model.carrier_sets():
        out.append(f"  {s.name}")
    out.append("  WakeKind")
    for qn, m in index.machines.items():
        out.append(f"  {m.name.upper()}_STATES")
    out.append("CONSTANTS")
    names = [e for s in model.carrier_sets() for e in s.elements]
    names.append(WAKE_DEFAULT)
    for qn, m in index.machines.items():
        names.extend(s.name for s in m.all_states() if not _has_subs(m, s))
        names.append(f"{m.name.upper()}_INACTIVE")
    names.extend(c.name for c in model.constants())
    for n in names:
        out.append(f"  {n}")
    out.append("AXIOMS")
    i = 0
    for s in model.carrier_sets():
        i += 1
        parts = ", ".join(f"{{{e}}}" for e in s.elements)
        out.append(f"  axm{i}: partition({s.name}, {parts})")
    i += 1
    out.append(f"  axm{i}: partition(WakeKind, {{{WAKE_DEFAULT}}})")
    for qn, m in index.machines.items():
        i += 1
        leaves = [s.name for s in m.all_states() if not _has_subs(m, s)]
        leaves.append(f"{m.name.upper()}_INACTIVE")
        parts = ", ".join(f"{{{x}}}" for x in leaves)
        out.append(f"  axm{i}: partition({m.name.upper()}_STATES, {parts})")
    for c in model.constants():
        i += 1
        out.append(f"  axm{i}: {c.name} ∈ {_type_text(c.value_type)}")
        i += 1
        out.append(f"  axm{i}: {c.name} = {_lit(c.value)}")
    rend = _Renderer(index)
    for ctx in model.contexts:
        for ax in ctx.axioms:
            i += 1
            out.append(f"  axm{i}: {rend.render(ax)}")
    out.append("END")
    return "\n".join(out) + "\n"


def _has_subs(machine, state):
    return bool(state.substates)


def _sync_groups(index: ModelIndex):
    """Deterministically ordered sync-flag keys of the model."""
    keys = []
    for comp in index.model.components:
        for group in sorted(index.p_groups[comp.name],
                            key=lambda g: tuple(sorted(g))):
            keys.append(("P", comp.name, tuple(sorted(group))))
        if index.has_s_ops[comp.name]:
            keys.append(("S", comp.name))
        for op in comp.operations:
            if op.kind in ("M", "T") and op.synchronised:
                keys.append(("OP", comp.name, op.name))
        for m in comp.machines:
            qn = f"{comp.name}.{m.name}"
            if m.mode == "sync":
                keys.append(("SM", qn))
            for t in m.transitions:
                if t.operation is None and t.source != INITIAL \
                        and t.synchronised:
                    keys.append(("TR", qn, f"{m.name}.{t.name}"))
    return keys


def emit_machine(model: Model, refinement=None) -> str:
    """The machine text; `refinement` (a RefinementSpec) adds the REFINES
    clause, gluing invariants and per-event refinement annotations."""
    index = index_of(model)
    out = [f"MACHINE {model.name}_mch"]
    if refinement is not None:
        out.append(f"REFINES {refinement.abstract.name}_mch")
    out.append(f"SEES {model.name}_ctx")

    out.append("VARIABLES")
    out.append("  current_time")
    for c in model.connectors:
        out.append(f"  {c.name}")
    for comp in model.components:
        out.append(f"  {comp.name}_wakeup")
    for qn, m in index.machines.items():
        out.append(f"  {m.name}")
    for comp in model.components:
        for v in comp.variables:
            out.append(f"  {comp.name}_{v.name}")
    groups = _sync_groups(index)
    for key in groups:
        out.append(f"  {_group_flag(key)}")

    out.append("INVARIANTS")
    i = 0
    i += 1
    out.append(f"  inv{i}: current_time ∈ ℕ")
    for c in model.connectors:
        i += 1
        out.append(f"  inv{i}: {c.name} ∈ ℕ ⇸ {_type_text(c.value_type)}")
    for comp in model.components:
        i += 1
        out.append(f"  inv{i}: {comp.name}_wakeup ∈ ℕ ⇸ WakeKind")
    for qn, m in index.machines.items():
        i += 1
        out.append(f"  inv{i}: {m.name} ∈ {m.name.upper()}_STATES")
    for comp in model.components:
        for v in comp.variables:
            i += 1
            out.append(f"  inv{i}: {comp.name}_{v.name} ∈ "
                       f"{_type_text(v.value_type)}")
    for key in groups:
        i += 1
        out.append(f"  inv{i}: {_group_flag(key)} ∈ BOOL")
    # state invariants, conditioned on membership of the owning state
    for comp in model.components:
        rend = _Renderer(index, comp)
        for m in comp.machines:
            for s in m.all_states():
                for inv in s.invariants:
                    i += 1
                    guard = rend.render(StateTest(s.name))
                    out.append(f"  inv{i}: {guard} ⇒ {rend.render(inv)}")
    if refinement is not None:
        arend = _Renderer(index, None)
        arend.abs_index = index_of(refinement.abstract)
        for g in refinement.gluing:
            i += 1
            out.append(f"  inv{i}: {arend.render(g)}")
    if any(c.variant is not None for c in model.components):
        vrend = _Renderer(index)
        parts = []
        for comp in model.components:
            if comp.variant is not None:
                vrend.comp = comp
                parts.append(vrend.render(comp.variant, 6, False))
        out.append("VARIANT")
        out.append("  " + " + ".join(parts))

    out.append("EVENTS")
    out.extend(_emit_init(index))
    for comp in model.components:
        for op in comp.operations:
            out.extend(_emit_operation(index, comp, op, refinement))
        for m in comp.machines:
            qn = f"{comp.name}.{m.name}"
            for t in m.transitions:
                if t.operation is None and t.source != INITIAL:
                    out.extend(_emit_plain_transition(index, comp, m, t,
                                                      refinement))
    out.extend(_emit_tick(index, groups))
    out.append("END")
    return "\n".join(out) + "\n"


def _emit_init(index):
    from .validate import static_env
    from .exprs import eval_expr
    model = index.model
    out = ["  INITIALISATION ≙", "    BEGIN"]
    i = 0
    i += 1
    out.append(f"      act{i}: current_time ≔ 0")
    for c in model.connectors:
        i += 1
        out.append(f"      act{i}: {c.name} ≔ ∅")
    for comp in model.components:
        i += 1
        out.append(f"      act{i}: {comp.name}_wakeup ≔ ∅")
    env = static_env(model)
    for qn, m in index.machines.items():
        root = m.initial_for("")
        i += 1
        if root is None or root.operation:
            out.append(f"      act{i}: {m.name} ≔ {m.name.upper()}_INACTIVE")
        else:
            from .kernel import _descend
            out.append(f"      act{i}: {m.name} ≔ "
                       f"{_descend(index, qn, root.target)}")
    for comp in model.components:
        for v in comp.variables:
            i += 1
            out.append(f"      act{i}: {comp.name}_{v.name} ≔ "
                       f"{_lit(eval_expr(v.initial, env))}")
    for key in _sync_groups(index):
        i += 1
        out.append(f"      act{i}: {_group_flag(key)} ≔ FALSE")
    out.append("    END")
    return out


def _event_status(label, refinement):
    """(status line, refines line) for one event."""
    if refinement is None:
        return "ordinary", None
    mapped = refinement.event_map.get(label, "new")
    if mapped == "new":
        comp = label.split(".", 1)[0]
        decl = refinement.concrete.component(comp)
        status = "convergent" if decl is not None \
            and decl.variant is not None else "ordinary"
        return status, None
    return "ordinary", mapped.split(".", 1)[1]


def _emit_operation(index, comp, op, refinement):
    rend = _Renderer(index, comp)
    label = f"{comp.name}.{op.name}"
    status, refines = _event_status(label, refinement)
    out = [f"  {op.name} ≙  // kind {op.kind}, {comp.name}"]
    out.append(f"    STATUS {status}")
    if refines:
        out.append(f"    REFINES {refines}")
    params = [p.name for p in op.params]
    if params:
        out.append("    ANY " + " ".join(params))
    out.append("    WHERE")
    i = 0
    for p in op.params:
        i += 1
        out.append(f"      grd{i}: {p.name} ∈ {_type_text(p.value_type)}")
        if p.low is not None:
            i += 1
            out.append(f"      grd{i}: {p.low} ≤ {p.name} ∧ "
                       f"{p.name} ≤ {p.high}")
    if op.kind == "P":
        for c in op.wake_connectors:
            i += 1
            out.append(f"      grd{i}: current_time ∈ dom({c})")
    if op.kind == "S":
        i += 1
        out.append(f"      grd{i}: current_time ∈ "
                   f"dom({comp.name}_wakeup)")
    transitions = index.links.get((comp.name, op.name), [])
    for qn, t in transitions:
        mname = qn.split(".", 1)[1]
        i += 1
        if t.source == INITIAL:
            out.append(f"      grd{i}: {mname} = {mname.upper()}_INACTIVE")
        else:
            src = rend.render(StateTest(t.source))
            out.append(f"      grd{i}: {src}")
        for g in t.guards:
            i += 1
            out.append(f"      grd{i}: {rend.render(g)}")
    for g in op.guards:
        i += 1
        out.append(f"      grd{i}: {rend.render(g)}")
    for key in index.op_groups(op, tuple((qn, t.name)
                                         for qn, t in transitions)):
        i += 1
        out.append(f"      grd{i}: {_group_flag(key)} = FALSE")
    out.append("    THEN")
    out.extend(_emit_actions(index, comp, op, transitions, rend))
    out.append("    END")
    return out


def _emit_actions(index, comp, op, transitions, rend):
    out = []
    i = 0
    for qn, t in transitions:
        from .kernel import _descend
        mname = qn.split(".", 1)[1]
        i += 1
        out.append(f"      act{i}: {mname} ≔ {_descend(index, qn, t.target)}")
        for a in t.actions:
            i += 1
            out.append(f"      act{i}: {_action_text(a, comp, rend)}")
    if op is not None:
        for a in op.actions:
            i += 1
            out.append(f"      act{i}: {_action_text(a, comp, rend)}")
        groups = index.op_groups(op, tuple((qn, t.name)
                                           for qn, t in transitions))
    else:
        qn, t = transitions[0]
        groups = index.op_groups(None, ((qn, t.name),))
    for key in groups:
        i += 1
        out.append(f"      act{i}: {_group_flag(key)} ≔ TRUE")
    if i == 0:
        out.append("      skip")
    return out


def _action_text(a, comp, rend):
    if a.op == "assign":
        return f"{comp.name}_{a.target} ≔ {rend.render(a.value, 0, False)}"
    if a.op == "send":
        return (f"{a.target}(current_time + {rend.render(a.delay, 6, False)})"
                f" ≔ {rend.render(a.value, 0, False)}")
    if a.op == "wake":
        return (f"{comp.name}_wakeup(current_time + "
                f"{rend.render(a.delay, 6, False)}) ≔ {a.wake_kind}")
    if a.op == "call":
        return f"{comp.name}_{a.target}_pending ≔ TRUE"
    raise ValueError(a.op)


def _emit_plain_transition(index, comp, m, t, refinement):
    rend = _Renderer(index, comp)
    qn = f"{comp.name}.{m.name}"
    label = f"{comp.name}.{m.name}.{t.name}"
    status, refines = _event_status(label, refinement)
    out = [f"  {t.name} ≙  // transition of {qn}"]
    out.append(f"    STATUS {status}")
    if refines:
        out.append(f"    REFINES {refines}")
    out.append("    WHERE")
    i = 1
    out.append(f"      grd{i}: {rend.render(StateTest(t.source))}")
    for g in t.guards:
        i += 1
        out.append(f"      grd{i}: {rend.render(g)}")
    for key in index.op_groups(None, ((qn, t.name),)):
        i += 1
        out.append(f"      grd{i}: {_group_flag(key)} = FALSE")
    out.append("    THEN")
    out.extend(_emit_actions(index, None, None, [(qn, t)], rend))
    out.append("    END")
    return out


def _emit_tick(index, groups):
    model = index.model
    out = ["  tick ≙", "    STATUS ordinary", "    WHERE"]
    i = 0
    for c in model.connectors:
        i += 1
        out.append(f"      grd{i}: ¬ current_time ∈ dom({c.name})")
    for comp in model.components:
        i += 1
        out.append(f"      grd{i}: ¬ current_time ∈ "
                   f"dom({comp.name}_wakeup)")
    out.append("    THEN")
    out.append("      act1: current_time ≔ current_time + 1")
    i = 1
    for key in groups:
        i += 1
        out.append(f"      act{i}: {_group_flag(key)} ≔ FALSE")
    out.append("    END")
    return out


def emit(model: Model):
    """(context text, machine text) for one validated model."""
    return emit_context(model), emit_machine(model)


def emit_refinement(spec) -> str:
    """Machine text of the concrete model with REFINES, gluing invariants
    and per-event refinement annotations."""
    return emit_machine(spec.concrete, refinement=spec)
