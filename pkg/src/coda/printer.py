"""Canonical pretty-printer; parse(print(m)) == m structurally."""

from __future__ import annotations

from .exprs import to_text
from .model import INITIAL, Model


def _lit(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def print_model(model: Model) -> str:
    out = [f"model {model.name}", ""]
    for ctx in model.contexts:
        out.append(f"context {ctx.name} {{")
        for s in ctx.sets:
            out.append(f"  set {s.name} = {{ {', '.join(s.elements)} }}")
        for c in ctx.constants:
            out.append(f"  constant {c.name}: {c.value_type} = {_lit(c.value)}")
        for ax in ctx.axioms:
            out.append(f"  axiom {to_text(ax)}")
        out.append("}")
        out.append("")
    for c in model.connectors:
        out.append(f"connector {c.name}: {c.value_type} "
                   f"from {c.source} to {c.target}")
    if model.connectors:
        out.append("")
    for comp in model.components:
        out.extend(_component(comp))
        out.append("")
    if model.refines is not None:
        out.extend(_refines(model.refines))
        out.append("")
    while out and out[-1] == "":
        out.pop()
    return "\n".join(out) + "\n"


def _component(comp):
    out = [f"component {comp.name} {{"]
    for v in comp.variables:
        out.append(f"  var {v.name}: {v.value_type} = {to_text(v.initial)}")
    if comp.variant is not None:
        out.append(f"  variant {to_text(comp.variant)}")
    for m in comp.machines:
        out.extend(_machine(m))
    for op in comp.operations:
        out.extend(_operation(op))
    out.append("}")
    return out


def _machine(m):
    out = [f"  statemachine {m.name} {m.mode} {{"]
    root_initial = [t for t in m.transitions
                    if t.source == INITIAL and _region(m, t.target) == ""]
    for t in root_initial:
        out.append("    " + _initial_text(t))
    for s in m.states:
        out.extend(_state(m, s, 4))
    for t in m.transitions:
        if t.source == INITIAL:
            continue
        out.extend(_transition(t))
    out.append("  }")
    return out


def _region(m, state_name):
    return m.parent_map().get(state_name) or ""


def _initial_text(t):
    text = f"initial -> {t.target}"
    if t.operation:
        text += f" links {t.operation}"
    return text


def _state(m, s, indent):
    pad = " " * indent
    items = []
    for t in m.transitions:
        if t.source == INITIAL and _region(m, t.target) == s.name:
            items.append(pad + "  " + _initial_text(t))
    for inv in s.invariants:
        items.append(f"{pad}  invariant {to_text(inv)}")
    for sub in s.substates:
        items.extend(_state(m, sub, indent + 2))
    if not items:
        return [f"{pad}state {s.name} {{ }}"]
    return [f"{pad}state {s.name} {{"] + items + [pad + "}"]


def _transition(t):
    head = f"  transition {t.name}"
    if not t.synchronised:
        head += " unsync"
    head += f": {t.source} -> {t.target}"
    if t.operation:
        head += f" links {t.operation}"
    if not t.guards and not t.actions:
        return ["  " + head]
    out = ["  " + head + " {"]
    for g in t.guards:
        out.append(f"      guard {to_text(g)}")
    for a in t.actions:
        out.append(f"      action {_action_text(a)}")
    out.append("    }")
    return out


def _operation(op):
    head = f"  operation {op.name} kind {op.kind}"
    if op.kind == "T" and not op.synchronised:
        head += " unsync"
    if op.wake_connectors:
        head += f" wakes {', '.join(op.wake_connectors)}"
    out = [head + " {"]
    for p in op.params:
        line = f"    param {p.name}: {p.value_type}"
        if p.low is not None:
            line += f" in {p.low}..{p.high}"
        out.append(line)
    for g in op.guards:
        out.append(f"    guard {to_text(g)}")
    for a in op.actions:
        out.append(f"    action {_action_text(a)}")
    out.append("  }")
    return out


def _action_text(a):
    if a.op == "assign":
        return f"{a.target} := {to_text(a.value)}"
    if a.op == "send":
        return f"port_send({a.target}, {to_text(a.value)}, delay {to_text(a.delay)})"
    if a.op == "wake":
        return f"self_wake(delay {to_text(a.delay)})"
    if a.op == "call":
        return f"call {a.target}"
    raise ValueError(f"unknown action {a.op!r}")


def _refines(r):
    out = [f'refines "{r.abstract_path}" {{']
    for g in r.glue:
        out.append(f"  glue {to_text(g)}")
    for conc, abs_ in r.event_map:
        out.append(f"  map {conc} -> {abs_}")
    for conc, abs_ in r.state_map:
        out.append(f"  state {conc} -> {abs_}")
    out.append("}")
    return out
