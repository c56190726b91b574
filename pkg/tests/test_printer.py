"""Canonical printing: byte determinism and parse∘print identity, both on
the shipped models and on randomly generated ones."""

import pytest
from hypothesis import given, settings, strategies as st

from coda.exprs import BOOL, NAT, Bin, Lit, Name, Recv, StateTest, set_ref
from coda.model import (Action, CarrierSet, Component, Connector, Context,
                        INITIAL, Model, Operation, Param, RefinesClause,
                        State, StateMachine, Transition, Variable)
from coda.parser import parse
from coda.printer import print_model
from conftest import MODEL_NAMES, model_path


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_shipped_models_round_trip(name, models):
    model = models[name]
    text = print_model(model)
    assert parse(text) == model
    assert print_model(parse(text)) == text  # canonical fixpoint


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_printing_is_deterministic(name, models):
    assert print_model(models[name]) == print_model(models[name])


# --- random model generation (normal-form IR) ---------------------------

@st.composite
def gen_expr(draw, vars, elements, depth=2):
    options = ["lit", "var"] if vars else ["lit"]
    if depth > 0:
        options += ["bin", "not"]
    kind = draw(st.sampled_from(options))
    if kind == "lit":
        pool = [Lit(True), Lit(False), Lit(0), Lit(draw(st.integers(0, 9)))]
        if elements:
            # element references parse as names; resolution is validation's
            pool.append(Name((draw(st.sampled_from(elements)),)))
        return draw(st.sampled_from(pool))
    if kind == "var":
        return Name((draw(st.sampled_from(vars)),))
    if kind == "not":
        from coda.exprs import Unary
        return Unary("not", draw(gen_expr(vars, elements, depth - 1)))
    op = draw(st.sampled_from(["and", "or", "=", "+", "<="]))
    return Bin(op, draw(gen_expr(vars, elements, depth - 1)),
               draw(gen_expr(vars, elements, depth - 1)))


@st.composite
def gen_machine(draw, owner, idx):
    flat = [State(f"S{idx}_{i}") for i in range(draw(st.integers(2, 4)))]
    nest = draw(st.booleans())
    if nest:
        sub = (State(f"S{idx}_N1"), State(f"S{idx}_N2"))
        flat[0] = State(flat[0].name, substates=sub)
    states = tuple(flat)
    transitions = [Transition(f"init_{states[-1].name}", INITIAL,
                              states[-1].name)]
    if nest:
        transitions.append(Transition(f"init_S{idx}_N1", INITIAL,
                                      f"S{idx}_N1"))
    leaf_names = [s.name for s in states[1:]] + (
        [f"S{idx}_N1", f"S{idx}_N2"] if nest else [states[0].name])
    for i in range(draw(st.integers(0, 3))):
        src = draw(st.sampled_from(leaf_names))
        tgt = draw(st.sampled_from(leaf_names))
        transitions.append(Transition(f"t{idx}_{i}", src, tgt))
    return StateMachine(f"sm{idx}", owner, draw(st.sampled_from(
        ["async", "async", "sync"])), states, tuple(transitions))


@st.composite
def gen_model(draw):
    elements = ["EA", "EB", "EC"][:draw(st.integers(2, 3))]
    ctx = Context("ctx", (CarrierSet("KIND", tuple(elements)),))
    comp_names = [f"C{i}" for i in range(draw(st.integers(1, 3)))]
    connectors = []
    if len(comp_names) > 1:
        for i in range(draw(st.integers(0, 2))):
            a, b = draw(st.permutations(comp_names))[:2]
            ty = draw(st.sampled_from([BOOL, NAT, set_ref("KIND")]))
            connectors.append(Connector(f"ch{i}", ty, a, b))
    components = []
    for ci, cname in enumerate(comp_names):
        vars = []
        for vi in range(draw(st.integers(0, 2))):
            ty, init = draw(st.sampled_from(
                [(BOOL, Lit(False)), (NAT, Lit(0)),
                 (set_ref("KIND"), Name((elements[0],)))]))
            vars.append(Variable(f"v{ci}_{vi}", ty, init))
        vnames = [v.name for v in vars]
        ops = []
        for oi in range(draw(st.integers(0, 2))):
            kind = draw(st.sampled_from(["E", "T", "M"]))
            guards = tuple(draw(st.lists(gen_expr(vnames, elements),
                                         max_size=2)))
            actions = []
            if vnames and draw(st.booleans()):
                actions.append(Action(
                    "assign", draw(st.sampled_from(vnames)),
                    draw(gen_expr(vnames, elements))))
            mine = [c for c in connectors if c.source == cname]
            if mine and draw(st.booleans()):
                c = draw(st.sampled_from(mine))
                value = (Lit(0) if c.value_type == NAT
                         else Lit(True) if c.value_type == BOOL
                         else Name((elements[0],)))
                actions.append(Action("send", c.name, value,
                                      Lit(draw(st.integers(0, 3)))))
            if draw(st.booleans()):
                actions.append(Action("wake", delay=Lit(1)))
            params = ()
            if kind == "E" and draw(st.booleans()):
                params = (Param(f"p{ci}_{oi}", NAT, 0, 2),)
            ops.append(Operation(f"op{ci}_{oi}", cname, kind,
                                 params=params, guards=guards,
                                 actions=tuple(actions),
                                 synchronised=kind != "E"))
        machines = []
        if draw(st.booleans()):
            machines.append(draw(gen_machine(cname, ci)))
        components.append(Component(cname, tuple(vars), tuple(ops),
                                    tuple(machines)))
    refines = None
    if draw(st.booleans()):
        refines = RefinesClause("other.coda",
                                event_map=(("op0_0", "new"),))
    return Model("fuzzed", (ctx,), tuple(connectors), tuple(components),
                 refines)


@settings(max_examples=120, deadline=None)
@given(gen_model())
def test_random_models_round_trip(model):
    text = print_model(model)
    again = parse(text)
    assert again == model
    assert print_model(again) == text
